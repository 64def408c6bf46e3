#include "sonoscope/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "sonoscope/errors.h"

namespace sonoscope {
namespace {

void put32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(const std::vector<unsigned char>& b) : bytes_(b) {}

  const unsigned char* take(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw FormatError("checkpoint: truncated");
    const unsigned char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::uint32_t u32() {
    const unsigned char* p = take(4);
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<unsigned char> encode_checkpoint(const std::vector<NamedTensor>& tensors) {
  std::vector<unsigned char> out = {'H', 'L', 'T', 'C'};
  put32(out, kCheckpointVersion);
  put32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const NamedTensor& t : tensors) {
    if (t.name.empty() || t.name.size() > 255) throw FormatError("checkpoint: bad tensor name");
    out.push_back(static_cast<unsigned char>(t.name.size()));
    out.insert(out.end(), t.name.begin(), t.name.end());
    put32(out, static_cast<std::uint32_t>(t.value.rank()));
    for (int d : t.value.dims()) put32(out, static_cast<std::uint32_t>(d));
    for (float v : t.value.storage()) put32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

std::vector<NamedTensor> decode_checkpoint(const std::vector<unsigned char>& bytes) {
  Reader r(bytes);
  if (std::memcmp(r.take(4), "HLTC", 4) != 0) throw FormatError("checkpoint: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw UnsupportedError("checkpoint: unsupported version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32();
  std::vector<NamedTensor> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    const std::size_t len = *r.take(1);
    const unsigned char* name = r.take(len);
    t.name.assign(reinterpret_cast<const char*>(name), len);
    const std::uint32_t rank = r.u32();
    if (rank == 0 || rank > 8) throw FormatError("checkpoint: bad rank for '" + t.name + "'");
    std::vector<int> dims;
    for (std::uint32_t d = 0; d < rank; ++d) {
      const std::uint32_t v = r.u32();
      if (v == 0 || v > (1U << 30)) throw FormatError("checkpoint: bad dimension");
      dims.push_back(static_cast<int>(v));
    }
    t.value = nn::Tensor<float>(dims);
    for (float& v : t.value.storage()) v = std::bit_cast<float>(r.u32());
    out.push_back(std::move(t));
  }
  if (!r.done()) throw FormatError("checkpoint: trailing bytes");
  return out;
}

void write_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors) {
  const auto bytes = encode_checkpoint(tensors);
  // Readers never observe a partially written file.
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                         std::istreambuf_iterator<char>()};
  return decode_checkpoint(bytes);
}

}  // namespace sonoscope
