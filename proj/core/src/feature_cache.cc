#include "sonoscope/feature_cache.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "sonoscope/errors.h"

namespace sonoscope {
namespace {

constexpr char kMagic[4] = {'T', 'F', 'F', 'M'};
constexpr std::size_t kHeaderBytes = 4 + 4 + 1 + 4 + 4;

void put32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

std::vector<unsigned char> encode_feature_map(const FeatureMap& map) {
  const std::size_t n = static_cast<std::size_t>(map.freq_bins) * map.time_frames;
  if (map.values.size() != n) throw SizeError("feature map value count mismatch");
  std::vector<unsigned char> out;
  out.reserve(kHeaderBytes + 4 * n);
  out.insert(out.end(), kMagic, kMagic + 4);
  put32(out, kFeatureCacheVersion);
  out.push_back(static_cast<unsigned char>(map.kind));
  put32(out, static_cast<std::uint32_t>(map.freq_bins));
  put32(out, static_cast<std::uint32_t>(map.time_frames));
  for (float v : map.values) put32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

FeatureMap decode_feature_map(std::span<const unsigned char> bytes) {
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("feature cache: bad magic");
  }
  const std::uint32_t version = get32(bytes.data() + 4);
  if (version != kFeatureCacheVersion) {
    throw UnsupportedError("feature cache: unsupported version " + std::to_string(version));
  }
  const unsigned kind = bytes[8];
  if (kind >= static_cast<unsigned>(kNumFeatureKinds)) throw FormatError("feature cache: bad kind");
  FeatureMap map;
  map.kind = static_cast<FeatureKind>(kind);
  map.freq_bins = static_cast<int>(get32(bytes.data() + 9));
  map.time_frames = static_cast<int>(get32(bytes.data() + 13));
  const std::size_t n = static_cast<std::size_t>(map.freq_bins) * map.time_frames;
  if (map.freq_bins <= 0 || map.time_frames <= 0 || bytes.size() != kHeaderBytes + 4 * n) {
    throw FormatError("feature cache: size does not match header");
  }
  map.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    map.values[i] = std::bit_cast<float>(get32(bytes.data() + kHeaderBytes + 4 * i));
  }
  return map;
}

void write_feature_map(const std::filesystem::path& path, const FeatureMap& map) {
  write_bytes(path, encode_feature_map(map));
}

FeatureMap read_feature_map(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  try {
    return decode_feature_map(bytes);
  } catch (const Error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

bool write_feature_map_if_changed(const std::filesystem::path& path, const FeatureMap& map) {
  const auto bytes = encode_feature_map(map);
  std::error_code ec;
  if (std::filesystem::exists(path, ec) &&
      std::filesystem::file_size(path, ec) == bytes.size() && slurp(path) == bytes) {
    return false;
  }
  write_bytes(path, bytes);
  return true;
}

}  // namespace sonoscope
