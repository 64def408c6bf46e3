#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "sonoscope/errors.h"
#include "sonoscope/signal_io.h"

namespace sonoscope {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void put16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

void put32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
  }
}

void put_tag(std::vector<unsigned char>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

struct FmtChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
  std::uint16_t block_align = 0;
};

}  // namespace

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                         std::istreambuf_iterator<char>()};
  const std::string name = path.string();

  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError(name + ": not a RIFF/WAVE file");
  }

  FmtChunk fmt;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    const std::uint32_t chunk_size = le32(hdr + 4);
    const std::size_t body = pos + 8;
    if (body + chunk_size > bytes.size()) {
      // A truncated trailing data chunk is tolerated; anything else is not.
      if (std::memcmp(hdr, "data", 4) == 0 && have_fmt) {
        data = bytes.data() + body;
        data_size = bytes.size() - body;
        break;
      }
      throw FormatError(name + ": chunk extends past end of file");
    }
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw FormatError(name + ": short fmt chunk");
      const unsigned char* f = bytes.data() + body;
      fmt.format = le16(f);
      fmt.channels = le16(f + 2);
      fmt.sample_rate = le32(f + 4);
      fmt.block_align = le16(f + 12);
      fmt.bits = le16(f + 14);
      if (fmt.format == kFormatExtensible) {
        if (chunk_size < 40) throw FormatError(name + ": short extensible fmt");
        fmt.format = le16(f + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = chunk_size;
    }
    pos = body + chunk_size + (chunk_size & 1U);
  }

  if (!have_fmt) throw FormatError(name + ": missing fmt chunk");
  if (data == nullptr) throw FormatError(name + ": missing data chunk");
  if (fmt.channels == 0 || fmt.sample_rate == 0) {
    throw FormatError(name + ": zero channels or sample rate");
  }

  const bool pcm16 = fmt.format == kFormatPcm && fmt.bits == 16;
  const bool float32 = fmt.format == kFormatFloat && fmt.bits == 32;
  if (!pcm16 && !float32) {
    throw UnsupportedError(name + ": only 16-bit PCM and 32-bit float are supported (format " +
                           std::to_string(fmt.format) + ", " +
                           std::to_string(fmt.bits) + " bits)");
  }
  if (fmt.channels > 2) {
    throw UnsupportedError(name + ": more than two channels");
  }

  const std::size_t sample_bytes = fmt.bits / 8;
  const std::size_t frame_bytes = sample_bytes * fmt.channels;
  if (fmt.block_align != 0 && fmt.block_align != frame_bytes) {
    throw FormatError(name + ": inconsistent block alignment");
  }
  const std::size_t frames = data_size / frame_bytes;

  AudioBuffer buf;
  buf.sample_rate_hz = static_cast<int>(fmt.sample_rate);
  buf.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < fmt.channels; ++c) {
      const unsigned char* p = data + i * frame_bytes + c * sample_bytes;
      double v;
      if (pcm16) {
        v = static_cast<std::int16_t>(le16(p)) / 32768.0;
      } else {
        const std::uint32_t bits = le32(p);
        float f;
        std::memcpy(&f, &bits, sizeof f);
        if (!std::isfinite(f)) throw FormatError(name + ": non-finite sample");
        v = std::clamp(static_cast<double>(f), -1.0, 1.0);
      }
      acc += v;
    }
    buf.samples[i] = static_cast<float>(acc / fmt.channels);
  }
  return buf;
}

void write_wav(const std::filesystem::path& path, std::span<const float> samples,
               int sample_rate_hz, WavEncoding encoding) {
  const bool pcm16 = encoding == WavEncoding::kPcm16;
  const std::uint16_t bits = pcm16 ? 16 : 32;
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(samples.size() * (bits / 8));

  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put32(out, 16);
  put16(out, pcm16 ? kFormatPcm : kFormatFloat);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(sample_rate_hz));
  put32(out, static_cast<std::uint32_t>(sample_rate_hz) * (bits / 8));
  put16(out, bits / 8);
  put16(out, bits);
  put_tag(out, "data");
  put32(out, data_bytes);
  for (float s : samples) {
    if (pcm16) {
      const double scaled = std::round(static_cast<double>(s) * 32768.0);
      const auto v = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
      put16(out, static_cast<std::uint16_t>(v));
    } else {
      std::uint32_t u;
      std::memcpy(&u, &s, sizeof u);
      put32(out, u);
    }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()),
          static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("short write to " + path.string());
}

}  // namespace sonoscope
