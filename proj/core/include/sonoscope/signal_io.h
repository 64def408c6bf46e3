#ifndef SONOSCOPE_SIGNAL_IO_H_
#define SONOSCOPE_SIGNAL_IO_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace sonoscope {

// Mono sample stream with amplitudes in [-1, 1].
struct AudioBuffer {
  std::vector<float> samples;
  int sample_rate_hz = 0;
  std::string recording_id;
  int class_label = 0;

  double duration_seconds() const {
    return sample_rate_hz > 0
               ? static_cast<double>(samples.size()) / sample_rate_hz
               : 0.0;
  }
};

// Fixed-length labeled clip cut from one recording.
struct Segment {
  std::vector<float> samples;
  int sample_rate_hz = 0;
  std::string recording_id;
  int class_label = 0;
  int segment_index = 0;
};

enum class WavEncoding { kPcm16, kFloat32 };

// Reads a RIFF/WAVE file holding 16-bit PCM or 32-bit IEEE float with one or
// two channels. Stereo input is averaged to mono. Throws FormatError on a
// malformed header and UnsupportedError on any other encoding.
AudioBuffer read_wav(const std::filesystem::path& path);

// Writes a mono buffer. PCM16 output is clipped to the representable range.
void write_wav(const std::filesystem::path& path, std::span<const float> samples,
               int sample_rate_hz, WavEncoding encoding = WavEncoding::kPcm16);

// Band-limited rational resampling with a Kaiser-windowed sinc kernel.
// Identity (bit-exact copy) when the rates already match.
AudioBuffer resample(const AudioBuffer& buf, int target_hz);

// Splits into non-overlapping segments of `seconds`; the trailing partial
// segment is discarded.
std::vector<Segment> segment(const AudioBuffer& buf, double seconds);

enum class Partition : std::uint8_t { kTrain = 0, kVal = 1, kTest = 2 };

const char* partition_name(Partition p);
Partition parse_partition(const std::string& name);

struct RecordingInfo {
  std::string recording_id;
  int class_label = 0;
  int segment_count = 0;
};

struct SplitManifest {
  std::map<std::string, Partition> assignments;
  std::uint64_t seed = 0;
  std::array<double, 3> achieved_ratios{};
  std::array<std::int64_t, 3> segment_counts{};

  Partition partition_of(const std::string& recording_id) const;
};

// Recording-level train/val/test split. Classes are shuffled independently
// with the seed, interleaved round-robin, and each recording is assigned to
// the partition with the largest remaining segment deficit.
SplitManifest split_dataset(const std::vector<RecordingInfo>& recordings,
                            const std::array<double, 3>& ratios,
                            std::uint64_t seed);

// CSV `recording_id,partition,seed`.
void write_split_csv(const std::filesystem::path& path,
                     const SplitManifest& manifest);
SplitManifest read_split_csv(const std::filesystem::path& path);

struct CorpusEntry {
  std::string recording_id;
  std::filesystem::path path;
  int class_label = 0;
};

// CSV `recording_id,path,class_label`. Relative paths are resolved against
// the manifest's directory.
std::vector<CorpusEntry> read_corpus_manifest(const std::filesystem::path& path);
void write_corpus_manifest(const std::filesystem::path& path,
                           const std::vector<CorpusEntry>& entries);

}  // namespace sonoscope

#endif  // SONOSCOPE_SIGNAL_IO_H_
