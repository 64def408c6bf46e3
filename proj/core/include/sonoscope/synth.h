#ifndef SONOSCOPE_SYNTH_H_
#define SONOSCOPE_SYNTH_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sonoscope/signal_io.h"

namespace sonoscope {

// Parameters of a generated ship-noise-like corpus. Each class has its own
// tonal lines (with harmonics), amplitude-modulation rate and chirp band over
// colored noise; recordings jitter these per class.
struct SynthConfig {
  int classes = 4;
  int recordings_per_class = 10;
  double seconds = 45.0;
  int sample_rate_hz = 16000;
  // Every n-th recording is written at twice the rate to exercise resampling
  // (0 disables).
  int oversampled_every = 4;
  // Class tonal lines packed close together in frequency, with more noise.
  bool overlapping = false;
  std::uint64_t seed = 0;
};

// Synthesizes one recording of `cfg.seconds` at `rate_hz`.
std::vector<float> synthesize_recording(const SynthConfig& cfg, int class_label,
                                        int recording_index, int rate_hz);

// Writes WAV files plus `manifest.csv` into `dir`; returns the manifest path.
std::filesystem::path generate_corpus(const std::filesystem::path& dir, const SynthConfig& cfg);

}  // namespace sonoscope

#endif  // SONOSCOPE_SYNTH_H_
