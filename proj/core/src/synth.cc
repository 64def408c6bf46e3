#include "sonoscope/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "sonoscope/errors.h"
#include "sonoscope/random.h"

namespace sonoscope {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct ClassSignature {
  double fundamental;  // Hz
  double am_rate;      // Hz, blade-rate style modulation
  double chirp_lo, chirp_hi;
  double noise;        // std of the colored noise floor
};

ClassSignature signature(int label, bool overlapping) {
  if (overlapping) {
    // Neighboring classes sit 6% apart and share most of the chirp band.
    const double f0 = 300.0 * std::pow(1.06, label);
    return {f0, 3.0 + 0.5 * label, 1500.0 + 60.0 * label, 2200.0 + 60.0 * label, 0.12};
  }
  static constexpr double kFundamentals[] = {90.0, 170.0, 310.0, 560.0, 820.0, 1150.0};
  static constexpr double kRates[] = {2.0, 4.0, 7.0, 11.0, 5.5, 9.0};
  const int i = label % 6;
  const double lo = 900.0 + 1100.0 * i;
  return {kFundamentals[i], kRates[i], lo, lo + 450.0, 0.06};
}

}  // namespace

std::vector<float> synthesize_recording(const SynthConfig& cfg, int class_label,
                                        int recording_index, int rate_hz) {
  const ClassSignature sig = signature(class_label, cfg.overlapping);
  Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(class_label) * 100003 + recording_index));

  const double jitter = cfg.overlapping ? 0.012 : 0.04;
  const double f0 = sig.fundamental * (1.0 + rng.uniform(-jitter, jitter));
  const double am = sig.am_rate * (1.0 + rng.uniform(-0.1, 0.1));
  const double tone_gain = rng.uniform(0.10, 0.16);
  const double chirp_gain = rng.uniform(0.04, 0.08);
  const double chirp_period = rng.uniform(1.2, 1.8);
  const double noise_std = sig.noise * rng.uniform(0.8, 1.25);
  double phases[4];
  for (double& p : phases) p = rng.uniform(0.0, kTwoPi);

  const auto n = static_cast<std::size_t>(std::llround(cfg.seconds * rate_hz));
  std::vector<float> out(n);
  // One-pole lowpass gives the noise a falling (red-ish) spectrum.
  const double pole = 0.6;
  double colored = 0.0;
  double chirp_phase = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate_hz;
    const double mod = 1.0 + 0.5 * std::sin(kTwoPi * am * t + phases[3]);
    double tonal = 0.0;
    for (int h = 1; h <= 3; ++h) {
      tonal += std::sin(kTwoPi * h * f0 * t + phases[h - 1]) / h;
    }
    const double frac = std::fmod(t, chirp_period) / chirp_period;
    const double f_inst = sig.chirp_lo + (sig.chirp_hi - sig.chirp_lo) * frac;
    chirp_phase += kTwoPi * f_inst / rate_hz;
    const double chirp = std::sin(chirp_phase) * std::sin(std::numbers::pi * frac);
    colored = pole * colored + (1.0 - pole) * rng.normal() * 2.0;
    const double v = tone_gain * mod * tonal + chirp_gain * chirp + noise_std * colored;
    out[i] = static_cast<float>(std::clamp(v, -1.0, 1.0));
  }
  return out;
}

std::filesystem::path generate_corpus(const std::filesystem::path& dir, const SynthConfig& cfg) {
  if (cfg.classes < 1 || cfg.recordings_per_class < 1 || !(cfg.seconds > 0)) {
    throw ConfigError("synthetic corpus needs classes, recordings and duration");
  }
  std::filesystem::create_directories(dir / "audio");
  std::vector<CorpusEntry> entries;
  int global = 0;
  for (int c = 0; c < cfg.classes; ++c) {
    for (int r = 0; r < cfg.recordings_per_class; ++r, ++global) {
      const bool oversampled = cfg.oversampled_every > 0 && global % cfg.oversampled_every == cfg.oversampled_every - 1;
      const int rate = oversampled ? 2 * cfg.sample_rate_hz : cfg.sample_rate_hz;
      char id[32];
      std::snprintf(id, sizeof id, "c%d_r%03d", c, r);
      const auto rel = std::filesystem::path("audio") / (std::string(id) + ".wav");
      write_wav(dir / rel, synthesize_recording(cfg, c, r, rate), rate,
                oversampled ? WavEncoding::kFloat32 : WavEncoding::kPcm16);
      entries.push_back({id, rel, c});
    }
  }
  const auto manifest = dir / "manifest.csv";
  write_corpus_manifest(manifest, entries);
  return manifest;
}

}  // namespace sonoscope
