#ifndef SONOSCOPE_TF_FEATURES_H_
#define SONOSCOPE_TF_FEATURES_H_

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sonoscope/signal_io.h"

namespace sonoscope {

// Canonical order; also the bit index in a combination mask and the on-disk
// kind byte of the feature cache.
enum class FeatureKind : std::uint8_t {
  kMs = 0,
  kMfcc = 1,
  kStft = 2,
  kGfcc = 3,
  kCqt = 4,
  kVqt = 5,
};

inline constexpr int kNumFeatureKinds = 6;

inline constexpr std::array<FeatureKind, kNumFeatureKinds> kAllFeatureKinds = {
    FeatureKind::kMs,   FeatureKind::kMfcc, FeatureKind::kStft,
    FeatureKind::kGfcc, FeatureKind::kCqt,  FeatureKind::kVqt};

const char* feature_name(FeatureKind kind);
FeatureKind parse_feature_kind(const std::string& name);
// Frequency bins produced for each kind: 44, 16, 48, 64, 64, 64.
int feature_bins(FeatureKind kind);

// A [freq_bins x time_frames] grid stored frequency-major.
struct FeatureMap {
  FeatureKind kind = FeatureKind::kMs;
  int freq_bins = 0;
  int time_frames = 0;
  std::vector<float> values;

  float at(int f, int t) const {
    return values[static_cast<std::size_t>(f) * time_frames + t];
  }
  float& at(int f, int t) {
    return values[static_cast<std::size_t>(f) * time_frames + t];
  }
};

struct FrameParams {
  int window_len = 4000;
  int hop_len = 1024;

  // 250 ms window, 64 ms hop by default.
  static FrameParams from_ms(int sample_rate_hz, double window_ms = 250.0,
                             double hop_ms = 64.0);
  void validate() const;
};

// Geometric bin layout shared by the constant-Q and variable-Q transforms.
struct QGeometry {
  int bins = 64;
  int bins_per_octave = 8;
  double f_min = 31.25;
};

struct QBin {
  double frequency = 0.0;
  double bandwidth = 0.0;
  double q = 0.0;
  int length = 0;
};

struct FeatureConfig {
  int sample_rate_hz = 16000;
  FrameParams frame;
  QGeometry q_geometry;

  static FeatureConfig for_rate(int sample_rate_hz);
};

inline constexpr double kLogFloor = 1e-10;

int frame_count(int seg_len, const FrameParams& p);

// One-sided complex STFT, [n_fft/2+1 x frames], bin-major. n_fft = window_len.
struct ComplexGrid {
  int bins = 0;
  int frames = 0;
  std::vector<std::complex<double>> values;

  const std::complex<double>& at(int k, int t) const {
    return values[static_cast<std::size_t>(k) * frames + t];
  }
};

// Periodic Hann window.
std::vector<double> hann_window(int n);

ComplexGrid stft_complex(std::span<const float> samples, const FrameParams& p);

// HTK mel scale.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular filters, rows peak-normalized to 1. [n_mels x n_fft/2+1].
Eigen::MatrixXd mel_filterbank(int n_mels, int n_fft, int rate_hz, double f_min,
                               double f_max);
std::vector<double> mel_center_frequencies(int n_mels, double f_min, double f_max);

// Orthonormal DCT-II, first n_keep coefficients.
std::vector<double> dct_ii(std::span<const double> v, int n_keep);

// Glasberg-Moore equivalent rectangular bandwidth and ERB-rate scale.
double erb_hz(double f_hz);
double hz_to_erb_rate(double f_hz);
double erb_rate_to_hz(double erb_rate);
std::vector<double> gammatone_center_frequencies(int channels, double f_lo,
                                                 double f_hi);

double cqt_q(int bins_per_octave);
double vqt_gamma(int bins_per_octave);
std::vector<QBin> cqt_bins(const QGeometry& g, int rate_hz);
std::vector<QBin> vqt_bins(const QGeometry& g, int rate_hz);
int q_frame_count(int seg_len, int hop_len);

// Precomputes every filterbank and kernel for one configuration; the kernels
// are shared read-only, so one extractor can serve many threads.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(const FeatureConfig& config);
  ~FeatureExtractor();
  FeatureExtractor(FeatureExtractor&&) noexcept;
  FeatureExtractor& operator=(FeatureExtractor&&) noexcept;

  const FeatureConfig& config() const { return config_; }

  FeatureMap compute(FeatureKind kind, std::span<const float> samples) const;

  FeatureMap stft(std::span<const float> samples) const;
  FeatureMap mel_spectrogram(std::span<const float> samples) const;
  FeatureMap mfcc(std::span<const float> samples) const;
  FeatureMap gfcc(std::span<const float> samples) const;
  // Log channel energies before the cepstral DCT.
  FeatureMap gammatone_log_energies(std::span<const float> samples) const;
  FeatureMap cqt(std::span<const float> samples) const;
  FeatureMap vqt(std::span<const float> samples) const;

  const Eigen::MatrixXd& mel_bank() const;
  const std::vector<double>& gammatone_centers() const;

 private:
  struct Impl;
  FeatureConfig config_;
  std::unique_ptr<const Impl> impl_;
};

// Segment-level entry points. Each uses a cached extractor for the segment's
// sample rate and the given frame parameters.
FeatureMap stft_feature(const Segment& seg, const FrameParams& p);
FeatureMap mel_spectrogram(const Segment& seg, const FrameParams& p);
FeatureMap mfcc(const Segment& seg, const FrameParams& p);
FeatureMap gfcc(const Segment& seg, const FrameParams& p);
FeatureMap cqt(const Segment& seg, int hop_len);
FeatureMap vqt(const Segment& seg, int hop_len);
ComplexGrid stft_complex(const Segment& seg, const FrameParams& p);

}  // namespace sonoscope

#endif  // SONOSCOPE_TF_FEATURES_H_
