#include "sonoscope/tf_features.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "sonoscope/errors.h"
#include "sonoscope/fft.h"

namespace sonoscope {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMelBands = 44;
constexpr int kMfccCoefficients = 16;
constexpr int kStftBins = 48;
constexpr int kGammatoneChannels = 64;
constexpr double kGammatoneLowHz = 50.0;
constexpr int kGammatoneOrder = 4;

double dct_basis(int k, int n, int size) {
  const double scale = k == 0 ? std::sqrt(1.0 / size) : std::sqrt(2.0 / size);
  return scale * std::cos(kPi * k * (2.0 * n + 1.0) / (2.0 * size));
}

// Row-major [n_keep x size] basis so that dct_ii and the cached path agree
// bit for bit.
std::vector<double> dct_matrix(int size, int n_keep) {
  std::vector<double> m(static_cast<std::size_t>(size) * n_keep);
  for (int k = 0; k < n_keep; ++k) {
    for (int n = 0; n < size; ++n) m[static_cast<std::size_t>(k) * size + n] = dct_basis(k, n, size);
  }
  return m;
}

void apply_dct(const std::vector<double>& basis, int size, int n_keep,
               std::span<const double> v, std::span<double> out) {
  for (int k = 0; k < n_keep; ++k) {
    const double* row = basis.data() + static_cast<std::size_t>(k) * size;
    double acc = 0.0;
    for (int n = 0; n < size; ++n) acc += v[n] * row[n];
    out[k] = acc;
  }
}

std::vector<std::complex<double>> make_q_kernel(const QBin& bin, int rate_hz) {
  const int len = bin.length;
  std::vector<std::complex<double>> kernel(static_cast<std::size_t>(len));
  const std::vector<double> win = hann_window(len);
  double win_sum = 0.0;
  for (double w : win) win_sum += w;
  const double half = std::floor(len / 2.0);
  for (int n = 0; n < len; ++n) {
    const double t = (n - half) / rate_hz;
    const double phase = -2.0 * kPi * bin.frequency * t;
    kernel[static_cast<std::size_t>(n)] =
        std::polar(win[static_cast<std::size_t>(n)] / win_sum, phase);
  }
  return kernel;
}

FeatureMap make_map(FeatureKind kind, int bins, int frames) {
  FeatureMap m;
  m.kind = kind;
  m.freq_bins = bins;
  m.time_frames = frames;
  m.values.assign(static_cast<std::size_t>(bins) * frames, 0.0f);
  return m;
}

}  // namespace

const char* feature_name(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kMs:
      return "MS";
    case FeatureKind::kMfcc:
      return "MFCC";
    case FeatureKind::kStft:
      return "STFT";
    case FeatureKind::kGfcc:
      return "GFCC";
    case FeatureKind::kCqt:
      return "CQT";
    case FeatureKind::kVqt:
      return "VQT";
  }
  return "?";
}

FeatureKind parse_feature_kind(const std::string& name) {
  std::string upper = name;
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (FeatureKind k : kAllFeatureKinds) {
    if (upper == feature_name(k)) return k;
  }
  throw SelectionError("unknown feature kind '" + name + "'");
}

int feature_bins(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kMs:
      return kMelBands;
    case FeatureKind::kMfcc:
      return kMfccCoefficients;
    case FeatureKind::kStft:
      return kStftBins;
    case FeatureKind::kGfcc:
    case FeatureKind::kCqt:
    case FeatureKind::kVqt:
      return 64;
  }
  return 0;
}

FrameParams FrameParams::from_ms(int sample_rate_hz, double window_ms, double hop_ms) {
  FrameParams p;
  p.window_len = static_cast<int>(std::lround(sample_rate_hz * window_ms / 1000.0));
  p.hop_len = static_cast<int>(std::lround(sample_rate_hz * hop_ms / 1000.0));
  p.validate();
  return p;
}

void FrameParams::validate() const {
  if (hop_len <= 0 || hop_len > window_len) {
    throw RangeError("frame params require 0 < hop_len <= window_len");
  }
}

FeatureConfig FeatureConfig::for_rate(int sample_rate_hz) {
  FeatureConfig c;
  c.sample_rate_hz = sample_rate_hz;
  c.frame = FrameParams::from_ms(sample_rate_hz);
  return c;
}

int frame_count(int seg_len, const FrameParams& p) {
  p.validate();
  if (seg_len < p.window_len) {
    throw TooShortError("segment of " + std::to_string(seg_len) +
                        " samples is shorter than the " +
                        std::to_string(p.window_len) + "-sample window");
  }
  return (seg_len - p.window_len) / p.hop_len + 1;
}

int q_frame_count(int seg_len, int hop_len) {
  if (hop_len <= 0) throw RangeError("hop_len must be positive");
  if (seg_len <= 0) throw TooShortError("empty segment");
  return seg_len / hop_len + 1;
}

std::vector<double> hann_window(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / n);
  return w;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> mel_center_frequencies(int n_mels, double f_min, double f_max) {
  const double lo = hz_to_mel(f_min);
  const double hi = hz_to_mel(f_max);
  std::vector<double> centers(static_cast<std::size_t>(n_mels));
  for (int m = 0; m < n_mels; ++m) {
    centers[static_cast<std::size_t>(m)] = mel_to_hz(lo + (hi - lo) * (m + 1) / (n_mels + 1));
  }
  return centers;
}

Eigen::MatrixXd mel_filterbank(int n_mels, int n_fft, int rate_hz, double f_min,
                               double f_max) {
  if (n_mels < 1 || n_fft < 2 || rate_hz <= 0 || !(f_min >= 0.0) ||
      !(f_min < f_max) || f_max > rate_hz / 2.0) {
    throw RangeError("mel_filterbank: require n_mels >= 1 and 0 <= f_min < f_max <= rate/2");
  }
  const int bins = n_fft / 2 + 1;
  const double lo = hz_to_mel(f_min);
  const double hi = hz_to_mel(f_max);
  std::vector<double> corners(static_cast<std::size_t>(n_mels) + 2);
  for (int i = 0; i < n_mels + 2; ++i) {
    corners[static_cast<std::size_t>(i)] = mel_to_hz(lo + (hi - lo) * i / (n_mels + 1));
  }

  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(n_mels, bins);
  for (int m = 0; m < n_mels; ++m) {
    const double left = corners[static_cast<std::size_t>(m)];
    const double center = corners[static_cast<std::size_t>(m) + 1];
    const double right = corners[static_cast<std::size_t>(m) + 2];
    int nearest = 0;
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * rate_hz / n_fft;
      const double up = (f - left) / (center - left);
      const double down = (right - f) / (right - center);
      fb(m, k) = std::max(0.0, std::min(up, down));
      if (std::abs(f - center) <
          std::abs(static_cast<double>(nearest) * rate_hz / n_fft - center)) {
        nearest = k;
      }
    }
    const double peak = fb.row(m).maxCoeff();
    if (peak > 0.0) {
      fb.row(m) /= peak;
    } else {
      // Filter narrower than one FFT bin: collapse onto the nearest bin.
      fb(m, nearest) = 1.0;
    }
  }
  return fb;
}

std::vector<double> dct_ii(std::span<const double> v, int n_keep) {
  const int size = static_cast<int>(v.size());
  if (n_keep < 1 || n_keep > size) throw RangeError("dct_ii: require 1 <= n_keep <= N");
  std::vector<double> out(static_cast<std::size_t>(n_keep));
  apply_dct(dct_matrix(size, n_keep), size, n_keep, v, out);
  return out;
}

double erb_hz(double f_hz) { return 24.7 * (4.37 * f_hz / 1000.0 + 1.0); }

double hz_to_erb_rate(double f_hz) { return 21.4 * std::log10(1.0 + 4.37 * f_hz / 1000.0); }

double erb_rate_to_hz(double erb_rate) {
  return (std::pow(10.0, erb_rate / 21.4) - 1.0) * 1000.0 / 4.37;
}

std::vector<double> gammatone_center_frequencies(int channels, double f_lo, double f_hi) {
  const double lo = hz_to_erb_rate(f_lo);
  const double hi = hz_to_erb_rate(f_hi);
  std::vector<double> c(static_cast<std::size_t>(channels));
  for (int i = 0; i < channels; ++i) {
    const double r = channels == 1 ? lo : lo + (hi - lo) * i / (channels - 1);
    c[static_cast<std::size_t>(i)] = erb_rate_to_hz(r);
  }
  return c;
}

double cqt_q(int bins_per_octave) {
  return 1.0 / (std::pow(2.0, 1.0 / bins_per_octave) - 1.0);
}

double vqt_gamma(int bins_per_octave) {
  const double alpha = std::pow(2.0, 1.0 / bins_per_octave) - 1.0;
  return 24.7 * alpha / 0.108;
}

namespace {

void check_q_geometry(const QGeometry& g, int rate_hz) {
  if (g.bins < 1 || g.bins_per_octave < 1 || !(g.f_min > 0.0)) {
    throw RangeError("invalid constant-Q geometry");
  }
  const double top = g.f_min * std::pow(2.0, static_cast<double>(g.bins - 1) / g.bins_per_octave);
  if (top > rate_hz / 2.0) {
    throw RangeError("constant-Q top bin " + std::to_string(top) +
                     " Hz exceeds the Nyquist frequency");
  }
}

std::vector<QBin> q_bins(const QGeometry& g, int rate_hz, double gamma) {
  check_q_geometry(g, rate_hz);
  const double alpha = std::pow(2.0, 1.0 / g.bins_per_octave) - 1.0;
  std::vector<QBin> bins(static_cast<std::size_t>(g.bins));
  for (int k = 0; k < g.bins; ++k) {
    QBin& b = bins[static_cast<std::size_t>(k)];
    b.frequency = g.f_min * std::pow(2.0, static_cast<double>(k) / g.bins_per_octave);
    b.bandwidth = alpha * b.frequency + gamma;
    b.q = b.frequency / b.bandwidth;
    b.length = static_cast<int>(std::ceil(b.q * rate_hz / b.frequency));
  }
  return bins;
}

}  // namespace

std::vector<QBin> cqt_bins(const QGeometry& g, int rate_hz) { return q_bins(g, rate_hz, 0.0); }

std::vector<QBin> vqt_bins(const QGeometry& g, int rate_hz) {
  return q_bins(g, rate_hz, vqt_gamma(g.bins_per_octave));
}

ComplexGrid stft_complex(std::span<const float> samples, const FrameParams& p) {
  const int frames = frame_count(static_cast<int>(samples.size()), p);
  const int n_fft = p.window_len;
  const RealFft fft(n_fft);
  const std::vector<double> win = hann_window(n_fft);

  ComplexGrid grid;
  grid.bins = fft.bins();
  grid.frames = frames;
  grid.values.resize(static_cast<std::size_t>(grid.bins) * frames);
  std::vector<double> frame(static_cast<std::size_t>(n_fft));
  std::vector<std::complex<double>> spec(static_cast<std::size_t>(grid.bins));
  for (int t = 0; t < frames; ++t) {
    const std::size_t start = static_cast<std::size_t>(t) * p.hop_len;
    for (int n = 0; n < n_fft; ++n) frame[static_cast<std::size_t>(n)] = win[static_cast<std::size_t>(n)] * samples[start + static_cast<std::size_t>(n)];
    fft.forward(frame, spec);
    for (int k = 0; k < grid.bins; ++k) {
      grid.values[static_cast<std::size_t>(k) * frames + t] = spec[static_cast<std::size_t>(k)];
    }
  }
  return grid;
}

struct FeatureExtractor::Impl {
  FrameParams frame;
  int rate_hz;
  std::vector<double> window;
  Eigen::MatrixXd mel;
  std::vector<std::pair<int, int>> mel_support;  // [first, last] bin per filter
  std::vector<double> dct_mel;                    // 16 x 44
  std::vector<double> dct_gammatone;              // 64 x 64
  std::vector<double> gt_centers;
  std::vector<double> gt_pole;
  std::vector<QBin> cqt_bins, vqt_bins;
  std::vector<std::vector<std::complex<double>>> cqt_kernels, vqt_kernels;
  std::string q_error;

  // Per-frame power spectrum, bin-major [bins x frames].
  Eigen::MatrixXd power(std::span<const float> samples) const {
    const ComplexGrid g = stft_complex(samples, frame);
    Eigen::MatrixXd p(g.bins, g.frames);
    for (int k = 0; k < g.bins; ++k) {
      for (int t = 0; t < g.frames; ++t) p(k, t) = std::norm(g.at(k, t));
    }
    return p;
  }

  FeatureMap q_transform(FeatureKind kind, std::span<const float> samples,
                         const std::vector<std::vector<std::complex<double>>>& kernels) const {
    if (!q_error.empty()) throw RangeError(q_error);
    const int n = static_cast<int>(samples.size());
    const int frames = q_frame_count(n, frame.hop_len);
    FeatureMap out = make_map(kind, static_cast<int>(kernels.size()), frames);
    for (std::size_t k = 0; k < kernels.size(); ++k) {
      const auto& kern = kernels[k];
      const int len = static_cast<int>(kern.size());
      const int half = len / 2;
      for (int t = 0; t < frames; ++t) {
        const int start = t * frame.hop_len - half;
        const int lo = std::max(0, -start);
        const int hi = std::min(len, n - start);
        double re = 0.0, im = 0.0;
        for (int i = lo; i < hi; ++i) {
          const double x = samples[static_cast<std::size_t>(start + i)];
          re += kern[static_cast<std::size_t>(i)].real() * x;
          im += kern[static_cast<std::size_t>(i)].imag() * x;
        }
        const double mag = std::sqrt(re * re + im * im);
        out.at(static_cast<int>(k), t) = static_cast<float>(20.0 * std::log10(mag + kLogFloor));
      }
    }
    return out;
  }
};

FeatureExtractor::FeatureExtractor(const FeatureConfig& config) : config_(config) {
  config_.frame.validate();
  if (config_.sample_rate_hz <= 0) throw RangeError("sample rate must be positive");
  auto impl = std::make_unique<Impl>();
  impl->frame = config_.frame;
  impl->rate_hz = config_.sample_rate_hz;
  impl->window = hann_window(config_.frame.window_len);
  impl->mel = mel_filterbank(kMelBands, config_.frame.window_len, config_.sample_rate_hz,
                             0.0, config_.sample_rate_hz / 2.0);
  for (int m = 0; m < kMelBands; ++m) {
    int first = -1, last = -1;
    for (int k = 0; k < impl->mel.cols(); ++k) {
      if (impl->mel(m, k) > 0.0) {
        if (first < 0) first = k;
        last = k;
      }
    }
    impl->mel_support.emplace_back(first, last);
  }
  impl->dct_mel = dct_matrix(kMelBands, kMfccCoefficients);
  impl->dct_gammatone = dct_matrix(kGammatoneChannels, kGammatoneChannels);

  impl->gt_centers = gammatone_center_frequencies(
      kGammatoneChannels, kGammatoneLowHz, config_.sample_rate_hz / 2.0);
  for (double fc : impl->gt_centers) {
    const double b = 1.019 * erb_hz(fc);
    impl->gt_pole.push_back(std::exp(-2.0 * kPi * b / config_.sample_rate_hz));
  }

  try {
    impl->cqt_bins = sonoscope::cqt_bins(config_.q_geometry, config_.sample_rate_hz);
    impl->vqt_bins = sonoscope::vqt_bins(config_.q_geometry, config_.sample_rate_hz);
    for (const auto& b : impl->cqt_bins) impl->cqt_kernels.push_back(make_q_kernel(b, config_.sample_rate_hz));
    for (const auto& b : impl->vqt_bins) impl->vqt_kernels.push_back(make_q_kernel(b, config_.sample_rate_hz));
  } catch (const RangeError& e) {
    impl->q_error = e.what();
  }
  impl_ = std::move(impl);
}

FeatureExtractor::~FeatureExtractor() = default;
FeatureExtractor::FeatureExtractor(FeatureExtractor&&) noexcept = default;
FeatureExtractor& FeatureExtractor::operator=(FeatureExtractor&&) noexcept = default;

const Eigen::MatrixXd& FeatureExtractor::mel_bank() const { return impl_->mel; }

const std::vector<double>& FeatureExtractor::gammatone_centers() const {
  return impl_->gt_centers;
}

FeatureMap FeatureExtractor::compute(FeatureKind kind, std::span<const float> samples) const {
  switch (kind) {
    case FeatureKind::kMs:
      return mel_spectrogram(samples);
    case FeatureKind::kMfcc:
      return mfcc(samples);
    case FeatureKind::kStft:
      return stft(samples);
    case FeatureKind::kGfcc:
      return gfcc(samples);
    case FeatureKind::kCqt:
      return cqt(samples);
    case FeatureKind::kVqt:
      return vqt(samples);
  }
  throw SelectionError("unknown feature kind");
}

FeatureMap FeatureExtractor::stft(std::span<const float> samples) const {
  const ComplexGrid g = stft_complex(samples, impl_->frame);
  if (g.bins < kStftBins) throw RangeError("window too short for 48 STFT bins");
  FeatureMap out = make_map(FeatureKind::kStft, kStftBins, g.frames);
  for (int k = 0; k < kStftBins; ++k) {
    for (int t = 0; t < g.frames; ++t) {
      out.at(k, t) = static_cast<float>(20.0 * std::log10(std::abs(g.at(k, t)) + kLogFloor));
    }
  }
  return out;
}

FeatureMap FeatureExtractor::mel_spectrogram(std::span<const float> samples) const {
  const Eigen::MatrixXd p = impl_->power(samples);
  FeatureMap out = make_map(FeatureKind::kMs, kMelBands, static_cast<int>(p.cols()));
  for (int m = 0; m < kMelBands; ++m) {
    const auto [first, last] = impl_->mel_support[static_cast<std::size_t>(m)];
    for (int t = 0; t < p.cols(); ++t) {
      double e = 0.0;
      for (int k = first; k <= last; ++k) e += impl_->mel(m, k) * p(k, t);
      out.at(m, t) = static_cast<float>(std::log(e + kLogFloor));
    }
  }
  return out;
}

FeatureMap FeatureExtractor::mfcc(std::span<const float> samples) const {
  const FeatureMap ms = mel_spectrogram(samples);
  FeatureMap out = make_map(FeatureKind::kMfcc, kMfccCoefficients, ms.time_frames);
  std::vector<double> column(kMelBands);
  std::vector<double> coeffs(kMfccCoefficients);
  for (int t = 0; t < ms.time_frames; ++t) {
    for (int m = 0; m < kMelBands; ++m) column[static_cast<std::size_t>(m)] = ms.at(m, t);
    apply_dct(impl_->dct_mel, kMelBands, kMfccCoefficients, column, coeffs);
    for (int k = 0; k < kMfccCoefficients; ++k) out.at(k, t) = static_cast<float>(coeffs[static_cast<std::size_t>(k)]);
  }
  return out;
}

FeatureMap FeatureExtractor::gammatone_log_energies(std::span<const float> samples) const {
  const FrameParams& fp = impl_->frame;
  const int n = static_cast<int>(samples.size());
  const int frames = frame_count(n, fp);
  const int used = (frames - 1) * fp.hop_len + fp.window_len;
  FeatureMap out = make_map(FeatureKind::kGfcc, kGammatoneChannels, frames);

  std::vector<double> filtered(static_cast<std::size_t>(used));
  for (int c = 0; c < kGammatoneChannels; ++c) {
    // Complex-baseband realization: shift the channel's center to DC, run a
    // cascade of identical one-pole lowpass sections, shift back.
    const double omega = 2.0 * kPi * impl_->gt_centers[static_cast<std::size_t>(c)] / impl_->rate_hz;
    const double a = impl_->gt_pole[static_cast<std::size_t>(c)];
    const double gain = 1.0 - a;
    const std::complex<double> step = std::polar(1.0, omega);
    std::complex<double> osc(1.0, 0.0);
    std::array<std::complex<double>, kGammatoneOrder> state{};
    for (int i = 0; i < used; ++i) {
      std::complex<double> z = std::conj(osc) * static_cast<double>(samples[static_cast<std::size_t>(i)]);
      for (auto& s : state) {
        s = gain * z + a * s;
        z = s;
      }
      filtered[static_cast<std::size_t>(i)] = 2.0 * (osc * z).real();
      osc *= step;
      if ((i & 1023) == 1023) osc /= std::abs(osc);
    }
    for (int t = 0; t < frames; ++t) {
      const std::size_t start = static_cast<std::size_t>(t) * fp.hop_len;
      double energy = 0.0;
      for (int k = 0; k < fp.window_len; ++k) {
        const double v = impl_->window[static_cast<std::size_t>(k)] * filtered[start + static_cast<std::size_t>(k)];
        energy += v * v;
      }
      out.at(c, t) = static_cast<float>(std::log(energy + kLogFloor));
    }
  }
  return out;
}

FeatureMap FeatureExtractor::gfcc(std::span<const float> samples) const {
  const FeatureMap energies = gammatone_log_energies(samples);
  FeatureMap out = make_map(FeatureKind::kGfcc, kGammatoneChannels, energies.time_frames);
  std::vector<double> column(kGammatoneChannels);
  std::vector<double> coeffs(kGammatoneChannels);
  for (int t = 0; t < energies.time_frames; ++t) {
    for (int c = 0; c < kGammatoneChannels; ++c) column[static_cast<std::size_t>(c)] = energies.at(c, t);
    apply_dct(impl_->dct_gammatone, kGammatoneChannels, kGammatoneChannels, column, coeffs);
    for (int k = 0; k < kGammatoneChannels; ++k) out.at(k, t) = static_cast<float>(coeffs[static_cast<std::size_t>(k)]);
  }
  return out;
}

FeatureMap FeatureExtractor::cqt(std::span<const float> samples) const {
  return impl_->q_transform(FeatureKind::kCqt, samples, impl_->cqt_kernels);
}

FeatureMap FeatureExtractor::vqt(std::span<const float> samples) const {
  return impl_->q_transform(FeatureKind::kVqt, samples, impl_->vqt_kernels);
}

namespace {

const FeatureExtractor& cached_extractor(int rate_hz, const FrameParams& p) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, std::unique_ptr<FeatureExtractor>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{rate_hz, p.window_len, p.hop_len}];
  if (!slot) {
    FeatureConfig cfg = FeatureConfig::for_rate(rate_hz);
    cfg.frame = p;
    slot = std::make_unique<FeatureExtractor>(cfg);
  }
  return *slot;
}

}  // namespace

ComplexGrid stft_complex(const Segment& seg, const FrameParams& p) {
  return stft_complex(seg.samples, p);
}

FeatureMap stft_feature(const Segment& seg, const FrameParams& p) {
  return cached_extractor(seg.sample_rate_hz, p).stft(seg.samples);
}

FeatureMap mel_spectrogram(const Segment& seg, const FrameParams& p) {
  return cached_extractor(seg.sample_rate_hz, p).mel_spectrogram(seg.samples);
}

FeatureMap mfcc(const Segment& seg, const FrameParams& p) {
  return cached_extractor(seg.sample_rate_hz, p).mfcc(seg.samples);
}

FeatureMap gfcc(const Segment& seg, const FrameParams& p) {
  return cached_extractor(seg.sample_rate_hz, p).gfcc(seg.samples);
}

FeatureMap cqt(const Segment& seg, int hop_len) {
  FrameParams p = FrameParams::from_ms(seg.sample_rate_hz);
  p.hop_len = hop_len;
  return cached_extractor(seg.sample_rate_hz, p).cqt(seg.samples);
}

FeatureMap vqt(const Segment& seg, int hop_len) {
  FrameParams p = FrameParams::from_ms(seg.sample_rate_hz);
  p.hop_len = hop_len;
  return cached_extractor(seg.sample_rate_hz, p).vqt(seg.samples);
}

}  // namespace sonoscope
