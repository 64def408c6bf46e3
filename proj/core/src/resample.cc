#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "sonoscope/errors.h"
#include "sonoscope/signal_io.h"

namespace sonoscope {
namespace {

constexpr int kTapsPerPhase = 32;
constexpr double kKaiserBeta = 8.6;
constexpr int kMaxTabulatedPhases = 4096;

// Zeroth-order modified Bessel function of the first kind (power series).
double bessel_i0(double x) {
  double sum = 1.0;
  double term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 64; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

class PolyphaseKernel {
 public:
  PolyphaseKernel(std::int64_t up, std::int64_t down)
      : up_(up),
        cutoff_(std::min(1.0, static_cast<double>(up) / down)),
        inv_i0_beta_(1.0 / bessel_i0(kKaiserBeta)) {
    if (up_ <= kMaxTabulatedPhases) {
      table_.resize(static_cast<std::size_t>(up_) * kTapsPerPhase);
      for (std::int64_t p = 0; p < up_; ++p) {
        compute_phase(p, std::span<double>(table_.data() + p * kTapsPerPhase,
                                           kTapsPerPhase));
      }
    }
  }

  // Taps for input offsets k = -(N/2 - 1) .. N/2 relative to floor(t).
  std::span<const double> phase(std::int64_t p, std::vector<double>& scratch) const {
    if (!table_.empty()) {
      return {table_.data() + p * kTapsPerPhase, kTapsPerPhase};
    }
    scratch.resize(kTapsPerPhase);
    compute_phase(p, scratch);
    return scratch;
  }

 private:
  void compute_phase(std::int64_t p, std::span<double> taps) const {
    constexpr double half = kTapsPerPhase / 2.0;
    const double frac = static_cast<double>(p) / static_cast<double>(up_);
    double sum = 0.0;
    for (int i = 0; i < kTapsPerPhase; ++i) {
      const int k = i - (kTapsPerPhase / 2 - 1);
      const double tau = frac - k;
      const double r = tau / half;
      double w = 0.0;
      if (std::abs(r) < 1.0) {
        w = bessel_i0(kKaiserBeta * std::sqrt(1.0 - r * r)) * inv_i0_beta_;
      }
      const double arg = std::numbers::pi * cutoff_ * tau;
      const double sinc = std::abs(arg) < 1e-12 ? 1.0 : std::sin(arg) / arg;
      taps[i] = cutoff_ * sinc * w;
      sum += taps[i];
    }
    // Unity DC gain for every phase.
    for (double& t : taps) t /= sum;
  }

  std::int64_t up_;
  double cutoff_;
  double inv_i0_beta_;
  std::vector<double> table_;
};

}  // namespace

AudioBuffer resample(const AudioBuffer& buf, int target_hz) {
  if (buf.samples.empty()) throw EmptyInputError("resample: empty buffer");
  if (target_hz < 8000) {
    throw RangeError("resample: target rate must be at least 8000 Hz");
  }
  if (buf.sample_rate_hz <= 0) throw RangeError("resample: invalid source rate");

  AudioBuffer out;
  out.recording_id = buf.recording_id;
  out.class_label = buf.class_label;
  out.sample_rate_hz = target_hz;
  if (buf.sample_rate_hz == target_hz) {
    out.samples = buf.samples;
    return out;
  }

  const std::int64_t g = std::gcd<std::int64_t>(target_hz, buf.sample_rate_hz);
  const std::int64_t up = target_hz / g;
  const std::int64_t down = buf.sample_rate_hz / g;
  const PolyphaseKernel kernel(up, down);

  const auto n_in = static_cast<std::int64_t>(buf.samples.size());
  const std::int64_t n_out = (n_in * up + down - 1) / down;
  out.samples.resize(static_cast<std::size_t>(n_out));

  std::vector<double> scratch;
  for (std::int64_t m = 0; m < n_out; ++m) {
    const std::int64_t num = m * down;
    const std::int64_t base = num / up;
    const std::int64_t p = num % up;
    const auto taps = kernel.phase(p, scratch);
    double acc = 0.0;
    for (int i = 0; i < kTapsPerPhase; ++i) {
      const std::int64_t j = base + i - (kTapsPerPhase / 2 - 1);
      if (j < 0 || j >= n_in) continue;
      acc += taps[i] * buf.samples[static_cast<std::size_t>(j)];
    }
    out.samples[static_cast<std::size_t>(m)] =
        static_cast<float>(std::clamp(acc, -1.0, 1.0));
  }
  return out;
}

}  // namespace sonoscope
