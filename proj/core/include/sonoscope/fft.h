#ifndef SONOSCOPE_FFT_H_
#define SONOSCOPE_FFT_H_

#include <complex>
#include <memory>
#include <span>

namespace sonoscope {

// One-sided real-to-complex DFT of any length, X[k] = sum_n x[n] e^{-2 pi i k n / N}.
// Plans are created once per length and shared; forward() is safe to call
// concurrently from several threads.
class RealFft {
 public:
  explicit RealFft(int n);

  int size() const { return n_; }
  int bins() const { return n_ / 2 + 1; }

  // `in` has size() samples, `out` has bins() entries.
  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;

 private:
  struct Plan;
  int n_;
  std::shared_ptr<const Plan> plan_;
};

}  // namespace sonoscope

#endif  // SONOSCOPE_FFT_H_
