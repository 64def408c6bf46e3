#include "sonoscope/fft.h"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

#include "sonoscope/errors.h"

namespace sonoscope {

struct RealFft::Plan {
  fftw_plan handle = nullptr;
  ~Plan() {
    if (handle != nullptr) fftw_destroy_plan(handle);
  }
};

namespace {

// FFTW's planner is not thread-safe; execution with the new-array interface is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

RealFft::RealFft(int n) : n_(n) {
  if (n < 1) throw RangeError("RealFft: size must be positive");
  static std::map<int, std::shared_ptr<const Plan>> cache;
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto it = cache.find(n);
  if (it == cache.end()) {
    std::vector<double> in(static_cast<std::size_t>(n));
    std::vector<std::complex<double>> out(static_cast<std::size_t>(n / 2 + 1));
    auto plan = std::make_shared<Plan>();
    plan->handle = fftw_plan_dft_r2c_1d(
        n, in.data(), reinterpret_cast<fftw_complex*>(out.data()),
        FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_PRESERVE_INPUT);
    if (plan->handle == nullptr) throw Error("RealFft: planning failed");
    it = cache.emplace(n, std::move(plan)).first;
  }
  plan_ = it->second;
}

void RealFft::forward(std::span<const double> in,
                      std::span<std::complex<double>> out) const {
  if (static_cast<int>(in.size()) != n_ || static_cast<int>(out.size()) != bins()) {
    throw SizeError("RealFft::forward: buffer size mismatch");
  }
  // FFTW_PRESERVE_INPUT guarantees `in` is not written.
  fftw_execute_dft_r2c(plan_->handle, const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace sonoscope
