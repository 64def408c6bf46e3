#include "sonoscope/adagrad.h"

#include <cmath>

#include "sonoscope/errors.h"

namespace sonoscope::nn {

template <typename T>
void adagrad_step(Tensor<T>& param, const Tensor<T>& grad, Tensor<T>& accumulator,
                  const AdagradOptions& opts) {
  expect_dims(grad.dims(), param.dims(), "adagrad grad");
  expect_dims(accumulator.dims(), param.dims(), "adagrad accumulator");
  const T lr = static_cast<T>(opts.lr);
  const T eps = static_cast<T>(opts.eps);
  T* p = param.data();
  T* acc = accumulator.data();
  const T* g = grad.data();
  for (std::size_t i = 0; i < param.size(); ++i) {
    acc[i] += g[i] * g[i];
    p[i] -= lr * g[i] / (std::sqrt(acc[i]) + eps);
  }
}

template void adagrad_step(Tensor<float>&, const Tensor<float>&, Tensor<float>&,
                           const AdagradOptions&);
template void adagrad_step(Tensor<double>&, const Tensor<double>&, Tensor<double>&,
                           const AdagradOptions&);

}  // namespace sonoscope::nn
