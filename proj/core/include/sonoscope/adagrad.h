#ifndef SONOSCOPE_ADAGRAD_H_
#define SONOSCOPE_ADAGRAD_H_

#include "sonoscope/tensor.h"

namespace sonoscope::nn {

struct AdagradOptions {
  double lr = 1e-3;
  double eps = 1e-10;
};

// acc += grad^2; param -= lr * grad / (sqrt(acc) + eps).
template <typename T>
void adagrad_step(Tensor<T>& param, const Tensor<T>& grad, Tensor<T>& accumulator,
                  const AdagradOptions& opts);

}  // namespace sonoscope::nn

#endif  // SONOSCOPE_ADAGRAD_H_
