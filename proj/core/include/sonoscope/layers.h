#ifndef SONOSCOPE_LAYERS_H_
#define SONOSCOPE_LAYERS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "sonoscope/random.h"
#include "sonoscope/tensor.h"

// Stateless layer kernels with hand-derived gradients. Backward functions
// accumulate (+=) into parameter gradients and overwrite input gradients.
namespace sonoscope::nn {

struct Conv2dShape {
  int stride = 1;
  int padding = 0;
};

inline int conv_output_size(int in, int kernel, int stride, int padding) {
  return (in + 2 * padding - kernel) / stride + 1;
}

// x: N x Cin x H x W, weight: Cout x Cin x K x K, bias: Cout.
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias,
                         Conv2dShape shape);

// grad_x may be null when the input gradient is not needed.
template <typename T>
void conv2d_backward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& grad_out,
                     Conv2dShape shape, Tensor<T>* grad_x, Tensor<T>& grad_weight,
                     Tensor<T>& grad_bias);

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& x);

// Uses the forward output as the mask (y > 0 iff x > 0).
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& y, const Tensor<T>& grad_out);

// 2x2 (or k x k) max pooling with stride k and ceil-mode output size, so any
// spatial extent >= 1 is accepted; border windows are truncated.
template <typename T>
struct MaxPoolResult {
  Tensor<T> output;
  std::vector<std::uint32_t> argmax;  // flat input index per output element
};

inline int pool_output_size(int in, int kernel) { return (in + kernel - 1) / kernel; }

template <typename T>
MaxPoolResult<T> maxpool2d_forward(const Tensor<T>& x, int kernel = 2);

template <typename T>
Tensor<T> maxpool2d_backward(const std::vector<int>& input_dims,
                             const std::vector<std::uint32_t>& argmax,
                             const Tensor<T>& grad_out);

// Bin i along an axis of length `in` covers [floor(i*in/out), ceil((i+1)*in/out)).
template <typename T>
Tensor<T> adaptive_avg_pool_forward(const Tensor<T>& x, int out_h, int out_w);

template <typename T>
Tensor<T> adaptive_avg_pool_backward(const std::vector<int>& input_dims, const Tensor<T>& grad_out);

// x: N x In, weight: Out x In, bias: Out.
template <typename T>
Tensor<T> linear_forward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias);

template <typename T>
void linear_backward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& grad_out,
                     Tensor<T>* grad_x, Tensor<T>& grad_weight, Tensor<T>& grad_bias);

// Inverted dropout. `mask` receives the per-element scale (0 or 1/(1-p)).
template <typename T>
Tensor<T> dropout_forward(const Tensor<T>& x, double p, Rng& rng, std::vector<T>& mask);

template <typename T>
Tensor<T> dropout_backward(const Tensor<T>& grad_out, const std::vector<T>& mask);

template <typename T>
struct LossResult {
  double loss = 0.0;
  Tensor<T> grad;  // d loss / d logits
};

// Mean over the batch of -log softmax(logits)[label], log-sum-exp stabilized.
template <typename T>
LossResult<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const int> labels);

}  // namespace sonoscope::nn

#endif  // SONOSCOPE_LAYERS_H_
