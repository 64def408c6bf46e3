#ifndef SONOSCOPE_HISTOGRAM_LAYER_H_
#define SONOSCOPE_HISTOGRAM_LAYER_H_

#include "sonoscope/tensor.h"

namespace sonoscope::nn {

// Soft-binning histogram layer. For every input channel d and bin b, each
// element contributes exp(-width[b,d]^2 * (x - center[b,d])^2), and the
// contributions are averaged over a kernel_h x kernel_w sliding window.
// Output channel d * bins + b holds bin b of input channel d.
template <typename T>
struct HistogramLayerParams {
  int bins = 16;
  int channels = 16;
  int kernel_h = 2;
  int kernel_w = 2;
  int stride = 2;
  Tensor<T> centers;  // [bins x channels]
  Tensor<T> widths;   // [bins x channels], entries nonzero

  T center(int b, int d) const { return centers[static_cast<std::size_t>(b) * channels + d]; }
  T width(int b, int d) const { return widths[static_cast<std::size_t>(b) * channels + d]; }
};

// Centers evenly spaced over [-1, 1] for every channel, widths = bins / 2.
template <typename T>
HistogramLayerParams<T> make_histogram_params(int bins, int channels, int kernel_h, int kernel_w,
                                              int stride);

// x: N x D x M x W  ->  N x (D*B) x R x C.
template <typename T>
Tensor<T> histogram_forward(const Tensor<T>& x, const HistogramLayerParams<T>& p);

// grad_x may be null. Parameter gradients are accumulated.
template <typename T>
void histogram_backward(const Tensor<T>& x, const HistogramLayerParams<T>& p,
                        const Tensor<T>& grad_out, Tensor<T>* grad_x, Tensor<T>& grad_centers,
                        Tensor<T>& grad_widths);

}  // namespace sonoscope::nn

#endif  // SONOSCOPE_HISTOGRAM_LAYER_H_
