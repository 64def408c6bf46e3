#include "sonoscope/histogram_layer.h"

#include <cmath>

#include "sonoscope/errors.h"

namespace sonoscope::nn {
namespace {

struct HistGeometry {
  int n, d, m, w, r, c;
};

template <typename T>
HistGeometry check(const Tensor<T>& x, const HistogramLayerParams<T>& p) {
  if (x.rank() != 4) throw ShapeError("histogram layer: input must be N x D x M x W");
  HistGeometry g{x.dim(0), x.dim(1), x.dim(2), x.dim(3), 0, 0};
  if (g.d != p.channels) {
    throw ShapeError("histogram layer: input has " + std::to_string(g.d) + " channels, expected " +
                     std::to_string(p.channels));
  }
  if (p.kernel_h < 1 || p.kernel_w < 1 || p.stride < 1 || p.bins < 1) {
    throw ShapeError("histogram layer: invalid kernel/stride/bins");
  }
  if (g.m < p.kernel_h || g.w < p.kernel_w) {
    throw ShapeError("histogram layer: input " + x.shape_string() + " smaller than kernel");
  }
  expect_dims(p.centers.dims(), {p.bins, p.channels}, "histogram centers");
  expect_dims(p.widths.dims(), {p.bins, p.channels}, "histogram widths");
  for (T v : p.widths.storage()) {
    if (v == T(0)) throw ConfigError("histogram layer: bin widths must be nonzero");
  }
  g.r = (g.m - p.kernel_h) / p.stride + 1;
  g.c = (g.w - p.kernel_w) / p.stride + 1;
  return g;
}

}  // namespace

template <typename T>
HistogramLayerParams<T> make_histogram_params(int bins, int channels, int kernel_h, int kernel_w,
                                              int stride) {
  HistogramLayerParams<T> p;
  p.bins = bins;
  p.channels = channels;
  p.kernel_h = kernel_h;
  p.kernel_w = kernel_w;
  p.stride = stride;
  p.centers = Tensor<T>({bins, channels});
  p.widths = Tensor<T>({bins, channels}, static_cast<T>(bins) / T(2));
  for (int b = 0; b < bins; ++b) {
    const T mu = bins == 1 ? T(0) : static_cast<T>(-1.0 + 2.0 * b / (bins - 1));
    for (int d = 0; d < channels; ++d) p.centers[static_cast<std::size_t>(b) * channels + d] = mu;
  }
  return p;
}

template <typename T>
Tensor<T> histogram_forward(const Tensor<T>& x, const HistogramLayerParams<T>& p) {
  const HistGeometry g = check(x, p);
  const int B = p.bins;
  Tensor<T> y({g.n, g.d * B, g.r, g.c});
  const T inv_area = T(1) / static_cast<T>(p.kernel_h * p.kernel_w);
  for (int n = 0; n < g.n; ++n) {
    for (int d = 0; d < g.d; ++d) {
      for (int b = 0; b < B; ++b) {
        const T mu = p.center(b, d);
        const T gamma2 = p.width(b, d) * p.width(b, d);
        for (int r = 0; r < g.r; ++r) {
          for (int c = 0; c < g.c; ++c) {
            T acc = 0;
            for (int s = 0; s < p.kernel_h; ++s) {
              for (int t = 0; t < p.kernel_w; ++t) {
                const T diff = x.at(n, d, r * p.stride + s, c * p.stride + t) - mu;
                acc += std::exp(-gamma2 * diff * diff);
              }
            }
            y.at(n, d * B + b, r, c) = acc * inv_area;
          }
        }
      }
    }
  }
  return y;
}

template <typename T>
void histogram_backward(const Tensor<T>& x, const HistogramLayerParams<T>& p,
                        const Tensor<T>& grad_out, Tensor<T>* grad_x, Tensor<T>& grad_centers,
                        Tensor<T>& grad_widths) {
  const HistGeometry g = check(x, p);
  const int B = p.bins;
  expect_dims(grad_out.dims(), {g.n, g.d * B, g.r, g.c}, "histogram grad_out");
  expect_dims(grad_centers.dims(), p.centers.dims(), "histogram grad_centers");
  expect_dims(grad_widths.dims(), p.widths.dims(), "histogram grad_widths");
  if (grad_x != nullptr) *grad_x = Tensor<T>(x.dims());
  const T inv_area = T(1) / static_cast<T>(p.kernel_h * p.kernel_w);

  for (int n = 0; n < g.n; ++n) {
    for (int d = 0; d < g.d; ++d) {
      for (int b = 0; b < B; ++b) {
        const T mu = p.center(b, d);
        const T gamma = p.width(b, d);
        const T gamma2 = gamma * gamma;
        T g_mu = 0, g_gamma = 0;
        for (int r = 0; r < g.r; ++r) {
          for (int c = 0; c < g.c; ++c) {
            const T go = grad_out.at(n, d * B + b, r, c) * inv_area;
            if (go == T(0)) continue;
            for (int s = 0; s < p.kernel_h; ++s) {
              for (int t = 0; t < p.kernel_w; ++t) {
                const int iy = r * p.stride + s, ix = c * p.stride + t;
                const T diff = x.at(n, d, iy, ix) - mu;
                const T e = std::exp(-gamma2 * diff * diff);
                const T dx = T(-2) * gamma2 * diff * e * go;
                if (grad_x != nullptr) grad_x->at(n, d, iy, ix) += dx;
                g_mu -= dx;
                g_gamma += T(-2) * gamma * diff * diff * e * go;
              }
            }
          }
        }
        grad_centers[static_cast<std::size_t>(b) * p.channels + d] += g_mu;
        grad_widths[static_cast<std::size_t>(b) * p.channels + d] += g_gamma;
      }
    }
  }
}

#define SONOSCOPE_INSTANTIATE_HIST(T)                                                        \
  template HistogramLayerParams<T> make_histogram_params<T>(int, int, int, int, int);        \
  template Tensor<T> histogram_forward(const Tensor<T>&, const HistogramLayerParams<T>&);    \
  template void histogram_backward(const Tensor<T>&, const HistogramLayerParams<T>&,         \
                                   const Tensor<T>&, Tensor<T>*, Tensor<T>&, Tensor<T>&);

SONOSCOPE_INSTANTIATE_HIST(float)
SONOSCOPE_INSTANTIATE_HIST(double)

#undef SONOSCOPE_INSTANTIATE_HIST

}  // namespace sonoscope::nn
