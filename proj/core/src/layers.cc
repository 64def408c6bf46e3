#include "sonoscope/layers.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "sonoscope/errors.h"

namespace sonoscope::nn {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;

void require_rank(const std::vector<int>& dims, std::size_t rank, const char* what) {
  if (dims.size() != rank) {
    throw ShapeError(std::string(what) + ": expected rank " + std::to_string(rank));
  }
}

struct ConvGeometry {
  int n, cin, h, w, cout, k, oh, ow, stride, pad;
  int col_rows() const { return cin * k * k; }
  int col_cols() const { return oh * ow; }
};

template <typename T>
ConvGeometry conv_geometry(const Tensor<T>& x, const Tensor<T>& weight, Conv2dShape s) {
  require_rank(x.dims(), 4, "conv2d input");
  require_rank(weight.dims(), 4, "conv2d weight");
  ConvGeometry g{};
  g.n = x.dim(0);
  g.cin = x.dim(1);
  g.h = x.dim(2);
  g.w = x.dim(3);
  g.cout = weight.dim(0);
  g.k = weight.dim(2);
  g.stride = s.stride;
  g.pad = s.padding;
  if (weight.dim(1) != g.cin || weight.dim(3) != g.k) {
    throw ShapeError("conv2d: weight " + weight.shape_string() + " does not match input " +
                     x.shape_string());
  }
  if (s.stride < 1 || s.padding < 0) throw ShapeError("conv2d: invalid stride/padding");
  if (g.h + 2 * g.pad < g.k || g.w + 2 * g.pad < g.k) {
    throw ShapeError("conv2d: input " + x.shape_string() + " smaller than kernel");
  }
  g.oh = conv_output_size(g.h, g.k, g.stride, g.pad);
  g.ow = conv_output_size(g.w, g.k, g.stride, g.pad);
  return g;
}

template <typename T>
void im2col(const T* x, const ConvGeometry& g, T* col) {
  const int cols = g.col_cols();
  for (int c = 0; c < g.cin; ++c) {
    const T* plane = x + static_cast<std::size_t>(c) * g.h * g.w;
    for (int ky = 0; ky < g.k; ++ky) {
      for (int kx = 0; kx < g.k; ++kx) {
        T* row = col + static_cast<std::size_t>((c * g.k + ky) * g.k + kx) * cols;
        for (int oy = 0; oy < g.oh; ++oy) {
          const int iy = oy * g.stride - g.pad + ky;
          T* out = row + oy * g.ow;
          if (iy < 0 || iy >= g.h) {
            std::fill(out, out + g.ow, T(0));
            continue;
          }
          const T* src = plane + static_cast<std::size_t>(iy) * g.w;
          for (int ox = 0; ox < g.ow; ++ox) {
            const int ix = ox * g.stride - g.pad + kx;
            out[ox] = (ix >= 0 && ix < g.w) ? src[ix] : T(0);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im(const T* col, const ConvGeometry& g, T* x) {
  const int cols = g.col_cols();
  for (int c = 0; c < g.cin; ++c) {
    T* plane = x + static_cast<std::size_t>(c) * g.h * g.w;
    for (int ky = 0; ky < g.k; ++ky) {
      for (int kx = 0; kx < g.k; ++kx) {
        const T* row = col + static_cast<std::size_t>((c * g.k + ky) * g.k + kx) * cols;
        for (int oy = 0; oy < g.oh; ++oy) {
          const int iy = oy * g.stride - g.pad + ky;
          if (iy < 0 || iy >= g.h) continue;
          T* dst = plane + static_cast<std::size_t>(iy) * g.w;
          const T* in = row + oy * g.ow;
          for (int ox = 0; ox < g.ow; ++ox) {
            const int ix = ox * g.stride - g.pad + kx;
            if (ix >= 0 && ix < g.w) dst[ix] += in[ox];
          }
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias,
                         Conv2dShape shape) {
  const ConvGeometry g = conv_geometry(x, weight, shape);
  expect_dims(bias.dims(), {g.cout}, "conv2d bias");
  Tensor<T> y({g.n, g.cout, g.oh, g.ow});
  std::vector<T> col(static_cast<std::size_t>(g.col_rows()) * g.col_cols());
  const ConstMapMat<T> wmat(weight.data(), g.cout, g.col_rows());
  const Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> b(bias.data(), g.cout);
  const std::size_t in_stride = static_cast<std::size_t>(g.cin) * g.h * g.w;
  const std::size_t out_stride = static_cast<std::size_t>(g.cout) * g.oh * g.ow;
  for (int n = 0; n < g.n; ++n) {
    im2col(x.data() + n * in_stride, g, col.data());
    const ConstMapMat<T> cmat(col.data(), g.col_rows(), g.col_cols());
    MapMat<T> out(y.data() + n * out_stride, g.cout, g.col_cols());
    out.noalias() = wmat * cmat;
    out.colwise() += b;
  }
  return y;
}

template <typename T>
void conv2d_backward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& grad_out,
                     Conv2dShape shape, Tensor<T>* grad_x, Tensor<T>& grad_weight,
                     Tensor<T>& grad_bias) {
  const ConvGeometry g = conv_geometry(x, weight, shape);
  expect_dims(grad_out.dims(), {g.n, g.cout, g.oh, g.ow}, "conv2d grad_out");
  expect_dims(grad_weight.dims(), weight.dims(), "conv2d grad_weight");
  expect_dims(grad_bias.dims(), {g.cout}, "conv2d grad_bias");
  if (grad_x != nullptr) *grad_x = Tensor<T>(x.dims());

  std::vector<T> col(static_cast<std::size_t>(g.col_rows()) * g.col_cols());
  std::vector<T> dcol(col.size());
  const ConstMapMat<T> wmat(weight.data(), g.cout, g.col_rows());
  MapMat<T> gw(grad_weight.data(), g.cout, g.col_rows());
  Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> gb(grad_bias.data(), g.cout);
  const std::size_t in_stride = static_cast<std::size_t>(g.cin) * g.h * g.w;
  const std::size_t out_stride = static_cast<std::size_t>(g.cout) * g.oh * g.ow;
  for (int n = 0; n < g.n; ++n) {
    im2col(x.data() + n * in_stride, g, col.data());
    const ConstMapMat<T> cmat(col.data(), g.col_rows(), g.col_cols());
    const ConstMapMat<T> dy(grad_out.data() + n * out_stride, g.cout, g.col_cols());
    gw.noalias() += dy * cmat.transpose();
    // A scalar loop keeps the summation order independent of row alignment.
    for (int o = 0; o < g.cout; ++o) {
      const T* row = dy.data() + static_cast<std::size_t>(o) * g.col_cols();
      T s = T(0);
      for (int j = 0; j < g.col_cols(); ++j) s += row[j];
      gb[o] += s;
    }
    if (grad_x != nullptr) {
      MapMat<T> dc(dcol.data(), g.col_rows(), g.col_cols());
      dc.noalias() = wmat.transpose() * dy;
      col2im(dcol.data(), g, grad_x->data() + n * in_stride);
    }
  }
}

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& x) {
  Tensor<T> y = x;
  for (T& v : y.storage()) v = v > T(0) ? v : T(0);
  return y;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& y, const Tensor<T>& grad_out) {
  expect_dims(grad_out.dims(), y.dims(), "relu grad_out");
  Tensor<T> gx(y.dims());
  for (std::size_t i = 0; i < y.size(); ++i) gx[i] = y[i] > T(0) ? grad_out[i] : T(0);
  return gx;
}

template <typename T>
MaxPoolResult<T> maxpool2d_forward(const Tensor<T>& x, int kernel) {
  require_rank(x.dims(), 4, "maxpool2d input");
  if (kernel < 1) throw ShapeError("maxpool2d: kernel must be positive");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int oh = pool_output_size(h, kernel), ow = pool_output_size(w, kernel);
  MaxPoolResult<T> r;
  r.output = Tensor<T>({n, c, oh, ow});
  r.argmax.resize(r.output.size());
  std::size_t o = 0;
  for (int b = 0; b < n; ++b) {
    for (int ch = 0; ch < c; ++ch) {
      const std::size_t plane = (static_cast<std::size_t>(b) * c + ch) * h * w;
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox, ++o) {
          const int y0 = oy * kernel, x0 = ox * kernel;
          const int y1 = std::min(h, y0 + kernel), x1 = std::min(w, x0 + kernel);
          std::size_t best_idx = plane + static_cast<std::size_t>(y0) * w + x0;
          T best = x[best_idx];
          for (int iy = y0; iy < y1; ++iy) {
            for (int ix = x0; ix < x1; ++ix) {
              const std::size_t idx = plane + static_cast<std::size_t>(iy) * w + ix;
              if (x[idx] > best) {
                best = x[idx];
                best_idx = idx;
              }
            }
          }
          r.output[o] = best;
          r.argmax[o] = static_cast<std::uint32_t>(best_idx);
        }
      }
    }
  }
  return r;
}

template <typename T>
Tensor<T> maxpool2d_backward(const std::vector<int>& input_dims,
                             const std::vector<std::uint32_t>& argmax,
                             const Tensor<T>& grad_out) {
  if (argmax.size() != grad_out.size()) throw ShapeError("maxpool2d_backward: size mismatch");
  Tensor<T> gx(input_dims);
  for (std::size_t i = 0; i < argmax.size(); ++i) gx[argmax[i]] += grad_out[i];
  return gx;
}

namespace {

inline int bin_start(int i, int in, int out) { return (i * in) / out; }
inline int bin_end(int i, int in, int out) { return ((i + 1) * in + out - 1) / out; }

}  // namespace

template <typename T>
Tensor<T> adaptive_avg_pool_forward(const Tensor<T>& x, int out_h, int out_w) {
  require_rank(x.dims(), 4, "adaptive_avg_pool input");
  if (out_h < 1 || out_w < 1) throw ShapeError("adaptive_avg_pool: bad output size");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  Tensor<T> y({n, c, out_h, out_w});
  for (int b = 0; b < n; ++b) {
    for (int ch = 0; ch < c; ++ch) {
      for (int i = 0; i < out_h; ++i) {
        const int y0 = bin_start(i, h, out_h), y1 = bin_end(i, h, out_h);
        for (int j = 0; j < out_w; ++j) {
          const int x0 = bin_start(j, w, out_w), x1 = bin_end(j, w, out_w);
          T acc = 0;
          for (int iy = y0; iy < y1; ++iy) {
            for (int ix = x0; ix < x1; ++ix) acc += x.at(b, ch, iy, ix);
          }
          y.at(b, ch, i, j) = acc / static_cast<T>((y1 - y0) * (x1 - x0));
        }
      }
    }
  }
  return y;
}

template <typename T>
Tensor<T> adaptive_avg_pool_backward(const std::vector<int>& input_dims, const Tensor<T>& grad_out) {
  require_rank(input_dims, 4, "adaptive_avg_pool input");
  const int n = input_dims[0], c = input_dims[1], h = input_dims[2], w = input_dims[3];
  const int out_h = grad_out.dim(2), out_w = grad_out.dim(3);
  expect_dims(grad_out.dims(), {n, c, out_h, out_w}, "adaptive_avg_pool grad_out");
  Tensor<T> gx(input_dims);
  for (int b = 0; b < n; ++b) {
    for (int ch = 0; ch < c; ++ch) {
      for (int i = 0; i < out_h; ++i) {
        const int y0 = bin_start(i, h, out_h), y1 = bin_end(i, h, out_h);
        for (int j = 0; j < out_w; ++j) {
          const int x0 = bin_start(j, w, out_w), x1 = bin_end(j, w, out_w);
          const T g = grad_out.at(b, ch, i, j) / static_cast<T>((y1 - y0) * (x1 - x0));
          for (int iy = y0; iy < y1; ++iy) {
            for (int ix = x0; ix < x1; ++ix) gx.at(b, ch, iy, ix) += g;
          }
        }
      }
    }
  }
  return gx;
}

template <typename T>
Tensor<T> linear_forward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
  require_rank(x.dims(), 2, "linear input");
  require_rank(weight.dims(), 2, "linear weight");
  const int n = x.dim(0), in = x.dim(1), out = weight.dim(0);
  if (weight.dim(1) != in) throw ShapeError("linear: weight does not match input width");
  expect_dims(bias.dims(), {out}, "linear bias");
  Tensor<T> y({n, out});
  MapMat<T> ym(y.data(), n, out);
  ym.noalias() = ConstMapMat<T>(x.data(), n, in) * ConstMapMat<T>(weight.data(), out, in).transpose();
  ym.rowwise() += Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(bias.data(), out);
  return y;
}

template <typename T>
void linear_backward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& grad_out,
                     Tensor<T>* grad_x, Tensor<T>& grad_weight, Tensor<T>& grad_bias) {
  const int n = x.dim(0), in = x.dim(1), out = weight.dim(0);
  expect_dims(grad_out.dims(), {n, out}, "linear grad_out");
  expect_dims(grad_weight.dims(), weight.dims(), "linear grad_weight");
  expect_dims(grad_bias.dims(), {out}, "linear grad_bias");
  const ConstMapMat<T> dy(grad_out.data(), n, out);
  MapMat<T>(grad_weight.data(), out, in).noalias() += dy.transpose() * ConstMapMat<T>(x.data(), n, in);
  Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(grad_bias.data(), out) += dy.colwise().sum();
  if (grad_x != nullptr) {
    *grad_x = Tensor<T>(x.dims());
    MapMat<T>(grad_x->data(), n, in).noalias() = dy * ConstMapMat<T>(weight.data(), out, in);
  }
}

template <typename T>
Tensor<T> dropout_forward(const Tensor<T>& x, double p, Rng& rng, std::vector<T>& mask) {
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout probability must be in [0, 1)");
  const T scale = static_cast<T>(1.0 / (1.0 - p));
  mask.resize(x.size());
  Tensor<T> y(x.dims());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mask[i] = rng.uniform() >= p ? scale : T(0);
    y[i] = x[i] * mask[i];
  }
  return y;
}

template <typename T>
Tensor<T> dropout_backward(const Tensor<T>& grad_out, const std::vector<T>& mask) {
  if (mask.size() != grad_out.size()) throw ShapeError("dropout_backward: mask size mismatch");
  Tensor<T> gx(grad_out.dims());
  for (std::size_t i = 0; i < mask.size(); ++i) gx[i] = grad_out[i] * mask[i];
  return gx;
}

template <typename T>
LossResult<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const int> labels) {
  require_rank(logits.dims(), 2, "softmax_cross_entropy logits");
  const int n = logits.dim(0), k = logits.dim(1);
  if (static_cast<int>(labels.size()) != n) throw ShapeError("softmax_cross_entropy: label count");
  LossResult<T> r;
  r.grad = Tensor<T>(logits.dims());
  double total = 0.0;
  std::vector<double> p(static_cast<std::size_t>(k));
  for (int i = 0; i < n; ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    if (label < 0 || label >= k) throw ShapeError("softmax_cross_entropy: label out of range");
    const T* row = logits.data() + static_cast<std::size_t>(i) * k;
    double mx = row[0];
    for (int j = 1; j < k; ++j) mx = std::max(mx, static_cast<double>(row[j]));
    double sum = 0.0;
    for (int j = 0; j < k; ++j) {
      p[static_cast<std::size_t>(j)] = std::exp(static_cast<double>(row[j]) - mx);
      sum += p[static_cast<std::size_t>(j)];
    }
    const double lse = mx + std::log(sum);
    total += lse - static_cast<double>(row[label]);
    for (int j = 0; j < k; ++j) {
      const double g = p[static_cast<std::size_t>(j)] / sum - (j == label ? 1.0 : 0.0);
      r.grad[static_cast<std::size_t>(i) * k + j] = static_cast<T>(g / n);
    }
  }
  r.loss = total / n;
  return r;
}

#define SONOSCOPE_INSTANTIATE_LAYERS(T)                                                        \
  template Tensor<T> conv2d_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,      \
                                    Conv2dShape);                                              \
  template void conv2d_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,          \
                                Conv2dShape, Tensor<T>*, Tensor<T>&, Tensor<T>&);              \
  template Tensor<T> relu_forward(const Tensor<T>&);                                           \
  template Tensor<T> relu_backward(const Tensor<T>&, const Tensor<T>&);                        \
  template MaxPoolResult<T> maxpool2d_forward(const Tensor<T>&, int);                          \
  template Tensor<T> maxpool2d_backward(const std::vector<int>&,                               \
                                        const std::vector<std::uint32_t>&, const Tensor<T>&);  \
  template Tensor<T> adaptive_avg_pool_forward(const Tensor<T>&, int, int);                    \
  template Tensor<T> adaptive_avg_pool_backward(const std::vector<int>&, const Tensor<T>&);    \
  template Tensor<T> linear_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);     \
  template void linear_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,          \
                                Tensor<T>*, Tensor<T>&, Tensor<T>&);                           \
  template Tensor<T> dropout_forward(const Tensor<T>&, double, Rng&, std::vector<T>&);         \
  template Tensor<T> dropout_backward(const Tensor<T>&, const std::vector<T>&);                \
  template LossResult<T> softmax_cross_entropy(const Tensor<T>&, std::span<const int>);

SONOSCOPE_INSTANTIATE_LAYERS(float)
SONOSCOPE_INSTANTIATE_LAYERS(double)

#undef SONOSCOPE_INSTANTIATE_LAYERS

}  // namespace sonoscope::nn
