#include "sonoscope/hltdnn.h"

#include <algorithm>
#include <cmath>

#include "sonoscope/errors.h"

namespace sonoscope {

using nn::Tensor;

void ModelConfig::validate() const {
  if (in_channels < 1 || in_channels > kMaxInputChannels) {
    throw ConfigError("in_channels must be in [1, " + std::to_string(kMaxInputChannels) + "]");
  }
  if (num_classes < 2) throw ConfigError("num_classes must be at least 2");
  if (bins < 1) throw ConfigError("bins must be positive");
  for (int c : backbone) {
    if (c < 1) throw ConfigError("backbone channel counts must be positive");
  }
  if (branch_channels < 1) throw ConfigError("branch_channels must be positive");
  if (hist_kernel < 1 || hist_stride < 1) throw ConfigError("histogram kernel/stride must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
}

namespace {

constexpr int kConvKernel = 3;
constexpr nn::Conv2dShape kSame{1, 1};

template <typename T>
void kaiming_uniform(Tensor<T>& w, Tensor<T>& b, int fan_in, Rng& rng) {
  const double wb = std::sqrt(6.0 / fan_in);
  const double bb = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (T& v : w.storage()) v = static_cast<T>(rng.uniform(-wb, wb));
  for (T& v : b.storage()) v = static_cast<T>(rng.uniform(-bb, bb));
}

// Concatenates two N x A and N x B (any trailing 1x1) tensors into N x (A+B).
template <typename T>
Tensor<T> concat_features(const Tensor<T>& a, const Tensor<T>& b) {
  const int n = a.dim(0);
  const int wa = static_cast<int>(a.size() / n), wb = static_cast<int>(b.size() / n);
  Tensor<T> out({n, wa + wb});
  for (int i = 0; i < n; ++i) {
    std::copy_n(a.data() + static_cast<std::size_t>(i) * wa, wa,
                out.data() + static_cast<std::size_t>(i) * (wa + wb));
    std::copy_n(b.data() + static_cast<std::size_t>(i) * wb, wb,
                out.data() + static_cast<std::size_t>(i) * (wa + wb) + wa);
  }
  return out;
}

}  // namespace

template <typename T>
Hltdnn<T>::Hltdnn(const ModelConfig& config) : config_(config) {
  config_.validate();
  Rng rng(config_.seed);
  init(rng);
}

template <typename T>
void Hltdnn<T>::init(Rng& rng) {
  int in = config_.in_channels;
  auto make_conv = [&](ConvBlock& blk, int cin, int cout) {
    const std::vector<int> wd = {cout, cin, kConvKernel, kConvKernel};
    blk.weight = Tensor<T>(wd);
    blk.bias = Tensor<T>({cout});
    kaiming_uniform(blk.weight, blk.bias, cin * kConvKernel * kConvKernel, rng);
    blk.grad_weight = Tensor<T>(wd);
    blk.grad_bias = Tensor<T>({cout});
    blk.acc_weight = Tensor<T>(wd);
    blk.acc_bias = Tensor<T>({cout});
  };
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    make_conv(blocks_[i], in, config_.backbone[i]);
    in = config_.backbone[i];
  }
  make_conv(branch_, in, config_.branch_channels);

  hist_ = nn::make_histogram_params<T>(config_.bins, in, config_.hist_kernel, config_.hist_kernel,
                                       config_.hist_stride);
  grad_centers_ = Tensor<T>(hist_.centers.dims());
  grad_widths_ = Tensor<T>(hist_.widths.dims());
  acc_centers_ = Tensor<T>(hist_.centers.dims());
  acc_widths_ = Tensor<T>(hist_.widths.dims());

  const int width = config_.penultimate_width();
  fc_weight_ = Tensor<T>({config_.num_classes, width});
  fc_bias_ = Tensor<T>({config_.num_classes});
  kaiming_uniform(fc_weight_, fc_bias_, width, rng);
  grad_fc_weight_ = Tensor<T>(fc_weight_.dims());
  grad_fc_bias_ = Tensor<T>(fc_bias_.dims());
  acc_fc_weight_ = Tensor<T>(fc_weight_.dims());
  acc_fc_bias_ = Tensor<T>(fc_bias_.dims());
}

template <typename T>
Tensor<T> Hltdnn<T>::forward(const Tensor<T>& x, bool training, Rng* rng) {
  if (x.rank() != 4 || x.dim(1) != config_.in_channels) {
    throw ShapeError("HLTDNN expects N x " + std::to_string(config_.in_channels) +
                     " x H x W input, got " + x.shape_string());
  }
  Tensor<T> a = x;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    BlockCache& c = cache_[i];
    c.input = std::move(a);
    c.activation = nn::relu_forward(nn::conv2d_forward(c.input, blocks_[i].weight, blocks_[i].bias, kSame));
    auto pooled = nn::maxpool2d_forward(c.activation, 2);
    c.argmax = std::move(pooled.argmax);
    a = std::move(pooled.output);
  }
  trunk_ = std::move(a);

  branch_act_ = nn::relu_forward(nn::conv2d_forward(trunk_, branch_.weight, branch_.bias, kSame));
  const Tensor<T> structural = nn::adaptive_avg_pool_forward(branch_act_, 1, 1);

  // Small inputs shrink the window to the available extent.
  hist_.kernel_h = std::min(config_.hist_kernel, trunk_.dim(2));
  hist_.kernel_w = std::min(config_.hist_kernel, trunk_.dim(3));
  hist_out_ = nn::histogram_forward(trunk_, hist_);
  const Tensor<T> statistical = nn::adaptive_avg_pool_forward(hist_out_, 1, 1);

  features_ = concat_features(structural, statistical);

  dropout_active_ = training && config_.dropout > 0.0;
  if (dropout_active_) {
    if (rng == nullptr) throw ConfigError("training forward pass needs an RNG for dropout");
    dropped_ = nn::dropout_forward(features_, config_.dropout, *rng, dropout_mask_);
    return nn::linear_forward(dropped_, fc_weight_, fc_bias_);
  }
  return nn::linear_forward(features_, fc_weight_, fc_bias_);
}

template <typename T>
void Hltdnn<T>::backward(const Tensor<T>& grad_logits) {
  if (features_.empty()) throw ShapeError("backward called before forward");
  const Tensor<T>& fc_in = dropout_active_ ? dropped_ : features_;
  Tensor<T> g_fc_in;
  nn::linear_backward(fc_in, fc_weight_, grad_logits, &g_fc_in, grad_fc_weight_, grad_fc_bias_);
  const Tensor<T> g_features = dropout_active_ ? nn::dropout_backward(g_fc_in, dropout_mask_) : g_fc_in;

  const int n = g_features.dim(0);
  const int ws = config_.branch_channels;
  const int wh = g_features.dim(1) - ws;
  Tensor<T> g_struct({n, ws, 1, 1});
  Tensor<T> g_stat({n, wh, 1, 1});
  for (int i = 0; i < n; ++i) {
    const T* row = g_features.data() + static_cast<std::size_t>(i) * (ws + wh);
    std::copy_n(row, ws, g_struct.data() + static_cast<std::size_t>(i) * ws);
    std::copy_n(row + ws, wh, g_stat.data() + static_cast<std::size_t>(i) * wh);
  }

  // Statistical branch.
  const Tensor<T> g_hist = nn::adaptive_avg_pool_backward(hist_out_.dims(), g_stat);
  Tensor<T> g_trunk_hist;
  nn::histogram_backward(trunk_, hist_, g_hist, &g_trunk_hist, grad_centers_, grad_widths_);

  // Structural branch.
  const Tensor<T> g_branch_act = nn::adaptive_avg_pool_backward(branch_act_.dims(), g_struct);
  const Tensor<T> g_branch_pre = nn::relu_backward(branch_act_, g_branch_act);
  Tensor<T> g_trunk;
  nn::conv2d_backward(trunk_, branch_.weight, g_branch_pre, kSame, &g_trunk, branch_.grad_weight,
                      branch_.grad_bias);
  for (std::size_t i = 0; i < g_trunk.size(); ++i) g_trunk[i] += g_trunk_hist[i];

  Tensor<T> g = std::move(g_trunk);
  for (int i = static_cast<int>(blocks_.size()) - 1; i >= 0; --i) {
    BlockCache& c = cache_[static_cast<std::size_t>(i)];
    const Tensor<T> g_act = nn::maxpool2d_backward(c.activation.dims(), c.argmax, g);
    const Tensor<T> g_pre = nn::relu_backward(c.activation, g_act);
    Tensor<T> g_in;
    nn::conv2d_backward(c.input, blocks_[static_cast<std::size_t>(i)].weight, g_pre, kSame,
                        i > 0 ? &g_in : nullptr, blocks_[static_cast<std::size_t>(i)].grad_weight,
                        blocks_[static_cast<std::size_t>(i)].grad_bias);
    g = std::move(g_in);
  }
}

template <typename T>
void Hltdnn<T>::zero_grad() {
  for (Param& p : parameters()) p.grad->fill(T(0));
}

template <typename T>
std::vector<typename Hltdnn<T>::Param> Hltdnn<T>::parameters() {
  std::vector<Param> out;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const std::string prefix = "conv" + std::to_string(i + 1);
    ConvBlock& b = blocks_[i];
    out.push_back({prefix + ".weight", &b.weight, &b.grad_weight, &b.acc_weight});
    out.push_back({prefix + ".bias", &b.bias, &b.grad_bias, &b.acc_bias});
  }
  out.push_back({"branch.weight", &branch_.weight, &branch_.grad_weight, &branch_.acc_weight});
  out.push_back({"branch.bias", &branch_.bias, &branch_.grad_bias, &branch_.acc_bias});
  out.push_back({"hist.centers", &hist_.centers, &grad_centers_, &acc_centers_});
  out.push_back({"hist.widths", &hist_.widths, &grad_widths_, &acc_widths_});
  out.push_back({"fc.weight", &fc_weight_, &grad_fc_weight_, &acc_fc_weight_});
  out.push_back({"fc.bias", &fc_bias_, &grad_fc_bias_, &acc_fc_bias_});
  return out;
}

template <typename T>
std::size_t Hltdnn<T>::parameter_count() const {
  std::size_t n = 0;
  for (const Param& p : const_cast<Hltdnn*>(this)->parameters()) n += p.value->size();
  return n;
}

namespace {

template <typename T>
nn::Tensor<float> to_float(const nn::Tensor<T>& t) {
  nn::Tensor<float> out(t.dims());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = static_cast<float>(t[i]);
  return out;
}

}  // namespace

template <typename T>
std::vector<NamedTensor> Hltdnn<T>::state() const {
  auto params = const_cast<Hltdnn*>(this)->parameters();
  std::vector<NamedTensor> out;
  for (const Param& p : params) out.push_back({p.name, to_float(*p.value)});
  for (const Param& p : params) out.push_back({"acc." + p.name, to_float(*p.accumulator)});
  return out;
}

template <typename T>
void Hltdnn<T>::load_state(const std::vector<NamedTensor>& state) {
  auto find = [&](const std::string& name) -> const NamedTensor* {
    for (const NamedTensor& t : state) {
      if (t.name == name) return &t;
    }
    return nullptr;
  };
  for (Param& p : parameters()) {
    for (const auto& [name, dst] : {std::pair{p.name, p.value}, std::pair{"acc." + p.name, p.accumulator}}) {
      const NamedTensor* src = find(name);
      if (src == nullptr) throw ShapeError("checkpoint is missing tensor '" + name + "'");
      nn::expect_dims(src->value.dims(), dst->dims(), name.c_str());
      for (std::size_t i = 0; i < dst->size(); ++i) (*dst)[i] = static_cast<T>(src->value[i]);
    }
  }
}

Model build_model(const ModelConfig& config) { return Model(config); }

std::vector<float> penultimate(Model& model, const nn::Tensor<float>& input) {
  nn::Tensor<float> x = input;
  if (x.rank() == 3) x.reshape({1, input.dim(0), input.dim(1), input.dim(2)});
  if (x.rank() != 4 || x.dim(0) != 1) throw ShapeError("penultimate expects a single C x H x W input");
  model.forward(x, false);
  const auto& f = model.penultimate();
  return {f.data(), f.data() + f.size()};
}

template class Hltdnn<float>;
template class Hltdnn<double>;

}  // namespace sonoscope
