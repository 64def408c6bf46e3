#ifndef SONOSCOPE_HLTDNN_H_
#define SONOSCOPE_HLTDNN_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sonoscope/histogram_layer.h"
#include "sonoscope/layers.h"
#include "sonoscope/random.h"
#include "sonoscope/tensor.h"

namespace sonoscope {

inline constexpr int kMaxInputChannels = 6;

struct ModelConfig {
  int in_channels = 1;
  int num_classes = 4;
  int bins = 16;
  std::array<int, 4> backbone = {16, 32, 64, 16};
  int branch_channels = 256;
  int hist_kernel = 2;
  int hist_stride = 2;
  double dropout = 0.5;
  std::uint64_t seed = 0;

  // Structural half (branch conv) plus statistical half (bins x channels).
  int penultimate_width() const { return branch_channels + bins * backbone[3]; }
  void validate() const;
};

// Serializable tensor; checkpoints are always float32.
struct NamedTensor {
  std::string name;
  nn::Tensor<float> value;
};

// Histogram-layer TDNN: four conv blocks (3x3 conv, ReLU, 2x2 max pool), then
// a structural branch (3x3 conv, ReLU, global average) in parallel with a
// statistical branch (histogram layer, global average). The two are
// concatenated, passed through dropout, and classified by a linear layer.
template <typename T>
class Hltdnn {
 public:
  struct Param {
    std::string name;
    nn::Tensor<T>* value;
    nn::Tensor<T>* grad;
    nn::Tensor<T>* accumulator;
  };

  explicit Hltdnn(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }

  // x: N x in_channels x H x W. Returns N x num_classes logits. Dropout is
  // active only when `training` is set, drawing from `rng`.
  nn::Tensor<T> forward(const nn::Tensor<T>& x, bool training = false, Rng* rng = nullptr);

  // Accumulates parameter gradients for the most recent forward pass.
  void backward(const nn::Tensor<T>& grad_logits);

  void zero_grad();

  // N x penultimate_width features of the most recent forward pass.
  const nn::Tensor<T>& penultimate() const { return features_; }

  std::vector<Param> parameters();
  std::size_t parameter_count() const;

  // Parameters followed by "acc."-prefixed Adagrad accumulators.
  std::vector<NamedTensor> state() const;
  void load_state(const std::vector<NamedTensor>& state);

 private:
  struct ConvBlock {
    nn::Tensor<T> weight, bias, grad_weight, grad_bias, acc_weight, acc_bias;
  };
  struct BlockCache {
    nn::Tensor<T> input;
    nn::Tensor<T> activation;  // ReLU output
    std::vector<std::uint32_t> argmax;
  };

  void init(Rng& rng);

  ModelConfig config_;
  std::array<ConvBlock, 4> blocks_;
  ConvBlock branch_;
  nn::HistogramLayerParams<T> hist_;
  nn::Tensor<T> grad_centers_, grad_widths_, acc_centers_, acc_widths_;
  nn::Tensor<T> fc_weight_, fc_bias_, grad_fc_weight_, grad_fc_bias_, acc_fc_weight_, acc_fc_bias_;

  std::array<BlockCache, 4> cache_;
  nn::Tensor<T> trunk_;         // backbone output
  nn::Tensor<T> branch_act_;    // branch ReLU output
  nn::Tensor<T> hist_out_;
  nn::Tensor<T> features_;      // concatenated penultimate features
  nn::Tensor<T> dropped_;
  std::vector<T> dropout_mask_;
  bool dropout_active_ = false;
};

using Model = Hltdnn<float>;

Model build_model(const ModelConfig& config);

// 512-wide penultimate feature vector of a single C x H x W input.
std::vector<float> penultimate(Model& model, const nn::Tensor<float>& input);

extern template class Hltdnn<float>;
extern template class Hltdnn<double>;

}  // namespace sonoscope

#endif  // SONOSCOPE_HLTDNN_H_
