#ifndef SONOSCOPE_TRAINER_H_
#define SONOSCOPE_TRAINER_H_

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "sonoscope/feature_stack.h"
#include "sonoscope/hltdnn.h"

namespace sonoscope {

// Equal-shape stacks packed contiguously as N x C x H x W.
struct TensorDataset {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::size_t sample_size() const {
    return static_cast<std::size_t>(channels) * height * width;
  }
  void add(const FeatureStack& s, int label);
  nn::Tensor<float> batch(std::span<const std::size_t> indices) const;
  nn::Tensor<float> sample(std::size_t i) const;
};

struct TrainConfig {
  double lr = 1e-3;
  int batch_size = 128;
  int max_epochs = 150;
  int patience = 15;
  double dropout = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
};

// Tracks the best validation loss. Improvement means strictly lower loss.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}

  // Returns true when `val_loss` is a new best.
  bool observe(int epoch, double val_loss);
  bool should_stop() const { return stale_ >= patience_; }
  int best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_; }

 private:
  int patience_;
  int stale_ = 0;
  int best_epoch_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
};

struct TrainResult {
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_val_loss = 0.0;
  int epochs_run = 0;
  bool early_stopped = false;
};

// Adagrad training with per-epoch seeded shuffling and early stopping on the
// validation loss. On return `model` holds the weights (and accumulators) of
// the best epoch. Throws DivergenceError when a loss becomes non-finite.
TrainResult train(Model& model, const TensorDataset& train_set, const TensorDataset& val_set,
                  const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

// Mean cross-entropy over a dataset, dropout inactive.
double evaluate_loss(Model& model, const TensorDataset& data, int batch_size = 128);

struct Predictions {
  std::vector<int> labels;
  std::vector<int> predicted;
  std::vector<std::vector<float>> penultimate;  // filled on request
};

Predictions predict(Model& model, const TensorDataset& data, int batch_size = 128,
                    bool keep_penultimate = false);

}  // namespace sonoscope

#endif  // SONOSCOPE_TRAINER_H_
