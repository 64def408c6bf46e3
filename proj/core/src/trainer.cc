#include "sonoscope/trainer.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sonoscope/adagrad.h"
#include "sonoscope/errors.h"
#include "sonoscope/layers.h"

namespace sonoscope {

void TensorDataset::add(const FeatureStack& s, int label) {
  if (labels.empty()) {
    channels = s.channels;
    height = s.height;
    width = s.width;
  } else if (s.channels != channels || s.height != height || s.width != width) {
    throw ShapeError("dataset stacks must share one shape");
  }
  data.insert(data.end(), s.values.begin(), s.values.end());
  labels.push_back(label);
}

nn::Tensor<float> TensorDataset::batch(std::span<const std::size_t> indices) const {
  nn::Tensor<float> t({static_cast<int>(indices.size()), channels, height, width});
  const std::size_t n = sample_size();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(indices[i] * n), n,
                t.data() + i * n);
  }
  return t;
}

nn::Tensor<float> TensorDataset::sample(std::size_t i) const {
  const std::size_t idx[] = {i};
  return batch(idx);
}

void TrainConfig::validate() const {
  if (!(lr >= 0.0)) throw ConfigError("lr must be non-negative");
  if (batch_size < 1) throw ConfigError("batch size must be positive");
  if (max_epochs < 1) throw ConfigError("max_epochs must be positive");
  if (patience < 1 || patience >= max_epochs) {
    throw ConfigError("patience must be positive and below max_epochs");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
}

bool EarlyStopping::observe(int epoch, double val_loss) {
  if (val_loss < best_) {
    best_ = val_loss;
    best_epoch_ = epoch;
    stale_ = 0;
    return true;
  }
  ++stale_;
  return false;
}

namespace {

std::vector<int> gather_labels(const TensorDataset& d, std::span<const std::size_t> idx) {
  std::vector<int> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = d.labels[idx[i]];
  return out;
}

}  // namespace

double evaluate_loss(Model& model, const TensorDataset& data, int batch_size) {
  if (data.size() == 0) throw EmptyInputError("evaluate_loss: empty dataset");
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  double total = 0.0;
  for (std::size_t start = 0; start < idx.size(); start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(idx.size(), start + static_cast<std::size_t>(batch_size));
    const std::span<const std::size_t> b(idx.data() + start, end - start);
    const auto logits = model.forward(data.batch(b), false);
    const auto labels = gather_labels(data, b);
    total += nn::softmax_cross_entropy(logits, labels).loss * static_cast<double>(b.size());
  }
  return total / static_cast<double>(data.size());
}

TrainResult train(Model& model, const TensorDataset& train_set, const TensorDataset& val_set,
                  const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  config.validate();
  if (train_set.size() == 0 || val_set.size() == 0) {
    throw EmptyInputError("train: training and validation sets must be nonempty");
  }
  if (train_set.channels != val_set.channels || train_set.height != val_set.height ||
      train_set.width != val_set.width) {
    throw ShapeError("train: training and validation stacks differ in shape");
  }

  Rng order_rng(derive_seed(config.seed, 1));
  Rng dropout_rng(derive_seed(config.seed, 2));
  const nn::AdagradOptions opts{config.lr, 1e-10};
  EarlyStopping stopper(config.patience);
  std::vector<NamedTensor> best_state = model.state();

  TrainResult result;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    order_rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const std::span<const std::size_t> b(order.data() + start, end - start);
      const auto labels = gather_labels(train_set, b);
      model.zero_grad();
      const auto logits = model.forward(train_set.batch(b), true, &dropout_rng);
      const auto loss = nn::softmax_cross_entropy(logits, labels);
      if (!std::isfinite(loss.loss)) {
        throw DivergenceError(epoch, "training loss became non-finite at epoch " + std::to_string(epoch));
      }
      model.backward(loss.grad);
      for (auto& p : model.parameters()) nn::adagrad_step(*p.value, *p.grad, *p.accumulator, opts);
      loss_sum += loss.loss * static_cast<double>(b.size());
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.val_loss = evaluate_loss(model, val_set, config.batch_size);
    if (!std::isfinite(rec.val_loss)) {
      throw DivergenceError(epoch, "validation loss became non-finite at epoch " + std::to_string(epoch));
    }
    result.history.push_back(rec);
    result.epochs_run = epoch;
    if (on_epoch) on_epoch(rec);

    if (stopper.observe(epoch, rec.val_loss)) best_state = model.state();
    if (stopper.should_stop()) {
      result.early_stopped = true;
      break;
    }
  }

  result.best_epoch = stopper.best_epoch();
  result.best_val_loss = stopper.best_loss();
  model.load_state(best_state);
  return result;
}

Predictions predict(Model& model, const TensorDataset& data, int batch_size, bool keep_penultimate) {
  Predictions out;
  out.labels = data.labels;
  out.predicted.reserve(data.size());
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t start = 0; start < idx.size(); start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(idx.size(), start + static_cast<std::size_t>(batch_size));
    const std::span<const std::size_t> b(idx.data() + start, end - start);
    const auto logits = model.forward(data.batch(b), false);
    const int k = logits.dim(1);
    for (std::size_t i = 0; i < b.size(); ++i) {
      const float* row = logits.data() + i * static_cast<std::size_t>(k);
      out.predicted.push_back(static_cast<int>(std::max_element(row, row + k) - row));
    }
    if (keep_penultimate) {
      const auto& f = model.penultimate();
      const int w = f.dim(1);
      for (std::size_t i = 0; i < b.size(); ++i) {
        out.penultimate.emplace_back(f.data() + i * static_cast<std::size_t>(w),
                                     f.data() + (i + 1) * static_cast<std::size_t>(w));
      }
    }
  }
  return out;
}

}  // namespace sonoscope
