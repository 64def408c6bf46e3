#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gradcheck.h"
#include "oracles.h"
#include "sonoscope/checkpoint.h"
#include "sonoscope/errors.h"
#include "sonoscope/hltdnn.h"
#include "sonoscope/trainer.h"
#include "test_util.h"

namespace sonoscope {
namespace {

// Four separable classes: class k adds a bright band at rows [4k, 4k + 4).
TensorDataset banded_dataset(int per_class, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  TensorDataset d;
  d.channels = 1;
  d.height = 16;
  d.width = 12;
  for (int i = 0; i < per_class * 4; ++i) {
    const int label = i % 4;
    for (int r = 0; r < d.height; ++r) {
      for (double v : oracle::random_vector(gen, static_cast<std::size_t>(d.width), -0.5, 0.5)) {
        d.data.push_back(static_cast<float>(v + (r / 4 == label ? 2.0 : 0.0)));
      }
    }
    d.labels.push_back(label);
  }
  return d;
}

TEST(Hltdnn, ShapesForFourChannelInput) {
  ModelConfig cfg;
  cfg.in_channels = 4;
  Model model(cfg);
  EXPECT_EQ(cfg.penultimate_width(), 512);
  std::mt19937_64 gen(1);
  nn::Tensor<float> x({2, 4, 64, 47});
  for (float& v : x.storage()) v = static_cast<float>(oracle::random_vector(gen, 1)[0]);
  const auto logits = model.forward(x);
  EXPECT_EQ(logits.dims(), (std::vector<int>{2, 4}));
  EXPECT_TRUE(logits.all_finite());
  ASSERT_EQ(model.penultimate().dims(), (std::vector<int>{2, 512}));
  // The statistical half holds averaged kernel responses. Each response is
  // positive in exact arithmetic; in float32 a response far from every bin
  // centre underflows to zero, so the attainable range is [0, 1].
  int positive = 0;
  for (int n = 0; n < 2; ++n) {
    for (int j = 256; j < 512; ++j) {
      const float v = model.penultimate()[static_cast<std::size_t>(n) * 512 + j];
      EXPECT_GE(v, 0.0f);
      EXPECT_LE(v, 1.0f);
      positive += v > 0.0f;
    }
  }
  EXPECT_GT(positive, 0);
}

TEST(Hltdnn, SameSeedSameWeights) {
  ModelConfig cfg;
  cfg.in_channels = 2;
  cfg.seed = 42;
  const Model a(cfg), b(cfg);
  const auto sa = a.state(), sb = b.state();
  ASSERT_EQ(sa.size(), sb.size());
  for (std::size_t i = 0; i < sa.size(); ++i) EXPECT_EQ(sa[i].value.storage(), sb[i].value.storage()) << sa[i].name;
  cfg.seed = 43;
  const Model c(cfg);
  EXPECT_NE(c.state()[0].value.storage(), sa[0].value.storage());
}

TEST(Hltdnn, RejectsBadConfigAndInput) {
  ModelConfig cfg;
  cfg.in_channels = 7;
  EXPECT_THROW(Model{cfg}, ConfigError);
  cfg.in_channels = 1;
  cfg.dropout = 1.0;
  EXPECT_THROW(Model{cfg}, ConfigError);
  cfg.dropout = 0.5;
  Model m(cfg);
  EXPECT_THROW(m.forward(nn::Tensor<float>({1, 2, 16, 16})), ShapeError);
  EXPECT_THROW(m.forward(nn::Tensor<float>({1, 1, 16, 16}), true, nullptr), ConfigError);
}

TEST(Hltdnn, PenultimateHelperMatchesBatch) {
  ModelConfig cfg;
  Model model(cfg);
  std::mt19937_64 gen(2);
  nn::Tensor<float> x({1, 1, 16, 43});
  for (float& v : x.storage()) v = static_cast<float>(oracle::random_vector(gen, 1)[0]);
  const auto f = penultimate(model, x);
  ASSERT_EQ(f.size(), 512u);
  model.forward(x);
  EXPECT_EQ(f, model.penultimate().storage());
}

TEST(Hltdnn, TinyModelGradientsMatchFiniteDifferences) {
  EXPECT_LT(gradcheck::tiny_model(5, 32), 1e-4);
}

TEST(EarlyStopping, PatienceTrace) {
  EarlyStopping es(15);
  EXPECT_TRUE(es.observe(1, 1.0));
  EXPECT_TRUE(es.observe(2, 0.9));
  int stopped_at = 0;
  for (int epoch = 3; epoch <= 40; ++epoch) {
    EXPECT_FALSE(es.observe(epoch, 0.9 + 0.01 * (epoch % 3)));
    if (es.should_stop()) {
      stopped_at = epoch;
      break;
    }
  }
  EXPECT_EQ(stopped_at, 17);
  EXPECT_EQ(es.best_epoch(), 2);
  EXPECT_DOUBLE_EQ(es.best_loss(), 0.9);
}

TEST(Trainer, LearnsSeparableClassesDeterministically) {
  const auto train_set = banded_dataset(12, 1);
  const auto val_set = banded_dataset(4, 2);
  TrainConfig tc;
  tc.lr = 0.01;
  tc.batch_size = 16;
  tc.max_epochs = 25;
  tc.patience = 10;
  tc.seed = 3;
  ModelConfig mc;
  mc.seed = 3;
  Model a(mc), b(mc);
  const auto ra = train(a, train_set, val_set, tc);
  const auto rb = train(b, train_set, val_set, tc);
  ASSERT_EQ(ra.history.size(), rb.history.size());
  for (std::size_t i = 0; i < ra.history.size(); ++i) {
    EXPECT_EQ(ra.history[i].train_loss, rb.history[i].train_loss);
    EXPECT_EQ(ra.history[i].val_loss, rb.history[i].val_loss);
  }
  EXPECT_LT(ra.best_val_loss, ra.history.front().val_loss);
  const auto pred = predict(a, val_set);
  int correct = 0;
  for (std::size_t i = 0; i < pred.labels.size(); ++i) correct += pred.labels[i] == pred.predicted[i];
  EXPECT_GE(correct, 14);
  // The returned weights are those of the best epoch.
  EXPECT_DOUBLE_EQ(evaluate_loss(a, val_set), ra.best_val_loss);
}

TEST(Trainer, ZeroLearningRateLeavesWeights) {
  const auto d = banded_dataset(4, 4);
  ModelConfig mc;
  Model model(mc);
  const auto before = model.state();
  TrainConfig tc;
  tc.lr = 0.0;
  tc.batch_size = 8;
  tc.max_epochs = 2;
  tc.patience = 1;
  train(model, d, d, tc);
  const auto after = model.state();
  for (std::size_t i = 0; i < before.size(); ++i) {
    if (before[i].name.rfind("acc.", 0) == 0) continue;
    EXPECT_EQ(before[i].value.storage(), after[i].value.storage()) << before[i].name;
  }
}

TEST(Trainer, NonFiniteLossRaisesDivergence) {
  const auto d = banded_dataset(4, 5);
  ModelConfig mc;
  Model model(mc);
  TrainConfig tc;
  tc.lr = 1e30;
  tc.batch_size = 4;
  tc.max_epochs = 3;
  tc.patience = 2;
  try {
    train(model, d, d, tc);
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.epoch(), 1);
  }
}

TEST(Trainer, ValidatesConfig) {
  TrainConfig tc;
  tc.patience = tc.max_epochs;
  EXPECT_THROW(tc.validate(), ConfigError);
  tc = TrainConfig{};
  tc.batch_size = 0;
  EXPECT_THROW(tc.validate(), ConfigError);
  tc = TrainConfig{};
  tc.lr = -1.0;
  EXPECT_THROW(tc.validate(), ConfigError);
}

TEST(Checkpoint, RoundTripRestoresPredictions) {
  testutil::TempDir dir;
  ModelConfig mc;
  mc.in_channels = 2;
  mc.seed = 9;
  Model a(mc);
  const auto path = dir.path() / "checkpoint.best";
  write_checkpoint(path, a.state());
  const auto bytes = testutil::read_file(path);
  ASSERT_GE(bytes.size(), 12u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "HLTC");
  EXPECT_EQ(bytes[4], kCheckpointVersion);

  mc.seed = 10;
  Model b(mc);
  b.load_state(read_checkpoint(path));
  nn::Tensor<float> x({1, 2, 16, 20}, 0.25f);
  EXPECT_EQ(a.forward(x).storage(), b.forward(x).storage());
}

TEST(Checkpoint, RejectsCorruptBytes) {
  ModelConfig mc;
  auto bytes = encode_checkpoint(Model(mc).state());
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bad), FormatError);
  bad = bytes;
  bad[4] = 99;
  EXPECT_THROW(decode_checkpoint(bad), UnsupportedError);
  bad = bytes;
  bad.pop_back();
  EXPECT_THROW(decode_checkpoint(bad), FormatError);
  bad = bytes;
  bad.push_back(0);
  EXPECT_THROW(decode_checkpoint(bad), FormatError);
  auto state = Model(mc).state();
  state.pop_back();
  Model m(mc);
  EXPECT_THROW(m.load_state(state), ShapeError);
}

}  // namespace
}  // namespace sonoscope
