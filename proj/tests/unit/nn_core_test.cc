#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gradcheck.h"
#include "oracles.h"
#include "sonoscope/adagrad.h"
#include "sonoscope/errors.h"
#include "sonoscope/histogram_layer.h"
#include "sonoscope/layers.h"

namespace sonoscope::nn {
namespace {

using gradcheck::T64;
using gradcheck::random_tensor;

TEST(Conv2d, OnesKernelSumsNeighbourhood) {
  T64 x({1, 1, 3, 3}, 1.0);
  T64 w({1, 1, 3, 3}, 1.0);
  T64 b({1});
  const auto y = conv2d_forward(x, w, b, Conv2dShape{1, 0});
  ASSERT_EQ(y.dims(), (std::vector<int>{1, 1, 1, 1}));
  EXPECT_DOUBLE_EQ(y[0], 9.0);
  const auto same = conv2d_forward(x, w, b, Conv2dShape{1, 1});
  ASSERT_EQ(same.dims(), (std::vector<int>{1, 1, 3, 3}));
  EXPECT_DOUBLE_EQ(same.at(0, 0, 0, 0), 4.0);
  EXPECT_DOUBLE_EQ(same.at(0, 0, 0, 1), 6.0);
  EXPECT_DOUBLE_EQ(same.at(0, 0, 1, 1), 9.0);
}

TEST(Conv2d, CentreTapIsIdentity) {
  std::mt19937_64 gen(1);
  const T64 x = random_tensor(gen, {2, 1, 5, 4});
  T64 w({1, 1, 3, 3});
  w[4] = 1.0;
  const auto y = conv2d_forward(x, w, T64({1}), Conv2dShape{1, 1});
  EXPECT_EQ(y.storage(), x.storage());
}

TEST(Conv2d, MatchesSixLoopOracle) {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 30; ++trial) {
    const int cin = oracle::random_int(gen, 1, 4), cout = oracle::random_int(gen, 1, 4);
    const int k = oracle::random_int(gen, 1, 3), stride = oracle::random_int(gen, 1, 2);
    const int pad = oracle::random_int(gen, 0, 1);
    const int h = oracle::random_int(gen, k, 9), w = oracle::random_int(gen, k, 9);
    const T64 x = random_tensor(gen, {1, cin, h, w});
    const T64 wt = random_tensor(gen, {cout, cin, k, k});
    const T64 b = random_tensor(gen, {cout});
    const auto y = conv2d_forward(x, wt, b, Conv2dShape{stride, pad});
    int oh = 0, ow = 0;
    const auto ref = oracle::conv2d(x.storage(), cin, h, w, wt.storage(), b.storage(), cout, k, stride, pad, oh, ow);
    ASSERT_EQ(y.dims(), (std::vector<int>{1, cout, oh, ow}));
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(y[i], ref[i], 1e-12);
  }
}

TEST(Conv2d, RejectsMismatchedShapes) {
  EXPECT_THROW(conv2d_forward(T64({1, 2, 4, 4}), T64({1, 3, 3, 3}), T64({1}), Conv2dShape{}), ShapeError);
  EXPECT_THROW(conv2d_forward(T64({1, 1, 2, 2}), T64({1, 1, 3, 3}), T64({1}), Conv2dShape{}), ShapeError);
}

TEST(Histogram, CentreAndUnitOffsetValues) {
  auto p = make_histogram_params<double>(1, 1, 1, 1, 1);
  p.centers[0] = 0.5;
  p.widths[0] = 1.0;
  T64 x({1, 1, 1, 2});
  x[0] = 0.5;
  x[1] = 1.5;
  const auto y = histogram_forward(x, p);
  ASSERT_EQ(y.size(), 2u);
  EXPECT_DOUBLE_EQ(y[0], 1.0);
  EXPECT_NEAR(y[1], std::exp(-1.0), 1e-15);
}

TEST(Histogram, DefaultParameters) {
  const auto p = make_histogram_params<double>(16, 16, 2, 2, 2);
  EXPECT_DOUBLE_EQ(p.center(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(p.center(15, 3), 1.0);
  EXPECT_DOUBLE_EQ(p.width(7, 5), 8.0);
}

TEST(Histogram, MatchesLiteralLoopOracle) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 40; ++trial) {
    const int bins = oracle::random_int(gen, 1, 5), d = oracle::random_int(gen, 1, 4);
    const int kh = oracle::random_int(gen, 1, 3), kw = oracle::random_int(gen, 1, 3);
    const int stride = oracle::random_int(gen, 1, 3);
    const int m = oracle::random_int(gen, kh, 9), n = oracle::random_int(gen, kw, 9);
    auto p = make_histogram_params<double>(bins, d, kh, kw, stride);
    p.centers = random_tensor(gen, {bins, d});
    p.widths = random_tensor(gen, {bins, d}, 0.2, 4.0);
    const T64 x = random_tensor(gen, {1, d, m, n}, -2.0, 2.0);
    const auto y = histogram_forward(x, p);
    int rows = 0, cols = 0;
    const auto ref = oracle::histogram(x.storage(), d, m, n, p.centers.storage(), p.widths.storage(), bins, kh, kw,
                                       stride, rows, cols);
    ASSERT_EQ(y.dims(), (std::vector<int>{1, d * bins, rows, cols}));
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(y[i], ref[i], 1e-12);
  }
}

TEST(Histogram, OutputsLieInUnitInterval) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 20; ++trial) {
    auto p = make_histogram_params<double>(8, 4, 2, 2, 2);
    const T64 x = random_tensor(gen, {2, 4, 16, 16}, -2.0, 2.0);
    const auto y = histogram_forward(x, p);
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double v = y[i];
      EXPECT_GT(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Histogram, RejectsZeroWidth) {
  auto p = make_histogram_params<double>(2, 1, 1, 1, 1);
  p.widths[1] = 0.0;
  EXPECT_THROW(histogram_forward(T64({1, 1, 2, 2}), p), ConfigError);
  EXPECT_THROW(histogram_forward(T64({1, 2, 2, 2}), make_histogram_params<double>(2, 1, 1, 1, 1)), ShapeError);
}

TEST(Gradients, EveryKernelMatchesFiniteDifferences) {
  std::mt19937_64 gen(4);
  for (const auto& op : gradcheck::all_ops()) {
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) worst = std::max(worst, op.run(gen));
    EXPECT_LT(worst, 1e-5) << op.name;
  }
}

TEST(Gradients, TinyModelEndToEnd) { EXPECT_LT(gradcheck::tiny_model(11, 64), 1e-4); }

TEST(Relu, ForwardAndBackward) {
  T64 x({1, 4});
  x[0] = -1.0;
  x[1] = 0.0;
  x[2] = 2.0;
  x[3] = -0.5;
  const auto y = relu_forward(x);
  EXPECT_EQ(y.storage(), (std::vector<double>{0.0, 0.0, 2.0, 0.0}));
  const auto g = relu_backward(y, T64({1, 4}, 1.0));
  EXPECT_EQ(g.storage(), (std::vector<double>{0.0, 0.0, 1.0, 0.0}));
}

TEST(Softmax, LargeLogitsStayFinite) {
  T64 logits({1, 4});
  logits[0] = 1000.0;
  const std::vector<int> right = {0}, wrong = {1};
  const auto ok = softmax_cross_entropy(logits, right);
  EXPECT_NEAR(ok.loss, 0.0, 1e-12);
  EXPECT_TRUE(ok.grad.all_finite());
  const auto bad = softmax_cross_entropy(logits, wrong);
  EXPECT_NEAR(bad.loss, 1000.0, 1e-9);
  EXPECT_THROW(softmax_cross_entropy(logits, std::vector<int>{4}), ShapeError);
}

TEST(Softmax, UniformLogitsGiveLogK) {
  const std::vector<int> labels = {2, 0};
  EXPECT_NEAR(softmax_cross_entropy(T64({2, 4}), labels).loss, std::log(4.0), 1e-15);
}

TEST(Dropout, RejectsProbabilityOutsideRange) {
  Rng rng(1);
  std::vector<double> mask;
  EXPECT_THROW(dropout_forward(T64({1, 4}), 1.0, rng, mask), ConfigError);
  EXPECT_THROW(dropout_forward(T64({1, 4}), -0.1, rng, mask), ConfigError);
}

TEST(Dropout, InvertedScalingPreservesMean) {
  Rng rng(2);
  std::vector<double> mask;
  const auto y = dropout_forward(T64({1, 20000}, 1.0), 0.5, rng, mask);
  double sum = 0.0;
  int zeros = 0;
  for (double v : y.storage()) {
    EXPECT_TRUE(v == 0.0 || v == 2.0);
    zeros += v == 0.0;
    sum += v;
  }
  EXPECT_NEAR(sum / 20000.0, 1.0, 0.03);
  EXPECT_NEAR(zeros / 20000.0, 0.5, 0.015);
  const auto none = dropout_forward(T64({1, 8}, 3.0), 0.0, rng, mask);
  for (double v : none.storage()) EXPECT_EQ(v, 3.0);
}

TEST(MaxPool, CeilModeKeepsBorder) {
  T64 x({1, 1, 3, 3});
  for (int i = 0; i < 9; ++i) x[static_cast<std::size_t>(i)] = i;
  const auto r = maxpool2d_forward(x, 2);
  ASSERT_EQ(r.output.dims(), (std::vector<int>{1, 1, 2, 2}));
  EXPECT_EQ(r.output.storage(), (std::vector<double>{4.0, 5.0, 7.0, 8.0}));
  const auto one = maxpool2d_forward(T64({1, 1, 1, 1}, 5.0), 2);
  EXPECT_EQ(one.output.dims(), (std::vector<int>{1, 1, 1, 1}));
  EXPECT_EQ(pool_output_size(43, 2), 22);
}

TEST(AdaptiveAvgPool, GlobalAverage) {
  T64 x({1, 2, 2, 3});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
  const auto y = adaptive_avg_pool_forward(x, 1, 1);
  EXPECT_DOUBLE_EQ(y[0], 2.5);
  EXPECT_DOUBLE_EQ(y[1], 8.5);
}

TEST(Adagrad, WorkedExample) {
  T64 p({1}, 1.0), g({1}, 0.5), acc({1});
  const AdagradOptions opts{0.1, 1e-10};
  adagrad_step(p, g, acc, opts);
  EXPECT_NEAR(acc[0], 0.25, 1e-15);
  EXPECT_NEAR(p[0], 0.9, 1e-9);
  adagrad_step(p, g, acc, opts);
  EXPECT_NEAR(acc[0], 0.5, 1e-15);
  EXPECT_NEAR(p[0], 0.9 - 0.1 * 0.5 / std::sqrt(0.5), 1e-9);
}

TEST(Adagrad, ZeroGradientLeavesParameter) {
  T64 p({3}, 2.0), g({3}), acc({3});
  adagrad_step(p, g, acc, AdagradOptions{0.1, 1e-10});
  EXPECT_EQ(p.storage(), (std::vector<double>{2.0, 2.0, 2.0}));
}

}  // namespace
}  // namespace sonoscope::nn
