#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles.h"
#include "sonoscope/errors.h"
#include "sonoscope/metrics.h"

namespace sonoscope {
namespace {

struct Labelled {
  std::vector<int> truth, predicted;
};

Labelled random_labels(std::mt19937_64& gen, int classes, int n) {
  Labelled l;
  for (int i = 0; i < n; ++i) {
    l.truth.push_back(oracle::random_int(gen, 0, classes - 1));
    // Biased towards the diagonal so matrices are not uniformly random.
    l.predicted.push_back(oracle::random_int(gen, 0, 2) == 0 ? oracle::random_int(gen, 0, classes - 1)
                                                              : l.truth.back());
  }
  return l;
}

TEST(Confusion, CountsRowsAsTruth) {
  const std::vector<int> t = {0, 0, 1, 1}, p = {0, 1, 1, 1};
  const auto cm = confusion(t, p, 2);
  EXPECT_EQ(cm.at(0, 0), 1);
  EXPECT_EQ(cm.at(0, 1), 1);
  EXPECT_EQ(cm.at(1, 0), 0);
  EXPECT_EQ(cm.at(1, 1), 2);
  EXPECT_EQ(cm.total(), 4);
  const auto norm = cm.row_normalized();
  EXPECT_DOUBLE_EQ(norm[0], 0.5);
  EXPECT_DOUBLE_EQ(norm[3], 1.0);
  EXPECT_THROW(confusion(t, std::vector<int>{0, 1}, 2), Error);
  EXPECT_THROW(confusion(t, std::vector<int>{0, 1, 2, 1}, 2), Error);
}

TEST(Summary, TwoByTwoHandValues) {
  const std::vector<int> t = {0, 0, 1, 1}, p = {0, 1, 1, 1};
  const auto r = summary(confusion(t, p, 2));
  EXPECT_DOUBLE_EQ(r.accuracy, 0.75);
  EXPECT_NEAR(r.mcc, 4.0 / std::sqrt(48.0), 1e-12);
  EXPECT_NEAR(r.mcc, oracle::mcc_from_samples(t, p, 2), 1e-12);
  EXPECT_NEAR(r.per_class[0].precision, 1.0, 1e-12);
  EXPECT_NEAR(r.per_class[1].precision, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.per_class[0].recall, 0.5, 1e-12);
  EXPECT_NEAR(r.precision, 0.5 * 1.0 + 0.5 * 2.0 / 3.0, 1e-12);
}

TEST(Summary, DiagonalAndDegenerateMatrices) {
  const std::vector<int> t = {0, 1, 2, 3, 0, 1};
  EXPECT_DOUBLE_EQ(summary(confusion(t, t, 4)).mcc, 1.0);
  EXPECT_DOUBLE_EQ(summary(confusion(t, t, 4)).f1, 1.0);
  const std::vector<int> all_zero(t.size(), 0);
  const auto r = summary(confusion(t, all_zero, 4));
  EXPECT_DOUBLE_EQ(r.mcc, 0.0);
  EXPECT_TRUE(std::isfinite(r.precision));
  EXPECT_TRUE(std::isfinite(r.f1));
}

TEST(Summary, RandomMatricesMatchOraclesAndIdentities) {
  std::mt19937_64 gen(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const int classes = oracle::random_int(gen, 2, 6);
    const auto l = random_labels(gen, classes, oracle::random_int(gen, 1, 60));
    const auto r = summary(confusion(l.truth, l.predicted, classes));
    EXPECT_NEAR(r.recall, r.accuracy, 1e-12);
    EXPECT_GE(r.mcc, -1.0 - 1e-12);
    EXPECT_LE(r.mcc, 1.0 + 1e-12);
    EXPECT_NEAR(r.mcc, oracle::mcc_from_samples(l.truth, l.predicted, classes), 1e-9);
    for (double v : {r.accuracy, r.precision, r.recall, r.f1}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Summary, ClassRelabellingLeavesScalarsUnchanged) {
  std::mt19937_64 gen(2);
  std::vector<int> perm = {2, 0, 3, 1};
  for (int trial = 0; trial < 50; ++trial) {
    const auto l = random_labels(gen, 4, 40);
    Labelled m;
    for (std::size_t i = 0; i < l.truth.size(); ++i) {
      m.truth.push_back(perm[static_cast<std::size_t>(l.truth[i])]);
      m.predicted.push_back(perm[static_cast<std::size_t>(l.predicted[i])]);
    }
    const auto a = summary(confusion(l.truth, l.predicted, 4));
    const auto b = summary(confusion(m.truth, m.predicted, 4));
    EXPECT_NEAR(a.accuracy, b.accuracy, 1e-12);
    EXPECT_NEAR(a.precision, b.precision, 1e-12);
    EXPECT_NEAR(a.f1, b.f1, 1e-12);
    EXPECT_NEAR(a.mcc, b.mcc, 1e-12);
  }
}

TEST(Aggregate, SampleStandardDeviation) {
  const std::vector<double> v = {0.6, 0.7};
  const auto ms = mean_std(v);
  EXPECT_NEAR(ms.mean, 0.65, 1e-12);
  EXPECT_NEAR(ms.stddev, std::sqrt(0.005), 1e-12);
  EXPECT_NEAR(ms.stddev, 0.0707, 1e-4);
  EXPECT_DOUBLE_EQ(mean_std(std::vector<double>{0.42}).stddev, 0.0);
  MetricsReport a, b;
  a.accuracy = 0.6;
  b.accuracy = 0.7;
  const std::vector<MetricsReport> reports = {a, b};
  const auto agg = aggregate(reports);
  EXPECT_EQ(agg.runs, 2);
  EXPECT_NEAR(agg.accuracy.mean, 0.65, 1e-12);
  EXPECT_NEAR(agg.accuracy.stddev, std::sqrt(0.005), 1e-12);
}

std::vector<std::vector<float>> gaussian_clusters(std::mt19937_64& gen, double separation, int per_class,
                                                  std::vector<int>& labels) {
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<std::vector<float>> f;
  labels.clear();
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < per_class; ++i) {
      std::vector<float> v(5);
      for (std::size_t j = 0; j < v.size(); ++j) {
        v[j] = static_cast<float>(noise(gen) + (j == static_cast<std::size_t>(k) ? separation : 0.0));
      }
      f.push_back(v);
      labels.push_back(k);
    }
  }
  return f;
}

TEST(LogFdr, GrowsWithSeparation) {
  double previous = -1.0;
  for (double sep : {0.0, 1.0, 2.0, 4.0, 8.0}) {
    std::mt19937_64 gen(3);
    std::vector<int> labels;
    const auto f = gaussian_clusters(gen, sep, 200, labels);
    const double v = log_fdr(f, labels);
    EXPECT_GT(v, previous) << sep;
    previous = v;
  }
}

TEST(LogFdr, NearZeroForIdenticalClasses) {
  std::mt19937_64 gen(4);
  std::vector<int> labels;
  const auto f = gaussian_clusters(gen, 0.0, 2000, labels);
  EXPECT_LT(log_fdr(f, labels), 0.02);
}

TEST(LogFdr, InvariantToAffineRescaling) {
  std::mt19937_64 gen(5);
  std::vector<int> labels;
  auto f = gaussian_clusters(gen, 2.0, 100, labels);
  const double base = log_fdr(f, labels);
  for (auto& v : f) {
    for (float& x : v) x = 3.0f * x + 7.0f;
  }
  EXPECT_NEAR(log_fdr(f, labels), base, 1e-6);
}

TEST(LogFdr, RejectsDegenerateInput) {
  const std::vector<std::vector<float>> one = {{1.0f, 2.0f}};
  EXPECT_THROW(log_fdr(one, std::vector<int>{0}), Error);
  const std::vector<std::vector<float>> same_class = {{1.0f}, {2.0f}};
  EXPECT_THROW(log_fdr(same_class, std::vector<int>{0, 0}), Error);
}

}  // namespace
}  // namespace sonoscope
