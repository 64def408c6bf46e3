#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "sonoscope/adagrad.h"
#include "sonoscope/histogram_layer.h"
#include "sonoscope/hltdnn.h"
#include "sonoscope/layers.h"
#include "sonoscope/random.h"
#include "sonoscope/tf_features.h"

namespace {

using sonoscope::nn::Tensor;

constexpr int kRate = 16000;
constexpr int kSegmentSamples = 48000;

std::vector<float> test_segment() {
  std::vector<float> s(kSegmentSamples);
  sonoscope::Rng rng(7);
  for (int i = 0; i < kSegmentSamples; ++i) {
    const double t = static_cast<double>(i) / kRate;
    s[i] = static_cast<float>(0.4 * std::sin(2.0 * M_PI * 440.0 * t) + 0.05 * rng.normal());
  }
  return s;
}

Tensor<float> random_tensor(std::vector<int> dims, std::uint64_t seed) {
  Tensor<float> t(std::move(dims));
  sonoscope::Rng rng(seed);
  for (auto& v : t.storage()) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return t;
}

void BM_Feature(benchmark::State& state) {
  const auto kind = sonoscope::kAllFeatureKinds[static_cast<std::size_t>(state.range(0))];
  const sonoscope::FeatureExtractor extractor(sonoscope::FeatureConfig::for_rate(kRate));
  const auto samples = test_segment();
  for (auto _ : state) benchmark::DoNotOptimize(extractor.compute(kind, samples));
  state.SetLabel(sonoscope::feature_name(kind));
}
BENCHMARK(BM_Feature)->DenseRange(0, sonoscope::kNumFeatureKinds - 1)->Unit(benchmark::kMillisecond);

void BM_HistogramForward(benchmark::State& state) {
  const auto p = sonoscope::nn::make_histogram_params<float>(16, 16, 2, 2, 2);
  const auto x = random_tensor({32, 16, 4, 3}, 1);
  for (auto _ : state) benchmark::DoNotOptimize(sonoscope::nn::histogram_forward(x, p));
}
BENCHMARK(BM_HistogramForward)->Unit(benchmark::kMicrosecond);

void BM_Conv2dForward(benchmark::State& state) {
  const auto x = random_tensor({32, 4, 64, 47}, 2);
  const auto w = random_tensor({16, 4, 3, 3}, 3);
  const auto b = random_tensor({16}, 4);
  for (auto _ : state) benchmark::DoNotOptimize(sonoscope::nn::conv2d_forward(x, w, b, {1, 1}));
}
BENCHMARK(BM_Conv2dForward)->Unit(benchmark::kMillisecond);

// One forward, backward and Adagrad update on a batch of N segments.
void BM_TrainStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int channels = static_cast<int>(state.range(1));
  sonoscope::ModelConfig cfg;
  cfg.in_channels = channels;
  cfg.seed = 5;
  sonoscope::Model model(cfg);
  const auto x = random_tensor({n, channels, 64, 47}, 6);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) labels[i] = i % cfg.num_classes;
  sonoscope::Rng rng(8);
  const sonoscope::nn::AdagradOptions opts;
  for (auto _ : state) {
    model.zero_grad();
    const auto logits = model.forward(x, true, &rng);
    model.backward(sonoscope::nn::softmax_cross_entropy(logits, labels).grad);
    for (auto& p : model.parameters()) sonoscope::nn::adagrad_step(*p.value, *p.grad, *p.accumulator, opts);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_TrainStep)->Args({32, 1})->Args({32, 4})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
