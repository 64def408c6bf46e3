#ifndef SONOSCOPE_METRICS_H_
#define SONOSCOPE_METRICS_H_

#include <cstdint>
#include <span>
#include <vector>

namespace sonoscope {

// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  int classes = 0;
  std::vector<std::int64_t> counts;

  std::int64_t at(int truth, int predicted) const {
    return counts[static_cast<std::size_t>(truth) * classes + predicted];
  }
  std::int64_t total() const;
  std::int64_t row_sum(int truth) const;
  std::int64_t col_sum(int predicted) const;
  // Rows divided by their sums; all-zero rows stay zero.
  std::vector<double> row_normalized() const;
};

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred, int classes);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;
};

// Support-weighted averages; MCC is the multiclass (Gorodkin) form.
struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double mcc = 0.0;
  std::vector<ClassMetrics> per_class;
};

MetricsReport summary(const ConfusionMatrix& cm);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
};

struct AggregateReport {
  int runs = 0;
  MeanStd accuracy, precision, recall, f1, mcc;
};

// Sample mean and standard deviation (n - 1 denominator, 0 for one run).
MeanStd mean_std(std::span<const double> values);
AggregateReport aggregate(std::span<const MetricsReport> reports);

// log(1 + trace(S_W^+ S_B)) with the pseudo-inverse regularized by
// lambda = 1e-6 * trace(S_W) / dim.
double log_fdr(const std::vector<std::vector<float>>& features, std::span<const int> labels);

}  // namespace sonoscope

#endif  // SONOSCOPE_METRICS_H_
