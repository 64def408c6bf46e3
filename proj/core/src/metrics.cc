#include "sonoscope/metrics.h"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <numeric>

#include "sonoscope/errors.h"

namespace sonoscope {

std::int64_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

std::int64_t ConfusionMatrix::row_sum(int truth) const {
  std::int64_t s = 0;
  for (int j = 0; j < classes; ++j) s += at(truth, j);
  return s;
}

std::int64_t ConfusionMatrix::col_sum(int predicted) const {
  std::int64_t s = 0;
  for (int i = 0; i < classes; ++i) s += at(i, predicted);
  return s;
}

std::vector<double> ConfusionMatrix::row_normalized() const {
  std::vector<double> out(counts.size(), 0.0);
  for (int i = 0; i < classes; ++i) {
    const std::int64_t r = row_sum(i);
    if (r == 0) continue;
    for (int j = 0; j < classes; ++j) {
      out[static_cast<std::size_t>(i) * classes + j] =
          static_cast<double>(at(i, j)) / static_cast<double>(r);
    }
  }
  return out;
}

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred, int classes) {
  if (classes < 1) throw LabelError("confusion: class count must be positive");
  if (y_true.size() != y_pred.size()) throw LabelError("confusion: length mismatch");
  ConfusionMatrix cm;
  cm.classes = classes;
  cm.counts.assign(static_cast<std::size_t>(classes) * classes, 0);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i], p = y_pred[i];
    if (t < 0 || t >= classes || p < 0 || p >= classes) {
      throw LabelError("confusion: label out of range at index " + std::to_string(i));
    }
    ++cm.counts[static_cast<std::size_t>(t) * classes + p];
  }
  return cm;
}

MetricsReport summary(const ConfusionMatrix& cm) {
  const std::int64_t total = cm.total();
  if (cm.classes < 1 || total <= 0) throw EmptyError("summary: empty confusion matrix");
  const int k = cm.classes;
  const double s = static_cast<double>(total);

  MetricsReport r;
  double trace = 0.0;
  double sum_pt = 0.0, sum_p2 = 0.0, sum_t2 = 0.0;
  for (int c = 0; c < k; ++c) {
    const double tp = static_cast<double>(cm.at(c, c));
    const double t = static_cast<double>(cm.row_sum(c));
    const double p = static_cast<double>(cm.col_sum(c));
    trace += tp;
    sum_pt += p * t;
    sum_p2 += p * p;
    sum_t2 += t * t;

    ClassMetrics m;
    m.support = cm.row_sum(c);
    m.precision = p > 0 ? tp / p : 0.0;
    m.recall = t > 0 ? tp / t : 0.0;
    m.f1 = m.precision + m.recall > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    r.per_class.push_back(m);

    const double w = t / s;
    r.precision += w * m.precision;
    r.recall += w * m.recall;
    r.f1 += w * m.f1;
  }
  r.accuracy = trace / s;

  const double cov_pp = s * s - sum_p2;
  const double cov_tt = s * s - sum_t2;
  r.mcc = cov_pp > 0 && cov_tt > 0 ? (trace * s - sum_pt) / std::sqrt(cov_pp * cov_tt) : 0.0;
  return r;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(ss / (n - 1.0));
  }
  return out;
}

AggregateReport aggregate(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw EmptyError("aggregate: no reports");
  AggregateReport a;
  a.runs = static_cast<int>(reports.size());
  auto field = [&](double MetricsReport::*member) {
    std::vector<double> v;
    for (const auto& r : reports) v.push_back(r.*member);
    return mean_std(v);
  };
  a.accuracy = field(&MetricsReport::accuracy);
  a.precision = field(&MetricsReport::precision);
  a.recall = field(&MetricsReport::recall);
  a.f1 = field(&MetricsReport::f1);
  a.mcc = field(&MetricsReport::mcc);
  return a;
}

double log_fdr(const std::vector<std::vector<float>>& features, std::span<const int> labels) {
  if (features.size() != labels.size()) throw LabelError("log_fdr: length mismatch");
  if (features.empty()) throw DegenerateError("log_fdr: no samples");
  const auto dim = static_cast<Eigen::Index>(features.front().size());
  if (dim == 0) throw DegenerateError("log_fdr: zero-width features");

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (static_cast<Eigen::Index>(features[i].size()) != dim) {
      throw LabelError("log_fdr: ragged feature vectors");
    }
    by_class[labels[i]].push_back(i);
  }
  if (by_class.size() < 2) throw DegenerateError("log_fdr: need at least two classes");
  for (const auto& [label, idx] : by_class) {
    if (idx.size() < 2) {
      throw DegenerateError("log_fdr: class " + std::to_string(label) + " has fewer than 2 samples");
    }
  }

  auto vec = [&](std::size_t i) {
    return Eigen::Map<const Eigen::VectorXf>(features[i].data(), dim).cast<double>();
  };
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  for (std::size_t i = 0; i < features.size(); ++i) mean += vec(i);
  mean /= static_cast<double>(features.size());

  Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd sb = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& [label, idx] : by_class) {
    Eigen::VectorXd mk = Eigen::VectorXd::Zero(dim);
    for (std::size_t i : idx) mk += vec(i);
    mk /= static_cast<double>(idx.size());
    const Eigen::VectorXd d = mk - mean;
    sb.noalias() += static_cast<double>(idx.size()) * d * d.transpose();
    Eigen::MatrixXd centered(dim, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) centered.col(static_cast<Eigen::Index>(j)) = vec(idx[j]) - mk;
    sw.noalias() += centered * centered.transpose();
  }

  double lambda = 1e-6 * sw.trace() / static_cast<double>(dim);
  if (!(lambda > 0.0)) lambda = 1e-12;
  sw.diagonal().array() += lambda;
  const Eigen::MatrixXd ratio = sw.ldlt().solve(sb);
  const double tr = std::max(0.0, ratio.trace());
  return std::log1p(tr);
}

}  // namespace sonoscope
