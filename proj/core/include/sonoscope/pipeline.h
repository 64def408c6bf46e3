#ifndef SONOSCOPE_PIPELINE_H_
#define SONOSCOPE_PIPELINE_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sonoscope/config.h"
#include "sonoscope/feature_stack.h"
#include "sonoscope/metrics.h"
#include "sonoscope/signal_io.h"
#include "sonoscope/tf_features.h"
#include "sonoscope/trainer.h"

namespace sonoscope {

// Replaces the cache directory with $SONOSCOPE_CACHE_DIR when it is set.
void apply_environment(RunConfig& config);

std::filesystem::path cache_file_path(const std::filesystem::path& cache_dir,
                                      const std::string& recording_id, int segment_index,
                                      FeatureKind kind);
std::filesystem::path run_dir(const RunConfig& config, CombinationId combo, std::uint64_t seed);

struct ExtractSummary {
  int recordings = 0;
  int segments = 0;
  int files_written = 0;
  int files_unchanged = 0;
  std::vector<std::string> failures;  // "<path>: <reason>"
};

// Resamples, segments and computes all six features of every manifest entry,
// writing one cache file per segment and kind plus <cache>/index.csv.
ExtractSummary run_extract(const RunConfig& config, std::ostream& log);

// Reads <cache>/index.csv: one RecordingInfo per successfully extracted recording.
std::vector<RecordingInfo> read_cache_index(const std::filesystem::path& cache_dir);

// Splits the indexed recordings, writes split.csv and normalization.csv.
SplitManifest run_split(const RunConfig& config, std::ostream& log);

void write_normalization_csv(const std::filesystem::path& path, const Standardizer& s);
Standardizer read_normalization_csv(const std::filesystem::path& path);

struct SegmentFeatures {
  std::string recording_id;
  int segment_index = 0;
  int class_label = 0;
  Partition partition = Partition::kTrain;
  std::array<FeatureMap, kNumFeatureKinds> maps;  // standardized, canonical order
};

// Every cached segment with its partition, held in memory for the sweep.
struct FeatureCorpus {
  std::vector<SegmentFeatures> segments;

  static FeatureCorpus load(const RunConfig& config);
  TensorDataset dataset(CombinationId combo, Partition partition) const;
};

struct RunMetrics {
  std::string combo;
  std::uint64_t seed = 0;
  std::string status;  // "complete" or "diverged"
  int diverged_epoch = 0;
  int best_epoch = 0;
  int epochs_run = 0;
  bool early_stopped = false;
  MetricsReport metrics;
  ConfusionMatrix confusion;
  std::optional<double> log_fdr;

  bool complete() const { return status == "complete"; }
  std::string to_json() const;
  static RunMetrics from_json(const std::string& text);
};

std::optional<RunMetrics> read_run_metrics(const std::filesystem::path& dir);

// Trains (or resumes from checkpoint.best) one combination and seed, evaluates
// on the test partition and writes the run directory.
RunMetrics run_training(const RunConfig& config, const FeatureCorpus& corpus, CombinationId combo,
                        std::uint64_t seed, std::ostream& log);

// Recomputes metrics.json from an existing checkpoint.
RunMetrics run_evaluation(const RunConfig& config, const FeatureCorpus& corpus, CombinationId combo,
                          std::uint64_t seed);

struct SweepSummary {
  int runs = 0;
  int trained = 0;
  int resumed = 0;
  std::vector<std::string> diverged;  // "<combo>/<seed>"
  std::vector<std::string> failed;
};

// Runs every configured (combo, seed) pair with `config.workers` threads.
SweepSummary run_sweep(const RunConfig& config, const FeatureCorpus& corpus, std::ostream& log);

struct ComboRow {
  CombinationId combo{1};
  std::vector<RunMetrics> runs;  // completed runs, ascending seed
  AggregateReport aggregate;
  std::uint64_t best_seed = 0;
};

struct ReportSummary {
  std::vector<ComboRow> rows;  // sorted by mean accuracy, descending
  std::vector<std::string> missing;  // "<combo>/<seed>"
};

// Collects metrics.json files into rows ordered by mean accuracy.
ReportSummary collect_report(const RunConfig& config);

// Plain-text table with mean ± σ columns.
std::string format_table(const std::vector<ComboRow>& rows);

// Writes table.csv, table.txt, report.json, fdr.csv, confusion/ and
// penultimate/ under the report directory. `corpus` may be null, in which
// case penultimate dumps are skipped.
ReportSummary run_report(const RunConfig& config, const FeatureCorpus* corpus, std::ostream& log);

}  // namespace sonoscope

#endif  // SONOSCOPE_PIPELINE_H_
