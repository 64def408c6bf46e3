#include "sonoscope/pipeline.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "sonoscope/checkpoint.h"
#include "sonoscope/errors.h"
#include "sonoscope/feature_cache.h"
#include "sonoscope/hltdnn.h"

namespace sonoscope {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

bool write_text_if_changed(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (fs::exists(path, ec)) {
    if (read_text(path) == text) return false;
  }
  write_text(path, text);
  return true;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

int parse_int(const std::string& s, const std::string& what) {
  int v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw FormatError(what + ": expected an integer, got '" + s + "'");
  }
  return v;
}

double parse_double(const std::string& s, const std::string& what) {
  double v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw FormatError(what + ": expected a number, got '" + s + "'");
  }
  return v;
}

std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string shortest(float v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string run_key(CombinationId combo, std::uint64_t seed) {
  return combo.name() + "/" + std::to_string(seed);
}

// Runs fn(i) for i in [0, n) on up to `workers` threads.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn fn) {
  const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

ModelConfig model_config(const RunConfig& config, CombinationId combo, std::uint64_t seed) {
  ModelConfig m;
  m.in_channels = combo.size();
  m.num_classes = config.num_classes;
  m.bins = config.histogram_bins;
  m.dropout = config.train.dropout;
  m.seed = seed;
  return m;
}

struct HistorySummary {
  int epochs_run = 0;
  int best_epoch = 0;
  bool early_stopped = false;
};

std::string render_history(const std::vector<EpochRecord>& history) {
  std::string out = "epoch,train_loss,val_loss\n";
  for (const auto& r : history) {
    out += std::to_string(r.epoch) + "," + shortest(r.train_loss) + "," + shortest(r.val_loss) + "\n";
  }
  return out;
}

HistorySummary summarize_history(const fs::path& path, int max_epochs) {
  std::istringstream in(read_text(path));
  std::string line;
  std::getline(in, line);
  HistorySummary s;
  double best = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 3) throw FormatError(path.string() + ": malformed history row");
    const int epoch = parse_int(cells[0], "history epoch");
    const double val = parse_double(cells[2], "history val_loss");
    if (s.best_epoch == 0 || val < best) {
      best = val;
      s.best_epoch = epoch;
    }
    s.epochs_run = epoch;
  }
  s.early_stopped = s.epochs_run < max_epochs;
  return s;
}

RunMetrics evaluate_model(Model& model, const TensorDataset& test, const RunConfig& config,
                          CombinationId combo, std::uint64_t seed, const HistorySummary& hist) {
  const Predictions pred = predict(model, test, config.train.batch_size, true);
  RunMetrics m;
  m.combo = combo.name();
  m.seed = seed;
  m.status = "complete";
  m.best_epoch = hist.best_epoch;
  m.epochs_run = hist.epochs_run;
  m.early_stopped = hist.early_stopped;
  m.confusion = confusion(pred.labels, pred.predicted, config.num_classes);
  m.metrics = summary(m.confusion);
  try {
    m.log_fdr = log_fdr(pred.penultimate, pred.labels);
  } catch (const DegenerateError&) {
    m.log_fdr.reset();
  }
  return m;
}

Model load_run_model(const RunConfig& config, CombinationId combo, std::uint64_t seed) {
  Model model = build_model(model_config(config, combo, seed));
  model.load_state(read_checkpoint(run_dir(config, combo, seed) / "checkpoint.best"));
  return model;
}

json metric_json(const MeanStd& v) { return json{{"mean", v.mean}, {"std", v.stddev}}; }

// Display width in characters, counting each UTF-8 sequence once.
std::size_t display_width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

std::string pad_right(const std::string& s, std::size_t width) {
  const std::size_t w = display_width(s);
  return w >= width ? s : s + std::string(width - w, ' ');
}

std::string pm(const MeanStd& v, double scale) {
  return fixed(v.mean * scale, 2) + " ± " + fixed(v.stddev * scale, 2);
}

}  // namespace

void apply_environment(RunConfig& config) {
  if (const char* dir = std::getenv("SONOSCOPE_CACHE_DIR"); dir != nullptr && *dir != '\0') {
    config.cache_dir = dir;
  }
}

fs::path cache_file_path(const fs::path& cache_dir, const std::string& recording_id, int segment_index,
                         FeatureKind kind) {
  char name[64];
  std::snprintf(name, sizeof name, "%05d.%s.tffm", segment_index, feature_name(kind));
  return cache_dir / recording_id / name;
}

fs::path run_dir(const RunConfig& config, CombinationId combo, std::uint64_t seed) {
  return config.runs_dir() / combo.name() / std::to_string(seed);
}

ExtractSummary run_extract(const RunConfig& config, std::ostream& log) {
  const auto entries = read_corpus_manifest(config.manifest);
  const FeatureExtractor extractor(config.feature_config());

  struct Outcome {
    int segments = 0;
    int written = 0;
    int unchanged = 0;
    std::string error;
  };
  std::vector<Outcome> outcomes(entries.size());

  parallel_for(entries.size(), config.workers, [&](std::size_t i) {
    const CorpusEntry& e = entries[i];
    Outcome& out = outcomes[i];
    try {
      AudioBuffer buf = read_wav(e.path);
      buf.recording_id = e.recording_id;
      buf.class_label = e.class_label;
      if (buf.sample_rate_hz != config.sample_rate_hz) buf = resample(buf, config.sample_rate_hz);
      const auto segments = segment(buf, config.segment_seconds);
      if (segments.empty()) throw TooShortError("recording is shorter than one segment");
      for (const Segment& seg : segments) {
        for (FeatureKind kind : kAllFeatureKinds) {
          const FeatureMap fm = extractor.compute(kind, seg.samples);
          const auto path = cache_file_path(config.cache_dir, e.recording_id, seg.segment_index, kind);
          if (write_feature_map_if_changed(path, fm)) {
            ++out.written;
          } else {
            ++out.unchanged;
          }
        }
      }
      out.segments = static_cast<int>(segments.size());
    } catch (const std::exception& ex) {
      out.error = ex.what();
    }
  });

  ExtractSummary summary;
  std::vector<std::pair<std::string, const Outcome*>> ok;
  std::map<std::string, int> labels;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Outcome& o = outcomes[i];
    if (!o.error.empty()) {
      summary.failures.push_back(entries[i].path.string() + ": " + o.error);
      log << "error: " << entries[i].path.string() << ": " << o.error << "\n";
      continue;
    }
    ++summary.recordings;
    summary.segments += o.segments;
    summary.files_written += o.written;
    summary.files_unchanged += o.unchanged;
    ok.emplace_back(entries[i].recording_id, &o);
    labels[entries[i].recording_id] = entries[i].class_label;
  }
  std::sort(ok.begin(), ok.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  std::string index = "recording_id,class_label,segments\n";
  for (const auto& [id, o] : ok) {
    index += id + "," + std::to_string(labels[id]) + "," + std::to_string(o->segments) + "\n";
  }
  fs::create_directories(config.cache_dir);
  write_text_if_changed(config.cache_dir / "index.csv", index);

  log << "extract: " << summary.recordings << " recordings, " << summary.segments << " segments, "
      << summary.files_written << " files written, " << summary.files_unchanged << " unchanged, "
      << summary.failures.size() << " failed\n";
  return summary;
}

std::vector<RecordingInfo> read_cache_index(const fs::path& cache_dir) {
  const fs::path path = cache_dir / "index.csv";
  if (!fs::exists(path)) throw IoError(path.string() + " not found; run extract first");
  std::istringstream in(read_text(path));
  std::string line;
  std::getline(in, line);
  std::vector<RecordingInfo> out;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 3) throw FormatError(path.string() + ": malformed row '" + line + "'");
    out.push_back({cells[0], parse_int(cells[1], "class_label"), parse_int(cells[2], "segments")});
  }
  return out;
}

void write_normalization_csv(const fs::path& path, const Standardizer& s) {
  std::string text = "kind,mean,stddev,count\n";
  for (FeatureKind kind : kAllFeatureKinds) {
    const auto& st = s.stats(kind);
    text += std::string(feature_name(kind)) + "," + shortest(st.mean) + "," + shortest(st.stddev) + "," +
            std::to_string(st.count) + "\n";
  }
  write_text(path, text);
}

Standardizer read_normalization_csv(const fs::path& path) {
  if (!fs::exists(path)) throw IoError(path.string() + " not found; run split first");
  std::istringstream in(read_text(path));
  std::string line;
  std::getline(in, line);
  Standardizer s;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 4) throw FormatError(path.string() + ": malformed row '" + line + "'");
    Standardizer::Stats st;
    st.mean = parse_double(cells[1], "mean");
    st.stddev = parse_double(cells[2], "stddev");
    st.count = std::stoll(cells[3]);
    s.set(parse_feature_kind(cells[0]), st);
  }
  return s;
}

SplitManifest run_split(const RunConfig& config, std::ostream& log) {
  const auto recordings = read_cache_index(config.cache_dir);
  if (recordings.empty()) throw EmptyInputError("no extracted recordings to split");
  const SplitManifest manifest = split_dataset(recordings, config.split_ratios, config.split_seed);
  fs::create_directories(config.output_dir);
  write_split_csv(config.split_path(), manifest);

  Standardizer standardizer;
  for (const RecordingInfo& r : recordings) {
    if (manifest.partition_of(r.recording_id) != Partition::kTrain) continue;
    for (int s = 0; s < r.segment_count; ++s) {
      for (FeatureKind kind : kAllFeatureKinds) {
        standardizer.accumulate(read_feature_map(cache_file_path(config.cache_dir, r.recording_id, s, kind)));
      }
    }
  }
  standardizer.finish();
  write_normalization_csv(config.normalization_path(), standardizer);

  log << "split: " << manifest.segment_counts[0] << " train, " << manifest.segment_counts[1] << " val, "
      << manifest.segment_counts[2] << " test segments (ratios " << fixed(manifest.achieved_ratios[0], 3)
      << "/" << fixed(manifest.achieved_ratios[1], 3) << "/" << fixed(manifest.achieved_ratios[2], 3) << ")\n";
  return manifest;
}

FeatureCorpus FeatureCorpus::load(const RunConfig& config) {
  const auto recordings = read_cache_index(config.cache_dir);
  if (!fs::exists(config.split_path())) throw IoError(config.split_path().string() + " not found; run split first");
  const SplitManifest split = read_split_csv(config.split_path());
  const Standardizer standardizer = read_normalization_csv(config.normalization_path());

  FeatureCorpus corpus;
  for (const RecordingInfo& r : recordings) {
    const Partition p = split.partition_of(r.recording_id);
    for (int s = 0; s < r.segment_count; ++s) {
      SegmentFeatures seg;
      seg.recording_id = r.recording_id;
      seg.segment_index = s;
      seg.class_label = r.class_label;
      seg.partition = p;
      for (FeatureKind kind : kAllFeatureKinds) {
        FeatureMap fm = read_feature_map(cache_file_path(config.cache_dir, r.recording_id, s, kind));
        if (fm.kind != kind) throw FormatError("cache file holds the wrong feature kind");
        standardizer.apply(fm);
        seg.maps[static_cast<std::size_t>(kind)] = std::move(fm);
      }
      corpus.segments.push_back(std::move(seg));
    }
  }
  return corpus;
}

TensorDataset FeatureCorpus::dataset(CombinationId combo, Partition partition) const {
  TensorDataset ds;
  const auto kinds = combo.kinds();
  std::vector<FeatureMap> selected;
  for (const SegmentFeatures& seg : segments) {
    if (seg.partition != partition) continue;
    selected.clear();
    for (FeatureKind k : kinds) selected.push_back(seg.maps[static_cast<std::size_t>(k)]);
    ds.add(stack(selected, combo), seg.class_label);
  }
  return ds;
}

std::string RunMetrics::to_json() const {
  json j;
  j["combo"] = combo;
  j["seed"] = seed;
  j["status"] = status;
  if (status != "complete") {
    j["diverged_epoch"] = diverged_epoch;
    return j.dump(2) + "\n";
  }
  j["best_epoch"] = best_epoch;
  j["epochs_run"] = epochs_run;
  j["early_stopped"] = early_stopped;
  j["accuracy"] = metrics.accuracy;
  j["precision"] = metrics.precision;
  j["recall"] = metrics.recall;
  j["f1"] = metrics.f1;
  j["mcc"] = metrics.mcc;
  j["log_fdr"] = log_fdr ? json(*log_fdr) : json(nullptr);
  json rows = json::array();
  for (int t = 0; t < confusion.classes; ++t) {
    json row = json::array();
    for (int p = 0; p < confusion.classes; ++p) row.push_back(confusion.at(t, p));
    rows.push_back(row);
  }
  j["confusion"] = rows;
  json per_class = json::array();
  for (const auto& c : metrics.per_class) {
    per_class.push_back({{"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}, {"support", c.support}});
  }
  j["per_class"] = per_class;
  return j.dump(2) + "\n";
}

RunMetrics RunMetrics::from_json(const std::string& text) {
  RunMetrics m;
  try {
    const json j = json::parse(text);
    m.combo = j.at("combo").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.status = j.at("status").get<std::string>();
    if (!m.complete()) {
      m.diverged_epoch = j.value("diverged_epoch", 0);
      return m;
    }
    m.best_epoch = j.at("best_epoch").get<int>();
    m.epochs_run = j.at("epochs_run").get<int>();
    m.early_stopped = j.at("early_stopped").get<bool>();
    m.metrics.accuracy = j.at("accuracy").get<double>();
    m.metrics.precision = j.at("precision").get<double>();
    m.metrics.recall = j.at("recall").get<double>();
    m.metrics.f1 = j.at("f1").get<double>();
    m.metrics.mcc = j.at("mcc").get<double>();
    if (!j.at("log_fdr").is_null()) m.log_fdr = j.at("log_fdr").get<double>();
    const auto& rows = j.at("confusion");
    m.confusion.classes = static_cast<int>(rows.size());
    for (const auto& row : rows) {
      if (row.size() != rows.size()) throw FormatError("confusion matrix is not square");
      for (const auto& v : row) m.confusion.counts.push_back(v.get<std::int64_t>());
    }
    for (const auto& c : j.at("per_class")) {
      m.metrics.per_class.push_back({c.at("precision").get<double>(), c.at("recall").get<double>(),
                                     c.at("f1").get<double>(), c.at("support").get<std::int64_t>()});
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("metrics.json: ") + e.what());
  }
  return m;
}

std::optional<RunMetrics> read_run_metrics(const fs::path& dir) {
  const fs::path path = dir / "metrics.json";
  if (!fs::exists(path)) return std::nullopt;
  return RunMetrics::from_json(read_text(path));
}

RunMetrics run_evaluation(const RunConfig& config, const FeatureCorpus& corpus, CombinationId combo,
                          std::uint64_t seed) {
  const fs::path dir = run_dir(config, combo, seed);
  if (!fs::exists(dir / "checkpoint.best")) throw IoError("no checkpoint for run " + run_key(combo, seed));
  Model model = load_run_model(config, combo, seed);
  const auto hist = summarize_history(dir / "history.csv", config.train.max_epochs);
  const RunMetrics m = evaluate_model(model, corpus.dataset(combo, Partition::kTest), config, combo, seed, hist);
  write_text(dir / "metrics.json", m.to_json());
  return m;
}

RunMetrics run_training(const RunConfig& config, const FeatureCorpus& corpus, CombinationId combo,
                        std::uint64_t seed, std::ostream& log) {
  const fs::path dir = run_dir(config, combo, seed);
  fs::create_directories(dir);
  const std::string key = run_key(combo, seed);

  if (auto prior = read_run_metrics(dir); prior && !prior->complete()) {
    log << key << ": previously diverged at epoch " << prior->diverged_epoch << "\n";
    return *prior;
  }
  if (fs::exists(dir / "checkpoint.best")) {
    RunMetrics m = run_evaluation(config, corpus, combo, seed);
    log << key << ": resumed from checkpoint, accuracy " << fixed(100.0 * m.metrics.accuracy, 2) << "%\n";
    return m;
  }

  write_text(dir / "config.txt",
             config.render() + "\n[run]\ncombo = " + combo.name() + "\nseed = " + std::to_string(seed) + "\n");
  const TensorDataset train_set = corpus.dataset(combo, Partition::kTrain);
  const TensorDataset val_set = corpus.dataset(combo, Partition::kVal);

  Model model = build_model(model_config(config, combo, seed));
  TrainConfig tc = config.train;
  tc.seed = seed;
  std::vector<EpochRecord> history;
  try {
    train(model, train_set, val_set, tc, [&](const EpochRecord& r) { history.push_back(r); });
  } catch (const DivergenceError& e) {
    write_text(dir / "history.csv", render_history(history));
    RunMetrics m;
    m.combo = combo.name();
    m.seed = seed;
    m.status = "diverged";
    m.diverged_epoch = e.epoch();
    write_text(dir / "metrics.json", m.to_json());
    log << key << ": diverged at epoch " << e.epoch() << "\n";
    return m;
  }
  write_text(dir / "history.csv", render_history(history));
  write_checkpoint(dir / "checkpoint.best", model.state());

  const auto hist = summarize_history(dir / "history.csv", config.train.max_epochs);
  const RunMetrics m = evaluate_model(model, corpus.dataset(combo, Partition::kTest), config, combo, seed, hist);
  write_text(dir / "metrics.json", m.to_json());
  log << key << ": " << m.epochs_run << " epochs (best " << m.best_epoch << "), accuracy "
      << fixed(100.0 * m.metrics.accuracy, 2) << "%\n";
  return m;
}

SweepSummary run_sweep(const RunConfig& config, const FeatureCorpus& corpus, std::ostream& log) {
  std::vector<std::pair<CombinationId, std::uint64_t>> jobs;
  for (const auto& combo : config.combos) {
    for (auto seed : config.seeds) jobs.emplace_back(combo, seed);
  }

  SweepSummary summary;
  summary.runs = static_cast<int>(jobs.size());
  std::mutex mu;
  parallel_for(jobs.size(), config.workers, [&](std::size_t i) {
    const auto [combo, seed] = jobs[i];
    const bool had_checkpoint = fs::exists(run_dir(config, combo, seed) / "checkpoint.best");
    std::ostringstream local;
    try {
      const RunMetrics m = run_training(config, corpus, combo, seed, local);
      std::lock_guard lock(mu);
      if (!m.complete()) {
        summary.diverged.push_back(run_key(combo, seed));
      } else if (had_checkpoint) {
        ++summary.resumed;
      } else {
        ++summary.trained;
      }
    } catch (const std::exception& e) {
      local << run_key(combo, seed) << ": failed: " << e.what() << "\n";
      std::lock_guard lock(mu);
      summary.failed.push_back(run_key(combo, seed));
    }
    std::lock_guard lock(mu);
    log << local.str() << std::flush;
  });
  std::sort(summary.diverged.begin(), summary.diverged.end());
  std::sort(summary.failed.begin(), summary.failed.end());
  return summary;
}

ReportSummary collect_report(const RunConfig& config) {
  ReportSummary out;
  for (const auto& combo : config.combos) {
    ComboRow row;
    row.combo = combo;
    std::vector<std::uint64_t> seeds = config.seeds;
    std::sort(seeds.begin(), seeds.end());
    for (auto seed : seeds) {
      const auto m = read_run_metrics(run_dir(config, combo, seed));
      if (!m || !m->complete()) {
        out.missing.push_back(run_key(combo, seed));
        continue;
      }
      row.runs.push_back(*m);
    }
    if (row.runs.empty()) continue;
    std::vector<MetricsReport> reports;
    for (const auto& r : row.runs) reports.push_back(r.metrics);
    row.aggregate = aggregate(reports);
    const RunMetrics* best = &row.runs.front();
    for (const auto& r : row.runs) {
      if (r.metrics.accuracy > best->metrics.accuracy) best = &r;
    }
    row.best_seed = best->seed;
    out.rows.push_back(std::move(row));
  }
  std::stable_sort(out.rows.begin(), out.rows.end(), [](const ComboRow& a, const ComboRow& b) {
    return a.aggregate.accuracy.mean > b.aggregate.accuracy.mean;
  });
  return out;
}

std::string format_table(const std::vector<ComboRow>& rows) {
  const std::vector<std::string> header = {"Features", "Accuracy (%)", "Precision (%)", "Recall (%)",
                                           "F1 score (%)", "MCC"};
  std::vector<std::vector<std::string>> cells = {header};
  for (const auto& r : rows) {
    const auto& a = r.aggregate;
    cells.push_back({r.combo.name(), pm(a.accuracy, 100.0), pm(a.precision, 100.0), pm(a.recall, 100.0),
                     pm(a.f1, 100.0), pm(a.mcc, 1.0)});
  }
  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], display_width(row[c]));
  }
  std::string out;
  for (const auto& row : cells) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      line += c + 1 < row.size() ? pad_right(row[c], widths[c] + 2) : row[c];
    }
    out += line + "\n";
  }
  return out;
}

ReportSummary run_report(const RunConfig& config, const FeatureCorpus* corpus, std::ostream& log) {
  ReportSummary rep = collect_report(config);
  const fs::path dir = config.report_dir();
  fs::create_directories(dir / "confusion");
  if (corpus != nullptr) fs::create_directories(dir / "penultimate");

  std::string table = "rank,features,channels,runs";
  for (const char* m : {"accuracy", "precision", "recall", "f1", "mcc"}) {
    table += std::string(",") + m + "_mean," + m + "_std";
  }
  table += ",log_fdr_mean,best_seed\n";
  std::string fdr = "features,seed,log_fdr\n";
  json combos = json::array();

  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const ComboRow& row = rep.rows[i];
    const auto& a = row.aggregate;
    std::vector<double> fdr_values;
    for (const auto& r : row.runs) {
      fdr += row.combo.name() + "," + std::to_string(r.seed) + "," + (r.log_fdr ? fixed(*r.log_fdr, 6) : "") + "\n";
      if (r.log_fdr) fdr_values.push_back(*r.log_fdr);
    }
    const std::optional<double> fdr_mean =
        fdr_values.empty() ? std::nullopt : std::optional<double>(mean_std(fdr_values).mean);

    table += std::to_string(i + 1) + "," + row.combo.name() + "," + std::to_string(row.combo.size()) + "," +
             std::to_string(row.runs.size());
    for (const MeanStd* v : {&a.accuracy, &a.precision, &a.recall, &a.f1, &a.mcc}) {
      table += "," + fixed(v->mean, 6) + "," + fixed(v->stddev, 6);
    }
    table += "," + (fdr_mean ? fixed(*fdr_mean, 6) : "") + "," + std::to_string(row.best_seed) + "\n";

    const RunMetrics* best = nullptr;
    for (const auto& r : row.runs) {
      if (r.seed == row.best_seed) best = &r;
    }
    const ConfusionMatrix& cm = best->confusion;
    const auto normalized = cm.row_normalized();
    std::string header = "true_class";
    for (int p = 0; p < cm.classes; ++p) header += ",pred_" + std::to_string(p);
    std::string counts_csv = header + "\n", norm_csv = header + "\n";
    json counts = json::array(), norm = json::array();
    for (int t = 0; t < cm.classes; ++t) {
      json crow = json::array(), nrow = json::array();
      counts_csv += std::to_string(t);
      norm_csv += std::to_string(t);
      for (int p = 0; p < cm.classes; ++p) {
        const double nv = normalized[static_cast<std::size_t>(t) * cm.classes + p];
        counts_csv += "," + std::to_string(cm.at(t, p));
        norm_csv += "," + shortest(nv);
        crow.push_back(cm.at(t, p));
        nrow.push_back(nv);
      }
      counts_csv += "\n";
      norm_csv += "\n";
      counts.push_back(crow);
      norm.push_back(nrow);
    }
    write_text(dir / "confusion" / (row.combo.name() + ".counts.csv"), counts_csv);
    write_text(dir / "confusion" / (row.combo.name() + ".normalized.csv"), norm_csv);

    json runs = json::array();
    for (const auto& r : row.runs) {
      runs.push_back({{"seed", r.seed},
                      {"accuracy", r.metrics.accuracy},
                      {"precision", r.metrics.precision},
                      {"recall", r.metrics.recall},
                      {"f1", r.metrics.f1},
                      {"mcc", r.metrics.mcc},
                      {"log_fdr", r.log_fdr ? json(*r.log_fdr) : json(nullptr)},
                      {"epochs_run", r.epochs_run},
                      {"best_epoch", r.best_epoch}});
    }
    combos.push_back({{"rank", i + 1},
                      {"features", row.combo.name()},
                      {"complete", row.runs.size() == config.seeds.size()},
                      {"runs", runs},
                      {"aggregate",
                       {{"accuracy", metric_json(a.accuracy)},
                        {"precision", metric_json(a.precision)},
                        {"recall", metric_json(a.recall)},
                        {"f1", metric_json(a.f1)},
                        {"mcc", metric_json(a.mcc)}}},
                      {"best_seed", row.best_seed},
                      {"confusion", {{"counts", counts}, {"row_normalized", norm}}}});

    if (corpus != nullptr) {
      Model model = load_run_model(config, row.combo, row.best_seed);
      const Predictions pred =
          predict(model, corpus->dataset(row.combo, Partition::kTest), config.train.batch_size, true);
      std::string csv = "label";
      const std::size_t width = pred.penultimate.empty() ? 0 : pred.penultimate.front().size();
      for (std::size_t k = 0; k < width; ++k) csv += ",f" + std::to_string(k);
      csv += "\n";
      for (std::size_t s = 0; s < pred.labels.size(); ++s) {
        csv += std::to_string(pred.labels[s]);
        for (float v : pred.penultimate[s]) csv += "," + shortest(v);
        csv += "\n";
      }
      write_text(dir / "penultimate" / (row.combo.name() + ".csv"), csv);
    }
  }

  json report;
  report["seeds"] = config.seeds;
  report["combinations"] = combos;
  report["missing"] = rep.missing;
  write_text(dir / "table.csv", table);
  write_text(dir / "table.txt", format_table(rep.rows));
  write_text(dir / "fdr.csv", fdr);
  write_text(dir / "report.json", report.dump(2) + "\n");

  log << "report: " << rep.rows.size() << " rows written to " << dir.string() << "\n";
  if (!rep.missing.empty()) {
    log << "missing runs:";
    for (const auto& m : rep.missing) log << " " << m;
    log << "\n";
  }
  return rep;
}

}  // namespace sonoscope
