#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>

#include "json.hpp"
#include "sonoscope/config.h"
#include "sonoscope/pipeline.h"
#include "sonoscope/synth.h"
#include "test_util.h"

namespace sonoscope {
namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string run_config_text(const std::string& combos, int classes) {
  return "[corpus]\nmanifest = manifest.csv\n\n[output]\ndir = out\n\n"
         "[split]\nratios = 0.5,0.25,0.25\nseed = 0\n\n"
         "[model]\nclasses = " + std::to_string(classes) + "\n\n"
         "[train]\nlr = 0.01\nbatch = 16\nmax_epochs = 3\npatience = 2\n\n"
         "[sweep]\nseeds = 0,1\ncombos = " + combos + "\n";
}

int count_files(const fs::path& dir, const std::string& extension) {
  int n = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir)) n += e.path().extension() == extension;
  return n;
}

#ifdef SONOSCOPE_CLI_PATH
int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(SONOSCOPE_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
#endif

// Twelve recordings of 7 s (two segments each), extracted and split once for
// the whole suite, with two combinations trained for two seeds.
class PipelineTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = std::make_unique<testutil::TempDir>();
    SynthConfig sc;
    sc.recordings_per_class = 3;
    sc.seconds = 7.0;
    generate_corpus(dir_->path(), sc);
    write_text(dir_->path() / "run.ini", run_config_text("MFCC;MFCC+STFT", 4));
    config_ = std::make_unique<RunConfig>(RunConfig::load(dir_->path() / "run.ini"));
    std::ostringstream log;
    extract_ = run_extract(*config_, log);
    run_split(*config_, log);
    corpus_ = std::make_unique<FeatureCorpus>(FeatureCorpus::load(*config_));
    sweep_ = run_sweep(*config_, *corpus_, log);
  }
  static void TearDownTestSuite() {
    corpus_.reset();
    config_.reset();
    dir_.reset();
  }

  static inline std::unique_ptr<testutil::TempDir> dir_;
  static inline std::unique_ptr<RunConfig> config_;
  static inline std::unique_ptr<FeatureCorpus> corpus_;
  static inline ExtractSummary extract_;
  static inline SweepSummary sweep_;
};

TEST_F(PipelineTest, ExtractsEveryKindOfEverySegment) {
  EXPECT_EQ(extract_.recordings, 12);
  EXPECT_EQ(extract_.segments, 24);
  EXPECT_EQ(extract_.files_written, 24 * kNumFeatureKinds);
  EXPECT_TRUE(extract_.failures.empty());
  EXPECT_EQ(count_files(config_->cache_dir, ".tffm"), 24 * kNumFeatureKinds);
  EXPECT_EQ(read_cache_index(config_->cache_dir).size(), 12u);
}

TEST_F(PipelineTest, SecondExtractionWritesNothing) {
  std::ostringstream log;
  const auto again = run_extract(*config_, log);
  EXPECT_EQ(again.files_written, 0);
  EXPECT_EQ(again.files_unchanged, 24 * kNumFeatureKinds);
}

TEST_F(PipelineTest, SplitKeepsRecordingsWhole) {
  std::map<Partition, int> counts;
  std::map<std::string, Partition> owner;
  for (const auto& s : corpus_->segments) {
    ++counts[s.partition];
    const auto [it, inserted] = owner.emplace(s.recording_id, s.partition);
    EXPECT_EQ(it->second, s.partition) << s.recording_id;
  }
  EXPECT_EQ(corpus_->segments.size(), 24u);
  EXPECT_GT(counts[Partition::kTrain], 0);
  EXPECT_GT(counts[Partition::kVal], 0);
  EXPECT_GT(counts[Partition::kTest], 0);
  EXPECT_TRUE(fs::exists(config_->normalization_path()));
}

TEST_F(PipelineTest, SweepWritesRunArtifacts) {
  EXPECT_EQ(sweep_.runs, 4);
  EXPECT_EQ(sweep_.trained, 4);
  EXPECT_TRUE(sweep_.failed.empty());
  for (const auto& combo : config_->combos) {
    for (auto seed : config_->seeds) {
      const auto dir = run_dir(*config_, combo, seed);
      for (const char* f : {"config.txt", "history.csv", "checkpoint.best", "metrics.json"}) {
        EXPECT_TRUE(fs::exists(dir / f)) << dir / f;
      }
      const auto m = read_run_metrics(dir);
      ASSERT_TRUE(m.has_value());
      EXPECT_EQ(m->combo, combo.name());
      EXPECT_EQ(m->seed, seed);
      EXPECT_GE(m->best_epoch, 1);
      EXPECT_LE(m->epochs_run, 3);
      EXPECT_EQ(m->confusion.classes, 4);
    }
  }
}

TEST_F(PipelineTest, ResumeDoesNotRetrain) {
  const auto dir = run_dir(*config_, config_->combos[0], 0);
  const auto before = testutil::read_file(dir / "checkpoint.best");
  std::ostringstream log;
  const auto again = run_sweep(*config_, *corpus_, log);
  EXPECT_EQ(again.trained, 0);
  EXPECT_EQ(again.resumed, 4);
  EXPECT_EQ(testutil::read_file(dir / "checkpoint.best"), before);
}

TEST_F(PipelineTest, EvaluationReproducesStoredMetrics) {
  const auto dir = run_dir(*config_, config_->combos[1], 1);
  const auto stored = read_run_metrics(dir);
  ASSERT_TRUE(stored.has_value());
  const auto fresh = run_evaluation(*config_, *corpus_, config_->combos[1], 1);
  EXPECT_EQ(fresh.metrics.accuracy, stored->metrics.accuracy);
  EXPECT_EQ(fresh.confusion.counts, stored->confusion.counts);
}

TEST_F(PipelineTest, ReportIsByteIdenticalAcrossRuns) {
  std::ostringstream log;
  run_report(*config_, corpus_.get(), log);
  const auto report = config_->report_dir();
  const auto first_table = testutil::read_file(report / "table.csv");
  const auto first_json = testutil::read_file(report / "report.json");
  const auto first_pen = testutil::read_file(report / "penultimate" / "MFCC.csv");
  const auto rep = run_report(*config_, corpus_.get(), log);
  EXPECT_EQ(testutil::read_file(report / "table.csv"), first_table);
  EXPECT_EQ(testutil::read_file(report / "report.json"), first_json);
  EXPECT_EQ(testutil::read_file(report / "penultimate" / "MFCC.csv"), first_pen);
  ASSERT_EQ(rep.rows.size(), 2u);
  EXPECT_TRUE(rep.missing.empty());
  EXPECT_GE(rep.rows[0].aggregate.accuracy.mean, rep.rows[1].aggregate.accuracy.mean);
  const auto table = format_table(rep.rows);
  EXPECT_NE(table.find("Accuracy (%)"), std::string::npos);
  EXPECT_NE(table.find("MFCC+STFT"), std::string::npos);
}

TEST_F(PipelineTest, NormalizedConfusionRowsSumToOne) {
  std::ostringstream log;
  run_report(*config_, nullptr, log);
  std::ifstream in(config_->report_dir() / "confusion" / "MFCC.normalized.csv");
  ASSERT_TRUE(in.good());
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    double sum = 0.0;
    bool any = false;
    while (std::getline(ss, cell, ',')) {
      sum += std::stod(cell);
      any = true;
    }
    ASSERT_TRUE(any);
    if (sum > 0.0) {
      EXPECT_NEAR(sum, 1.0, 1e-9) << line;
    }
    ++rows;
  }
  EXPECT_EQ(rows, 4);
}

TEST_F(PipelineTest, ReportListsMissingRuns) {
  RunConfig wider = *config_;
  wider.seeds = {0, 1, 5};
  const auto rep = collect_report(wider);
  EXPECT_EQ(rep.missing.size(), 2u);
  const auto json = nlohmann::json::parse(
      [&] {
        std::ostringstream log;
        run_report(*config_, nullptr, log);
        return testutil::read_file(config_->report_dir() / "report.json");
      }());
  EXPECT_TRUE(json.contains("missing"));
}

TEST(Extract, TwoRecordingsOfTwoSegments) {
  testutil::TempDir dir;
  SynthConfig sc;
  sc.classes = 2;
  sc.recordings_per_class = 1;
  sc.seconds = 7.0;
  generate_corpus(dir.path(), sc);
  write_text(dir / "run.ini", run_config_text("MFCC", 2));
  const auto cfg = RunConfig::load(dir / "run.ini");
  std::ostringstream log;
  const auto s = run_extract(cfg, log);
  EXPECT_EQ(s.files_written, 24);
  EXPECT_EQ(count_files(cfg.cache_dir, ".tffm"), 24);
  EXPECT_TRUE(fs::exists(cache_file_path(cfg.cache_dir, "c1_r000", 1, FeatureKind::kVqt)));
}

#ifdef SONOSCOPE_CLI_PATH
TEST(Cli, InvalidConfigExitsWithTwo) {
  testutil::TempDir dir;
  write_text(dir / "bad.ini", "[train]\nlearning_rate = 0.1\n");
  EXPECT_EQ(run_cli("extract --config " + (dir / "bad.ini").string(), dir / "log.txt"), 2);
  EXPECT_NE(testutil::read_file(dir / "log.txt").find("learning_rate"), std::string::npos);
  EXPECT_EQ(run_cli("extract", dir / "log.txt"), 2);
  EXPECT_EQ(run_cli("extract --config " + (dir / "missing.ini").string(), dir / "log.txt"), 2);
}

TEST(Cli, CorruptRecordingIsSkippedAndReported) {
  testutil::TempDir dir;
  SynthConfig sc;
  sc.classes = 2;
  sc.recordings_per_class = 5;
  sc.seconds = 3.5;
  generate_corpus(dir.path(), sc);
  write_text(dir / "run.ini", run_config_text("MFCC", 2));
  const auto broken = dir / "audio" / "c1_r002.wav";
  write_text(broken, "RIFF this is not audio");
  EXPECT_EQ(run_cli("extract --config " + (dir / "run.ini").string(), dir / "log.txt"), 1);
  EXPECT_NE(testutil::read_file(dir / "log.txt").find("c1_r002.wav"), std::string::npos);
  EXPECT_EQ(read_cache_index(dir / "out" / "cache").size(), 9u);
}

TEST(Cli, ReportWithoutRunsExitsWithOne) {
  testutil::TempDir dir;
  SynthConfig sc;
  sc.classes = 2;
  sc.recordings_per_class = 1;
  sc.seconds = 3.5;
  generate_corpus(dir.path(), sc);
  write_text(dir / "run.ini", run_config_text("MFCC", 2));
  EXPECT_EQ(run_cli("report --no-penultimate --config " + (dir / "run.ini").string(), dir / "log.txt"), 1);
}

TEST(Cli, SynthWritesStarterConfig) {
  testutil::TempDir dir;
  EXPECT_EQ(run_cli("synth --out " + dir.path().string() + " --classes 3 --recordings 1 --seconds 3.5",
                    dir / "log.txt"),
            0);
  EXPECT_TRUE(fs::exists(dir / "manifest.csv"));
  const auto cfg = RunConfig::load(dir / "sonoscope.ini");
  EXPECT_EQ(cfg.num_classes, 3);
}
#endif

}  // namespace
}  // namespace sonoscope
