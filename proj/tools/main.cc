#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "sonoscope/config.h"
#include "sonoscope/errors.h"
#include "sonoscope/pipeline.h"
#include "sonoscope/synth.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitInvalidConfig = 2;

struct CommonOptions {
  std::string config_path;
  std::optional<int> workers;
  std::optional<std::string> combos;
  std::optional<std::string> seeds;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "Run configuration file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--workers", opts.workers, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--combos", opts.combos, "Feature combinations: all, or e.g. MFCC;STFT+MFCC");
  cmd->add_option("--seeds", opts.seeds, "Comma-separated seed list");
}

sonoscope::RunConfig load_config(const CommonOptions& opts) {
  sonoscope::RunConfig cfg = sonoscope::RunConfig::load(opts.config_path);
  if (opts.workers) cfg.workers = *opts.workers;
  if (opts.combos) {
    try {
      cfg.combos = sonoscope::parse_combination_list(*opts.combos);
    } catch (const sonoscope::Error& e) {
      throw sonoscope::ConfigError(std::string("--combos: ") + e.what());
    }
  }
  if (opts.seeds) cfg.seeds = sonoscope::parse_seed_list(*opts.seeds);
  sonoscope::apply_environment(cfg);
  cfg.validate();
  return cfg;
}

int cmd_extract(const sonoscope::RunConfig& cfg) {
  const auto s = sonoscope::run_extract(cfg, std::cout);
  return s.failures.empty() ? kExitOk : kExitPartial;
}

int cmd_split(const sonoscope::RunConfig& cfg) {
  sonoscope::run_split(cfg, std::cout);
  return kExitOk;
}

int cmd_train(const sonoscope::RunConfig& cfg) {
  const auto corpus = sonoscope::FeatureCorpus::load(cfg);
  const auto s = sonoscope::run_sweep(cfg, corpus, std::cout);
  std::cout << "train: " << s.trained << " trained, " << s.resumed << " resumed, " << s.diverged.size()
            << " diverged, " << s.failed.size() << " failed\n";
  return s.diverged.empty() && s.failed.empty() ? kExitOk : kExitPartial;
}

int cmd_sweep(const sonoscope::RunConfig& cfg) {
  const auto corpus = sonoscope::FeatureCorpus::load(cfg);
  const auto s = sonoscope::run_sweep(cfg, corpus, std::cout);
  std::cout << "sweep: " << s.runs << " runs, " << s.trained << " trained, " << s.resumed << " resumed, "
            << s.diverged.size() << " diverged, " << s.failed.size() << " failed\n";
  const auto rep = sonoscope::run_report(cfg, &corpus, std::cout);
  std::cout << sonoscope::format_table(rep.rows);
  const bool ok = s.diverged.empty() && s.failed.empty() && rep.missing.empty();
  return ok ? kExitOk : kExitPartial;
}

int cmd_evaluate(const sonoscope::RunConfig& cfg) {
  const auto corpus = sonoscope::FeatureCorpus::load(cfg);
  int missing = 0;
  for (const auto& combo : cfg.combos) {
    for (auto seed : cfg.seeds) {
      const std::string key = combo.name() + "/" + std::to_string(seed);
      if (!std::filesystem::exists(sonoscope::run_dir(cfg, combo, seed) / "checkpoint.best")) {
        std::cerr << key << ": no checkpoint\n";
        ++missing;
        continue;
      }
      const auto m = sonoscope::run_evaluation(cfg, corpus, combo, seed);
      std::cout << key << ": accuracy " << m.metrics.accuracy << ", mcc " << m.metrics.mcc << "\n";
    }
  }
  return missing == 0 ? kExitOk : kExitPartial;
}

int cmd_report(const sonoscope::RunConfig& cfg, bool penultimate) {
  std::optional<sonoscope::FeatureCorpus> corpus;
  if (penultimate) corpus = sonoscope::FeatureCorpus::load(cfg);
  const auto rep = sonoscope::run_report(cfg, corpus ? &*corpus : nullptr, std::cout);
  std::cout << sonoscope::format_table(rep.rows);
  if (!rep.missing.empty()) {
    std::cerr << "incomplete: " << rep.missing.size() << " runs missing\n";
    return kExitPartial;
  }
  return kExitOk;
}

void write_starter_config(const std::filesystem::path& dir, int classes) {
  std::ofstream out(dir / "sonoscope.ini");
  out << "[corpus]\nmanifest = manifest.csv\n\n"
      << "[output]\ndir = out\n\n"
      << "[model]\nclasses = " << classes << "\n\n"
      << "[split]\nratios = 0.7,0.15,0.15\nseed = 0\n\n"
      << "[train]\nlr = 0.001\nbatch = 128\nmax_epochs = 150\npatience = 15\ndropout = 0.5\n\n"
      << "[sweep]\nseeds = 0,1,2\ncombos = all\nworkers = 1\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sonoscope: feature-combination sweeps for histogram-layer audio classifiers"};
  app.require_subcommand(1);

  CommonOptions opts;
  auto* extract = app.add_subcommand("extract", "Compute the feature cache for every manifest entry");
  auto* split = app.add_subcommand("split", "Assign recordings to train/val/test and fit normalization");
  auto* train = app.add_subcommand("train", "Train the configured combinations and seeds");
  auto* sweep = app.add_subcommand("sweep", "Train every configured run, then write the report");
  auto* evaluate = app.add_subcommand("evaluate", "Re-evaluate trained checkpoints on the test split");
  auto* report = app.add_subcommand("report", "Aggregate finished runs into tables and dumps");
  for (auto* cmd : {extract, split, train, sweep, evaluate, report}) add_common(cmd, opts);
  bool no_penultimate = false;
  report->add_flag("--no-penultimate", no_penultimate, "Skip the penultimate feature dumps");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic four-class corpus");
  std::string synth_dir;
  sonoscope::SynthConfig synth_cfg;
  synth->add_option("--out", synth_dir, "Output directory")->required();
  synth->add_option("--classes", synth_cfg.classes, "Number of classes")->check(CLI::PositiveNumber);
  synth->add_option("--recordings", synth_cfg.recordings_per_class, "Recordings per class")
      ->check(CLI::PositiveNumber);
  synth->add_option("--seconds", synth_cfg.seconds, "Recording length in seconds")->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_cfg.seed, "Generator seed");
  synth->add_flag("--overlapping", synth_cfg.overlapping, "Use closely spaced class tones");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalidConfig;
  }

  try {
    if (synth->parsed()) {
      const auto manifest = sonoscope::generate_corpus(synth_dir, synth_cfg);
      write_starter_config(synth_dir, synth_cfg.classes);
      std::cout << "wrote " << manifest.string() << "\n";
      return kExitOk;
    }
    const sonoscope::RunConfig cfg = load_config(opts);
    if (extract->parsed()) return cmd_extract(cfg);
    if (split->parsed()) return cmd_split(cfg);
    if (train->parsed()) return cmd_train(cfg);
    if (sweep->parsed()) return cmd_sweep(cfg);
    if (evaluate->parsed()) return cmd_evaluate(cfg);
    if (report->parsed()) return cmd_report(cfg, !no_penultimate);
  } catch (const sonoscope::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kExitInvalidConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPartial;
  }
  return kExitOk;
}
