#ifndef SONOSCOPE_CONFIG_H_
#define SONOSCOPE_CONFIG_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sonoscope/feature_stack.h"
#include "sonoscope/tf_features.h"
#include "sonoscope/trainer.h"

namespace sonoscope {

// Flat "key = value" text with [section] headers; keys are addressed as
// "section.key". '#' starts a comment.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  const std::map<std::string, std::string>& values() const { return values_; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

 private:
  std::map<std::string, std::string> values_;
};

struct RunConfig {
  std::filesystem::path manifest;
  std::filesystem::path output_dir;
  std::filesystem::path cache_dir;  // defaults to <output_dir>/cache

  int sample_rate_hz = 16000;
  double segment_seconds = 3.0;
  double window_ms = 250.0;
  double hop_ms = 64.0;
  QGeometry q_geometry;

  std::array<double, 3> split_ratios = {0.7, 0.15, 0.15};
  std::uint64_t split_seed = 0;

  int num_classes = 4;
  int histogram_bins = 16;
  TrainConfig train;

  std::vector<std::uint64_t> seeds = {0, 1, 2};
  std::vector<CombinationId> combos = enumerate_combinations(kNumFeatureKinds);
  int workers = 1;

  // Throws ConfigError on unknown keys or invalid values. Relative paths are
  // resolved against `base_dir`.
  static RunConfig from_key_values(const KeyValueConfig& kv, const std::filesystem::path& base_dir);
  static RunConfig load(const std::filesystem::path& path);

  FeatureConfig feature_config() const;
  std::filesystem::path split_path() const { return output_dir / "split.csv"; }
  std::filesystem::path normalization_path() const { return output_dir / "normalization.csv"; }
  std::filesystem::path runs_dir() const { return output_dir / "runs"; }
  std::filesystem::path report_dir() const { return output_dir / "report"; }

  // Canonical text rendering (same syntax as the input file).
  std::string render() const;
  void validate() const;
};

std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace sonoscope

#endif  // SONOSCOPE_CONFIG_H_
