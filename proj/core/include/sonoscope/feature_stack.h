#ifndef SONOSCOPE_FEATURE_STACK_H_
#define SONOSCOPE_FEATURE_STACK_H_

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sonoscope/tf_features.h"

namespace sonoscope {

// Nonempty subset of feature kinds; bit i set means kind i is included.
class CombinationId {
 public:
  explicit CombinationId(std::uint32_t mask);

  std::uint32_t mask() const { return mask_; }
  int size() const;
  bool contains(FeatureKind kind) const {
    return (mask_ >> static_cast<unsigned>(kind)) & 1U;
  }
  // Included kinds in canonical order (MS, MFCC, STFT, GFCC, CQT, VQT).
  std::vector<FeatureKind> kinds() const;
  // Canonical report name, e.g. "MFCC+STFT+GFCC+VQT".
  std::string name() const;

  // Accepts '+' or ',' separated kind names in any order and case.
  static CombinationId parse(const std::string& text);
  static CombinationId of(std::span<const FeatureKind> kinds);

  auto operator<=>(const CombinationId&) const = default;

 private:
  std::uint32_t mask_;
};

// Masks 1 .. 2^m - 1 in ascending order.
std::vector<CombinationId> enumerate_combinations(int m);

// Parses "all" or a ';'-separated list of combination names.
std::vector<CombinationId> parse_combination_list(const std::string& text);

struct PadOffsets {
  int top = 0;
  int left = 0;
};

// Symmetric padding; an odd deficit puts the extra row at the bottom and the
// extra column on the right.
PadOffsets pad_offsets(int src_h, int src_w, int dst_h, int dst_w);

struct Grid2D {
  int rows = 0;
  int cols = 0;
  std::vector<float> values;

  float at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
};

Grid2D adaptive_pad(const FeatureMap& fm, int target_h, int target_w);

// [channels x height x width] model input.
struct FeatureStack {
  CombinationId combo{1};
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> values;

  float at(int c, int h, int w) const {
    return values[(static_cast<std::size_t>(c) * height + h) * width + w];
  }
  std::span<const float> channel(int c) const {
    return {values.data() + static_cast<std::size_t>(c) * height * width,
            static_cast<std::size_t>(height) * width};
  }
};

// Per-kind z-scoring statistics estimated on the training split.
class Standardizer {
 public:
  struct Stats {
    double mean = 0.0;
    double stddev = 1.0;
    std::int64_t count = 0;
  };

  void accumulate(const FeatureMap& map);
  // Finalizes running sums into mean/stddev.
  void finish();

  bool has(FeatureKind kind) const { return stats_[static_cast<std::size_t>(kind)].count > 0; }
  const Stats& stats(FeatureKind kind) const { return stats_[static_cast<std::size_t>(kind)]; }
  void set(FeatureKind kind, const Stats& s) { stats_[static_cast<std::size_t>(kind)] = s; }

  void apply(FeatureMap& map) const;

 private:
  std::array<Stats, kNumFeatureKinds> stats_{};
  std::array<double, kNumFeatureKinds> sum_{};
  std::array<double, kNumFeatureKinds> sum_sq_{};
};

// Pads every selected map to the largest height/width and concatenates along
// the channel axis in canonical order. `features` must hold exactly one map of
// each kind in `combo`, in any order.
FeatureStack stack(std::span<const FeatureMap> features, CombinationId combo,
                   const Standardizer* standardizer = nullptr);

// Inverse of the padding for one channel: recovers a map of the given size.
FeatureMap crop_channel(const FeatureStack& s, int channel, FeatureKind kind,
                        int freq_bins, int time_frames);

}  // namespace sonoscope

#endif  // SONOSCOPE_FEATURE_STACK_H_
