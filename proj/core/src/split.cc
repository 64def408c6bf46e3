#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "sonoscope/errors.h"
#include "sonoscope/random.h"
#include "sonoscope/signal_io.h"

namespace sonoscope {

SplitManifest split_dataset(const std::vector<RecordingInfo>& recordings,
                            const std::array<double, 3>& ratios,
                            std::uint64_t seed) {
  double ratio_sum = 0.0;
  for (double r : ratios) {
    if (!(r > 0.0)) throw RangeError("split_dataset: ratios must be positive");
    ratio_sum += r;
  }
  if (std::abs(ratio_sum - 1.0) > 1e-9) {
    throw RangeError("split_dataset: ratios must sum to 1");
  }

  std::map<int, std::vector<const RecordingInfo*>> by_class;
  std::set<std::string> seen;
  std::int64_t total = 0;
  for (const auto& r : recordings) {
    if (!seen.insert(r.recording_id).second) {
      throw SelectionError("split_dataset: duplicate recording '" + r.recording_id + "'");
    }
    if (r.segment_count < 0) throw RangeError("split_dataset: negative segment count");
    by_class[r.class_label].push_back(&r);
    total += r.segment_count;
  }
  for (const auto& [label, recs] : by_class) {
    if (recs.size() < 3) {
      throw InsufficientDataError("split_dataset: class " + std::to_string(label) +
                                  " has fewer than 3 recordings");
    }
  }

  // Per-class shuffle. Input order must not matter, so sort by id first.
  Rng rng(seed);
  for (auto& [label, recs] : by_class) {
    std::sort(recs.begin(), recs.end(),
              [](const RecordingInfo* a, const RecordingInfo* b) {
                return a->recording_id < b->recording_id;
              });
    rng.shuffle(recs);
  }

  // Round-robin interleave so that no class is exhausted before the others.
  std::vector<const RecordingInfo*> order;
  order.reserve(recordings.size());
  for (std::size_t i = 0;; ++i) {
    bool any = false;
    for (const auto& [label, recs] : by_class) {
      if (i < recs.size()) {
        order.push_back(recs[i]);
        any = true;
      }
    }
    if (!any) break;
  }

  SplitManifest m;
  m.seed = seed;
  std::array<double, 3> target{};
  for (int p = 0; p < 3; ++p) target[p] = ratios[p] * static_cast<double>(total);

  for (const RecordingInfo* r : order) {
    int best = 0;
    double best_deficit = target[0] - static_cast<double>(m.segment_counts[0]);
    for (int p = 1; p < 3; ++p) {
      const double d = target[p] - static_cast<double>(m.segment_counts[p]);
      if (d > best_deficit) {
        best = p;
        best_deficit = d;
      }
    }
    m.assignments.emplace(r->recording_id, static_cast<Partition>(best));
    m.segment_counts[best] += r->segment_count;
  }

  for (int p = 0; p < 3; ++p) {
    m.achieved_ratios[p] =
        total > 0 ? static_cast<double>(m.segment_counts[p]) / static_cast<double>(total)
                  : 0.0;
  }
  return m;
}

}  // namespace sonoscope
