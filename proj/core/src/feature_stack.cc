#include "sonoscope/feature_stack.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "sonoscope/errors.h"

namespace sonoscope {

CombinationId::CombinationId(std::uint32_t mask) : mask_(mask) {
  if (mask == 0) throw SelectionError("combination must include at least one feature");
}

int CombinationId::size() const { return std::popcount(mask_); }

std::vector<FeatureKind> CombinationId::kinds() const {
  std::vector<FeatureKind> out;
  for (FeatureKind k : kAllFeatureKinds) {
    if (contains(k)) out.push_back(k);
  }
  return out;
}

std::string CombinationId::name() const {
  std::string out;
  for (FeatureKind k : kinds()) {
    if (!out.empty()) out += '+';
    out += feature_name(k);
  }
  return out;
}

CombinationId CombinationId::of(std::span<const FeatureKind> kinds) {
  std::uint32_t mask = 0;
  for (FeatureKind k : kinds) mask |= 1U << static_cast<unsigned>(k);
  return CombinationId(mask);
}

CombinationId CombinationId::parse(const std::string& text) {
  std::uint32_t mask = 0;
  std::string token;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    const char c = i < text.size() ? text[i] : '+';
    if (c == '+' || c == ',') {
      const auto b = token.find_first_not_of(" \t");
      const auto e = token.find_last_not_of(" \t");
      if (b != std::string::npos) {
        const FeatureKind k = parse_feature_kind(token.substr(b, e - b + 1));
        const std::uint32_t bit = 1U << static_cast<unsigned>(k);
        if (mask & bit) throw SelectionError("duplicate feature in '" + text + "'");
        mask |= bit;
      }
      token.clear();
    } else {
      token += c;
    }
  }
  if (mask == 0) throw SelectionError("empty combination '" + text + "'");
  return CombinationId(mask);
}

std::vector<CombinationId> enumerate_combinations(int m) {
  if (m < 1 || m > 16) throw RangeError("enumerate_combinations: require 1 <= m <= 16");
  std::vector<CombinationId> out;
  const std::uint32_t count = (1U << m) - 1;
  out.reserve(count);
  for (std::uint32_t mask = 1; mask <= count; ++mask) out.emplace_back(mask);
  return out;
}

std::vector<CombinationId> parse_combination_list(const std::string& text) {
  std::string trimmed = text;
  trimmed.erase(0, trimmed.find_first_not_of(" \t"));
  trimmed.erase(trimmed.find_last_not_of(" \t") + 1);
  if (trimmed == "all") return enumerate_combinations(kNumFeatureKinds);
  std::vector<CombinationId> out;
  std::istringstream ss(trimmed);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    const CombinationId id = CombinationId::parse(item);
    if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
  }
  if (out.empty()) throw SelectionError("no combinations in '" + text + "'");
  return out;
}

PadOffsets pad_offsets(int src_h, int src_w, int dst_h, int dst_w) {
  if (dst_h < src_h || dst_w < src_w) {
    throw SizeError("adaptive_pad: target " + std::to_string(dst_h) + "x" +
                    std::to_string(dst_w) + " is smaller than " + std::to_string(src_h) +
                    "x" + std::to_string(src_w));
  }
  return {(dst_h - src_h) / 2, (dst_w - src_w) / 2};
}

Grid2D adaptive_pad(const FeatureMap& fm, int target_h, int target_w) {
  const PadOffsets off = pad_offsets(fm.freq_bins, fm.time_frames, target_h, target_w);
  Grid2D g;
  g.rows = target_h;
  g.cols = target_w;
  g.values.assign(static_cast<std::size_t>(target_h) * target_w, 0.0f);
  for (int f = 0; f < fm.freq_bins; ++f) {
    std::copy_n(fm.values.begin() + static_cast<std::ptrdiff_t>(f) * fm.time_frames, fm.time_frames,
                g.values.begin() + static_cast<std::ptrdiff_t>(f + off.top) * target_w + off.left);
  }
  return g;
}

void Standardizer::accumulate(const FeatureMap& map) {
  const auto i = static_cast<std::size_t>(map.kind);
  for (float v : map.values) {
    sum_[i] += v;
    sum_sq_[i] += static_cast<double>(v) * v;
  }
  stats_[i].count += static_cast<std::int64_t>(map.values.size());
}

void Standardizer::finish() {
  for (std::size_t i = 0; i < stats_.size(); ++i) {
    Stats& s = stats_[i];
    if (s.count == 0) continue;
    const double n = static_cast<double>(s.count);
    s.mean = sum_[i] / n;
    const double var = std::max(0.0, sum_sq_[i] / n - s.mean * s.mean);
    const double sd = std::sqrt(var);
    s.stddev = sd > 1e-12 ? sd : 1.0;
  }
}

void Standardizer::apply(FeatureMap& map) const {
  const Stats& s = stats(map.kind);
  if (s.count == 0) return;
  for (float& v : map.values) v = static_cast<float>((v - s.mean) / s.stddev);
}

FeatureStack stack(std::span<const FeatureMap> features, CombinationId combo,
                   const Standardizer* standardizer) {
  if (combo.mask() >= (1U << kNumFeatureKinds)) {
    throw SelectionError("combination selects unknown feature kinds");
  }
  std::array<const FeatureMap*, kNumFeatureKinds> by_kind{};
  for (const FeatureMap& fm : features) {
    const auto i = static_cast<std::size_t>(fm.kind);
    if (by_kind[i] != nullptr) {
      throw SelectionError(std::string("duplicate feature ") + feature_name(fm.kind));
    }
    if (!combo.contains(fm.kind)) {
      throw SelectionError(std::string("feature ") + feature_name(fm.kind) +
                           " is not part of " + combo.name());
    }
    by_kind[i] = &fm;
  }

  FeatureStack s;
  s.combo = combo;
  const auto kinds = combo.kinds();
  for (FeatureKind k : kinds) {
    const FeatureMap* fm = by_kind[static_cast<std::size_t>(k)];
    if (fm == nullptr) throw SelectionError(std::string("missing feature ") + feature_name(k));
    s.height = std::max(s.height, fm->freq_bins);
    s.width = std::max(s.width, fm->time_frames);
  }
  s.channels = static_cast<int>(kinds.size());
  s.values.assign(static_cast<std::size_t>(s.channels) * s.height * s.width, 0.0f);

  for (int c = 0; c < s.channels; ++c) {
    const FeatureMap& src = *by_kind[static_cast<std::size_t>(kinds[static_cast<std::size_t>(c)])];
    const PadOffsets off = pad_offsets(src.freq_bins, src.time_frames, s.height, s.width);
    float* base = s.values.data() + static_cast<std::size_t>(c) * s.height * s.width;
    const Standardizer::Stats* st =
        standardizer != nullptr && standardizer->has(src.kind) ? &standardizer->stats(src.kind)
                                                                : nullptr;
    for (int f = 0; f < src.freq_bins; ++f) {
      float* row = base + static_cast<std::size_t>(f + off.top) * s.width + off.left;
      for (int t = 0; t < src.time_frames; ++t) {
        const float v = src.at(f, t);
        row[t] = st != nullptr ? static_cast<float>((v - st->mean) / st->stddev) : v;
      }
    }
  }
  return s;
}

FeatureMap crop_channel(const FeatureStack& s, int channel, FeatureKind kind, int freq_bins,
                        int time_frames) {
  if (channel < 0 || channel >= s.channels) throw SizeError("crop_channel: bad channel");
  const PadOffsets off = pad_offsets(freq_bins, time_frames, s.height, s.width);
  FeatureMap m;
  m.kind = kind;
  m.freq_bins = freq_bins;
  m.time_frames = time_frames;
  m.values.resize(static_cast<std::size_t>(freq_bins) * time_frames);
  for (int f = 0; f < freq_bins; ++f) {
    for (int t = 0; t < time_frames; ++t) {
      m.at(f, t) = s.at(channel, f + off.top, t + off.left);
    }
  }
  return m;
}

}  // namespace sonoscope
