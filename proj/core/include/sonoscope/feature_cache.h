#ifndef SONOSCOPE_FEATURE_CACHE_H_
#define SONOSCOPE_FEATURE_CACHE_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sonoscope/tf_features.h"

namespace sonoscope {

// Little-endian layout: "TFFM", u32 version (1), u8 kind, u32 freq_bins,
// u32 time_frames, then freq_bins * time_frames float32 in frequency-major
// order.
inline constexpr std::uint32_t kFeatureCacheVersion = 1;

std::vector<unsigned char> encode_feature_map(const FeatureMap& map);
FeatureMap decode_feature_map(std::span<const unsigned char> bytes);

void write_feature_map(const std::filesystem::path& path, const FeatureMap& map);
FeatureMap read_feature_map(const std::filesystem::path& path);

// Writes only if the file is absent or differs from the encoded map.
// Returns true when the file was (re)written.
bool write_feature_map_if_changed(const std::filesystem::path& path, const FeatureMap& map);

}  // namespace sonoscope

#endif  // SONOSCOPE_FEATURE_CACHE_H_
