#ifndef SONOSCOPE_CHECKPOINT_H_
#define SONOSCOPE_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sonoscope/hltdnn.h"

namespace sonoscope {

// Little-endian layout: "HLTC", u32 version, u32 tensor count, then per
// tensor: u8 name length, name bytes, u32 rank, rank x u32 dims, float32
// payload.
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<unsigned char> encode_checkpoint(const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> decode_checkpoint(const std::vector<unsigned char>& bytes);

void write_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path);

}  // namespace sonoscope

#endif  // SONOSCOPE_CHECKPOINT_H_
