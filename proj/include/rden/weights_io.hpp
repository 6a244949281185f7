#pragma once

#include "rden/network.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace rden {

inline constexpr char kWeightMagic[4] = {'R', 'D', 'N', 'W'};
inline constexpr std::uint16_t kWeightFormatVersion = 1;

// Layout, all little-endian:
//   "RDNW" | u16 version | u16 layer count
//   per layer: u32 kernel, u32 kernel, u32 in, u32 out
//              f32 weights[kernel*kernel*in*out]   ([ky][kx][in][out])
//              u32 bias length | f32 bias[]
// Values are stored as float; parameters not representable as float are
// rounded on save.

std::vector<std::uint8_t> encode_params(const NetParams& params);
/// Decodes against `config`; throws DataError on bad magic, unsupported
/// version, truncation, or a layer whose dims differ from the config
/// (naming the first such layer).
NetParams decode_params(std::span<const std::uint8_t> bytes, const NetConfig& config);

void save_params(const NetParams& params, const std::filesystem::path& path);
NetParams load_params(const std::filesystem::path& path, const NetConfig& config);

} // namespace rden
