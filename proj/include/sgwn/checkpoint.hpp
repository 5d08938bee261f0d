#pragma once

#include <filesystem>
#include <string>

#include "sgwn/nn.hpp"

namespace sgwn::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// "SGWN", u32 version, u64 header length, JSON header (model config, graph,
/// array shapes), then every parameter and buffer as little-endian f64 in
/// header order, column-major within an array.
std::string encode_checkpoint(const SgwnModel& model);
SgwnModel decode_checkpoint(std::string_view bytes);

void save_checkpoint(const SgwnModel& model, const std::filesystem::path& path);
SgwnModel load_checkpoint(const std::filesystem::path& path);

}  // namespace sgwn::nn
