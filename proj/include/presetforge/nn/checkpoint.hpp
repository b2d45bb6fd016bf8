#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "presetforge/nn/adam.hpp"
#include "presetforge/nn/tensor.hpp"

namespace presetforge::nn {

inline constexpr char kCheckpointMagic[8] = {'D', 'P', 'R', 'E', 'S', 'E', 'T', '1'};

/// Layout: 8-byte magic, u64 little-endian header length, JSON header
/// (tensor names, shapes, dtypes, byte offsets into the data block), then
/// the little-endian f32 data block.
struct Checkpoint {
    ModelParams params;
    std::optional<AdamState> adam;
    nlohmann::json meta = nlohmann::json::object();  // free-form, e.g. the net config
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace presetforge::nn
