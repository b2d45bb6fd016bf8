#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "presetforge/dataset.hpp"
#include "presetforge/net/config.hpp"
#include "presetforge/net/inference.hpp"
#include "presetforge/nn/adam.hpp"

namespace presetforge::net {

struct TrainConfig {
    NetConfig net;
    LossWeights weights;
    double lr = 3e-4;
    int steps = 3000;
    int batch = 4;
    int patch = 32;
    std::uint64_t seed = 1;
    bool strict = false;
    bool no_ppl = false;
    bool fixed_batch = false;  // overfit one batch drawn at step 0
    int val_every = 500;       // 0 disables validation
    int val_batches = 4;
    int progress_every = 100;  // stderr progress records; 0 disables
    std::optional<int> threads;
    std::filesystem::path manifest;
    std::filesystem::path checkpoint;  // empty: do not write
    std::filesystem::path log;         // JSONL, one record per step; empty: do not write

    /// Effective weights (ppl weight forced to 0 by no_ppl).
    LossWeights effective_weights() const;
};

nlohmann::json to_json(const TrainConfig& c);
/// Relative paths are resolved against `base_dir`.
TrainConfig train_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
TrainConfig load_train_config(const std::filesystem::path& path);

struct TrainResult {
    Model model;
    nn::AdamState adam;
    std::vector<nlohmann::json> log;  // step and validation records, in order
    std::vector<LossBreakdown> steps;
};

using ProgressSink = std::function<void(const nlohmann::json&)>;

TrainResult train(const TrainConfig& config, const dataset::DatasetManifest& manifest, const ProgressSink& progress = {});
TrainResult train(const TrainConfig& config, const ProgressSink& progress = {});

/// Stream ids the trainer feeds to derive_seed.
inline constexpr std::uint64_t kInitStream = 0x11;
inline constexpr std::uint64_t kDataStream = 0x12;
inline constexpr std::uint64_t kValStream = 0x13;

}  // namespace presetforge::net
