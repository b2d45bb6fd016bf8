#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include <json.hpp>

#include "presetforge/dataset.hpp"
#include "presetforge/net/inference.hpp"
#include "presetforge/net/train.hpp"

namespace presetforge::net {

/// Metrics on held-out (validation-split) triplets.
struct HeldOutReport {
    std::size_t pairs = 0;
    double psnr_model = 0;     // mean PSNR(Y_hat, Y)
    double psnr_identity = 0;  // mean PSNR(X, Y)
    double positive_distance = 0;  // mean |F_Z - F_Z'|, same preset
    double mismatch_distance = 0;  // mean |F_Z - F_Q|, Q a different preset on the positive source
    double distance_ratio = 0;     // positive / mismatch
    double hcorr_predicted_preset = 0;  // H-Corr(apply(X, P_hat), Y_hat)
    double hcorr_content = 0;           // H-Corr(X, Y_hat)
};
nlohmann::json to_json(const HeldOutReport& r);

/// Uses the manifest's sample records whose content is in the val split, at
/// most max_pairs of them (0 = all).
HeldOutReport evaluate_held_out(const Model& model, const dataset::DatasetManifest& manifest,
                                std::size_t max_pairs = 0);

/// Embedding of (content, reference) with the same padding and resizing
/// stylize applies.
std::vector<float> embedding_for(const Model& model, const ImageBuffer& content, const ImageBuffer& reference);

/// Built-in toy training setup (same values as configs/toy.json).
TrainConfig toy_train_config();

struct ToyOptions {
    std::filesystem::path workdir;
    std::filesystem::path bundled_images;  // optional; copied in before synthesizing
    int total_sources = 40;
    int synth_width = 192;
    int synth_height = 128;
    int n_presets = 32;
    std::uint64_t seed = 1;
    std::size_t eval_pairs = 0;
    TrainConfig train = toy_train_config();  // manifest, checkpoint and log are filled in
};

/// Dataset generation, the with-PPL and --no-ppl training runs under one
/// seed, and held-out evaluation of both. Writes report.json in the workdir.
nlohmann::json run_toy_experiment(const ToyOptions& opts, const ProgressSink& progress = {});

}  // namespace presetforge::net
