#include "presetforge/net/train.hpp"

#include <chrono>

#include "presetforge/fileutil.hpp"
#include "presetforge/metrics.hpp"
#include "presetforge/tensor_image.hpp"
#include "presetforge/threads.hpp"

namespace presetforge::net {

namespace fs = std::filesystem;
using nlohmann::json;

LossWeights TrainConfig::effective_weights() const {
    LossWeights w = weights;
    if (no_ppl) w.ppl = 0.0;
    return w;
}

json to_json(const TrainConfig& c) {
    json j = {{"net", to_json(c.net)},
              {"loss", to_json(c.weights)},
              {"lr", c.lr},
              {"steps", c.steps},
              {"batch", c.batch},
              {"patch", c.patch},
              {"seed", c.seed},
              {"strict", c.strict},
              {"no_ppl", c.no_ppl},
              {"fixed_batch", c.fixed_batch},
              {"val_every", c.val_every},
              {"val_batches", c.val_batches},
              {"progress_every", c.progress_every},
              {"manifest", c.manifest.string()},
              {"checkpoint", c.checkpoint.string()},
              {"log", c.log.string()}};
    if (c.threads) j["threads"] = *c.threads;
    return j;
}

TrainConfig train_config_from_json(const json& j, const fs::path& base_dir) {
    TrainConfig c;
    auto path = [&](const char* key) -> fs::path {
        if (!j.contains(key)) return {};
        fs::path p = j[key].get<std::string>();
        if (p.empty() || p.is_absolute() || base_dir.empty()) return p;
        return base_dir / p;
    };
    try {
        if (j.contains("net")) c.net = net_config_from_json(j["net"]);
        if (j.contains("loss")) c.weights = loss_weights_from_json(j["loss"]);
        c.lr = j.value("lr", c.lr);
        c.steps = j.value("steps", c.steps);
        c.batch = j.value("batch", c.batch);
        c.patch = j.value("patch", c.patch);
        c.seed = j.value("seed", c.seed);
        c.strict = j.value("strict", c.strict);
        c.no_ppl = j.value("no_ppl", c.no_ppl);
        c.fixed_batch = j.value("fixed_batch", c.fixed_batch);
        c.val_every = j.value("val_every", c.val_every);
        c.val_batches = j.value("val_batches", c.val_batches);
        c.progress_every = j.value("progress_every", c.progress_every);
        if (j.contains("threads")) c.threads = j["threads"].get<int>();
    } catch (const json::exception& e) {
        throw Error(Errc::MalformedDocument, std::string("train config: ") + e.what());
    }
    c.manifest = path("manifest");
    c.checkpoint = path("checkpoint");
    c.log = path("log");
    if (!(c.lr > 0.0)) throw Error(Errc::InvalidParameter, "lr must be positive");
    if (c.steps < 0 || c.batch < 1 || c.val_batches < 0 || c.val_every < 0) {
        throw Error(Errc::InvalidParameter, "steps, batch and validation counts must be non-negative");
    }
    if (c.patch % c.net.spatial_multiple() != 0) {
        throw Error(Errc::InvalidParameter, "patch must be a multiple of " + std::to_string(c.net.spatial_multiple()));
    }
    return c;
}

TrainConfig load_train_config(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_file_text(path));
    } catch (const json::exception& e) {
        throw Error(Errc::MalformedDocument, std::string("train config: ") + e.what());
    }
    return train_config_from_json(j, path.parent_path());
}

namespace {

json step_record(int step, const LossBreakdown& l) {
    json r = to_json(l);
    r["kind"] = "step";
    r["step"] = step;
    return r;
}

double mean_psnr(const Batch<float>& b, const nn::Tensor& y_hat) {
    double acc = 0.0;
    for (std::size_t n = 0; n < b.y.dim(0); ++n) acc += psnr(tensor_to_image(y_hat, n), tensor_to_image(b.y, n));
    return acc / static_cast<double>(b.y.dim(0));
}

}  // namespace

TrainResult train(const TrainConfig& config, const dataset::DatasetManifest& manifest, const ProgressSink& progress) {
    set_thread_count(resolve_thread_count(config.threads, config.strict));
    const auto weights = config.effective_weights();

    TrainResult result;
    result.model.config = config.net;
    result.model.params = init_params<float>(config.net, derive_seed(config.seed, kInitStream));
    result.adam = nn::AdamState::for_params(result.model.params, {config.lr});
    dataset::ImageCache cache(manifest.root);
    Rng data_rng(derive_seed(config.seed, kDataStream));

    // Fixed validation batches, drawn once.
    std::vector<Batch<float>> val;
    if (config.val_every > 0 && manifest.split_sources("val").size() >= 3) {
        Rng val_rng(derive_seed(config.seed, kValStream));
        for (int i = 0; i < config.val_batches; ++i) {
            val.push_back(dataset::sample_patch_batch(manifest, cache, config.batch, config.patch, val_rng, "val").batch);
        }
    }
    auto validate = [&](int step) {
        LossBreakdown acc;
        double psnr_sum = 0.0, identity_sum = 0.0;
        for (const auto& b : val) {
            const auto out = forward_train(config.net, result.model.params, b, weights);
            acc.mse += out.loss.mse;
            acc.perceptual += out.loss.perceptual;
            acc.preset_l1 += out.loss.preset_l1;
            acc.ppl += out.loss.ppl;
            acc.total += out.loss.total;
            psnr_sum += mean_psnr(b, out.y_hat);
            identity_sum += mean_psnr(b, b.x);
        }
        const double n = static_cast<double>(val.size());
        json r = {{"kind", "val"},
                  {"step", step},
                  {"mse", acc.mse / n},
                  {"perceptual", acc.perceptual / n},
                  {"preset_l1", acc.preset_l1 / n},
                  {"ppl", acc.ppl / n},
                  {"total", acc.total / n},
                  {"psnr", psnr_sum / n},
                  {"psnr_identity", identity_sum / n}};
        result.log.push_back(r);
        if (progress) progress(r);
    };

    std::optional<Batch<float>> fixed;
    const auto t0 = std::chrono::steady_clock::now();
    for (int step = 0; step < config.steps; ++step) {
        if (!val.empty() && step % config.val_every == 0) validate(step);
        Batch<float> batch;
        if (config.fixed_batch) {
            if (!fixed) fixed = dataset::sample_patch_batch(manifest, cache, config.batch, config.patch, data_rng).batch;
            batch = *fixed;
        } else {
            batch = dataset::sample_patch_batch(manifest, cache, config.batch, config.patch, data_rng).batch;
        }
        auto grads = result.model.params.zeros_like();
        const auto out = forward_train(config.net, result.model.params, batch, weights, &grads);
        nn::adam_step(result.model.params, grads, result.adam);
        result.steps.push_back(out.loss);
        result.log.push_back(step_record(step, out.loss));
        if (progress && config.progress_every > 0 && (step % config.progress_every == 0 || step + 1 == config.steps)) {
            json r = step_record(step, out.loss);
            r["kind"] = "progress";
            r["elapsed_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            progress(r);
        }
    }
    if (!val.empty()) validate(config.steps);

    if (!config.log.empty()) {
        std::string text;
        for (const auto& r : result.log) text += r.dump() + "\n";
        write_file_atomic(config.log, text);
    }
    if (!config.checkpoint.empty()) {
        json meta = {{"train", to_json(config)}};
        nn::save_checkpoint(make_checkpoint(result.model, result.adam, meta), config.checkpoint);
    }
    return result;
}

TrainResult train(const TrainConfig& config, const ProgressSink& progress) {
    if (config.manifest.empty()) throw Error(Errc::InvalidParameter, "train config has no manifest");
    return train(config, dataset::load_manifest(config.manifest), progress);
}

}  // namespace presetforge::net
