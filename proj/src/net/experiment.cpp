#include "presetforge/net/experiment.hpp"

#include <chrono>
#include <cmath>

#include "presetforge/color_engine.hpp"
#include "presetforge/fileutil.hpp"
#include "presetforge/image_io.hpp"
#include "presetforge/metrics.hpp"
#include "presetforge/resize.hpp"
#include "presetforge/synth.hpp"
#include "presetforge/tensor_image.hpp"

namespace presetforge::net {

namespace fs = std::filesystem;
using nlohmann::json;

json to_json(const HeldOutReport& r) {
    return {{"pairs", r.pairs},
            {"psnr_model", r.psnr_model},
            {"psnr_identity", r.psnr_identity},
            {"positive_distance", r.positive_distance},
            {"mismatch_distance", r.mismatch_distance},
            {"distance_ratio", r.distance_ratio},
            {"hcorr_predicted_preset", r.hcorr_predicted_preset},
            {"hcorr_content", r.hcorr_content}};
}

TrainConfig toy_train_config() {
    TrainConfig c;
    c.net = NetConfig{};
    c.steps = 3000;
    c.batch = 4;
    c.patch = 32;
    c.lr = 3e-4;
    c.val_every = 500;
    c.val_batches = 4;
    return c;
}

std::vector<float> embedding_for(const Model& model, const ImageBuffer& content, const ImageBuffer& reference) {
    const int m = model.config.spatial_multiple();
    const int w = (content.width() + m - 1) / m * m, h = (content.height() + m - 1) / m * m;
    const auto x = image_to_tensor(reflect_pad(content, w, h));
    const auto z = image_to_tensor(resize_exact(reference, w, h));
    return embed(model, x, z).embedding.vec();
}

namespace {

double mean_abs_diff(const std::vector<float>& a, const std::vector<float>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(static_cast<double>(a[i]) - b[i]);
    return acc / static_cast<double>(a.size());
}

}  // namespace

HeldOutReport evaluate_held_out(const Model& model, const dataset::DatasetManifest& manifest, std::size_t max_pairs) {
    dataset::ImageCache cache(manifest.root);
    HeldOutReport r;
    if (manifest.presets.size() < 2) throw Error(Errc::InvalidParameter, "need at least 2 presets for mismatch pairs");
    for (const auto& t : manifest.samples) {
        if (manifest.source(t.content).split != "val") continue;
        if (max_pairs > 0 && r.pairs >= max_pairs) break;
        const auto x = dataset::load_natural(manifest, cache, t.content);
        const auto y = dataset::load_retouched(manifest, cache, t.content, t.preset);
        const auto z = dataset::load_retouched(manifest, cache, t.reference, t.preset);
        const auto zp = dataset::load_retouched(manifest, cache, t.positive, t.preset);
        // The next preset in manifest order supplies the mismatched reference.
        std::size_t pi = 0;
        while (manifest.presets[pi].id != t.preset) ++pi;
        const auto& other = manifest.presets[(pi + 1) % manifest.presets.size()].id;
        const auto zq = dataset::load_retouched(manifest, cache, t.positive, other);

        const auto s = stylize(model, x, z);
        r.psnr_model += psnr(s.image, y);
        r.psnr_identity += psnr(x, y);
        r.positive_distance += mean_abs_diff(s.embedding, embedding_for(model, x, zp));
        r.mismatch_distance += mean_abs_diff(s.embedding, embedding_for(model, x, zq));
        r.hcorr_predicted_preset += hist_correlation(apply_preset(x, s.preset), s.image);
        r.hcorr_content += hist_correlation(x, s.image);
        ++r.pairs;
    }
    if (r.pairs == 0) throw Error(Errc::InsufficientSources, "no held-out samples in the manifest");
    const double n = static_cast<double>(r.pairs);
    r.psnr_model /= n;
    r.psnr_identity /= n;
    r.positive_distance /= n;
    r.mismatch_distance /= n;
    r.hcorr_predicted_preset /= n;
    r.hcorr_content /= n;
    r.distance_ratio = r.mismatch_distance > 0 ? r.positive_distance / r.mismatch_distance : 0.0;
    return r;
}

json run_toy_experiment(const ToyOptions& opts, const ProgressSink& progress) {
    const auto t0 = std::chrono::steady_clock::now();
    auto note = [&](json r) {
        if (progress) progress(std::move(r));
    };
    const fs::path sources = opts.workdir / "sources";
    fs::create_directories(sources);
    int have = 0;
    if (!opts.bundled_images.empty()) {
        for (const auto& p : dataset::list_images(opts.bundled_images)) {
            fs::copy_file(p, sources / p.filename(), fs::copy_options::overwrite_existing);
            ++have;
        }
    }
    if (have < opts.total_sources) {
        write_synth_sources(sources, opts.total_sources - have, derive_seed(opts.seed, 0x51), opts.synth_width,
                            opts.synth_height);
    }
    dataset::GenerateOptions gen;
    gen.images_dir = sources;
    gen.out_dir = opts.workdir / "dataset";
    gen.n_presets = opts.n_presets;
    gen.seed = opts.seed;
    const auto manifest = dataset::generate_dataset(gen);
    note({{"kind", "dataset"},
          {"sources", manifest.sources.size()},
          {"images", manifest.sources.size() + manifest.images.size()}});

    json report = {{"seed", opts.seed}, {"sources", manifest.sources.size()}, {"presets", manifest.presets.size()}};
    json runs = json::object();
    for (const bool no_ppl : {false, true}) {
        const std::string name = no_ppl ? "no_ppl" : "ppl";
        TrainConfig cfg = opts.train;
        cfg.seed = opts.seed;
        cfg.no_ppl = no_ppl;
        cfg.manifest = gen.out_dir / "manifest.json";
        cfg.checkpoint = opts.workdir / (name + ".ckpt");
        cfg.log = opts.workdir / (name + "_train.jsonl");
        const auto t_run = std::chrono::steady_clock::now();
        auto result = train(cfg, manifest, [&](json r) {
            r["run"] = name;
            note(std::move(r));
        });
        const double train_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_run).count();
        const auto held = evaluate_held_out(result.model, manifest, opts.eval_pairs);
        const auto& steps = result.steps;
        const std::size_t tenth = std::max<std::size_t>(1, steps.size() / 10);
        auto median_total = [&](std::size_t begin, std::size_t end) {
            std::vector<double> v;
            for (std::size_t i = begin; i < end; ++i) v.push_back(steps[i].total);
            std::nth_element(v.begin(), v.begin() + static_cast<long>(v.size() / 2), v.end());
            return v[v.size() / 2];
        };
        json run = to_json(held);
        run["train_seconds"] = train_s;
        run["steps"] = steps.size();
        if (!steps.empty()) {
            run["median_total_first_10pct"] = median_total(0, tenth);
            run["median_total_last_10pct"] = median_total(steps.size() - tenth, steps.size());
        }
        runs[name] = run;
        note({{"kind", "evaluated"}, {"run", name}, {"report", run}});
    }
    report["runs"] = runs;
    report["ppl_ratio_lower_than_no_ppl"] =
        runs["ppl"]["distance_ratio"].get<double>() < runs["no_ppl"]["distance_ratio"].get<double>();
    report["total_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_file_atomic(opts.workdir / "report.json", report.dump(2) + "\n");
    return report;
}

}  // namespace presetforge::net
