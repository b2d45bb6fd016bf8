#include "presetforge/cli/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>

#include "presetforge/color_engine.hpp"
#include "presetforge/dataset.hpp"
#include "presetforge/fileutil.hpp"
#include "presetforge/image_io.hpp"
#include "presetforge/lut.hpp"
#include "presetforge/metrics.hpp"
#include "presetforge/net/experiment.hpp"
#include "presetforge/net/inference.hpp"
#include "presetforge/net/train.hpp"
#include "presetforge/synth.hpp"
#include "presetforge/threads.hpp"

#ifndef PRESETFORGE_DATA_DIR
#define PRESETFORGE_DATA_DIR ""
#endif

namespace presetforge::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void log(const std::string& cmd, const std::string& event, json fields = json::object()) {
    fields["cmd"] = cmd;
    fields["event"] = event;
    std::cerr << fields.dump() << std::endl;
}

int exit_code_for(Errc code) {
    switch (code) {
        case Errc::InvalidParameter:
            return kUsage;
        case Errc::IoError:
            return kRuntimeError;
        default:
            return kDataError;
    }
}

Preset read_preset(const fs::path& path) { return parse_preset_text(read_file_text(path)); }

struct Globals {
    std::optional<int> threads;
    bool strict = false;
};

// Flags shared by every subcommand.
void add_globals(CLI::App* app, Globals& g) {
    app->add_option("--threads", g.threads, "Worker threads (default: PRESETFORGE_THREADS, then all cores)")
        ->check(CLI::PositiveNumber);
    app->add_flag("--strict", g.strict, "Single-threaded, fixed summation order");
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Preset color-style toolkit: engine, dataset synthesis, Deep Preset training and inference", "preset"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every subcommand");
    Globals g;

    // random
    auto* random = app.add_subcommand("random", "Sample a random preset document");
    std::uint64_t random_seed = 0;
    PresetSampling sampling;
    std::string random_out;
    random->add_option("--seed", random_seed, "Seed")->required();
    random->add_option("--sparsity", sampling.sparsity, "Probability a setting is active");
    random->add_option("--sigma", sampling.sigma, "Std-dev of active settings");
    random->add_option("--out", random_out, "Output JSON (default: stdout)");

    // apply
    auto* apply = app.add_subcommand("apply", "Apply a preset to an image");
    std::string apply_image, apply_preset_path, apply_out;
    bool apply_via_lut = false;
    int apply_lut_size = kDefaultLutSize;
    apply->add_option("--image", apply_image, "Input PNG/JPEG")->required();
    apply->add_option("--preset", apply_preset_path, "Preset JSON")->required();
    apply->add_option("--out", apply_out, "Output image (.png, .jpg)")->required();
    apply->add_flag("--via-lut", apply_via_lut, "Bake a LUT and apply it instead of the direct engine");
    apply->add_option("--lut-size", apply_lut_size, "LUT lattice size for --via-lut")->check(CLI::Range(2, 256));

    // bake-lut
    auto* bake = app.add_subcommand("bake-lut", "Bake a preset into a .cube 3D LUT");
    std::string bake_preset, bake_out, bake_title;
    int bake_size = kDefaultLutSize;
    bake->add_option("--preset", bake_preset, "Preset JSON")->required();
    bake->add_option("--out", bake_out, "Output .cube")->required();
    bake->add_option("--size", bake_size, "Lattice size")->check(CLI::Range(2, 256));
    bake->add_option("--title", bake_title, "TITLE line");

    // gen-dataset
    auto* gen = app.add_subcommand("gen-dataset", "Synthesize (natural, retouched) images and a manifest");
    dataset::GenerateOptions gen_opts;
    std::string gen_images, gen_out;
    gen->add_option("--images", gen_images, "Source image directory")->required();
    gen->add_option("--n-presets", gen_opts.n_presets, "Number of random presets")->required();
    gen->add_option("--seed", gen_opts.seed, "Seed")->required();
    gen->add_option("--out", gen_out, "Output directory")->required();
    gen->add_flag("--jpeg", gen_opts.jpeg, "Store JPEG instead of PNG");
    gen->add_option("--sparsity", gen_opts.sampling.sparsity, "Preset sparsity");
    gen->add_option("--sigma", gen_opts.sampling.sigma, "Preset sigma");

    // eval
    auto* eval = app.add_subcommand("eval", "Compare two images (PSNR, H-Corr, H-CHI, perceptual proxy)");
    std::string eval_a, eval_b;
    bool eval_512 = false;
    eval->add_option("--a", eval_a, "Reference image")->required();
    eval->add_option("--b", eval_b, "Test image")->required();
    eval->add_flag("--resize512", eval_512, "Resize both to 512x512 first");

    // train
    auto* tr = app.add_subcommand("train", "Train Deep Preset from a JSON config");
    std::string train_config;
    bool train_no_ppl = false;
    std::optional<int> train_steps;
    std::optional<std::uint64_t> train_seed;
    tr->add_option("--config", train_config, "Training config JSON")->required();
    tr->add_flag("--no-ppl", train_no_ppl, "Zero the positive pair-wise loss weight");
    tr->add_option("--steps", train_steps, "Override step count");
    tr->add_option("--seed", train_seed, "Override seed");

    // stylize
    auto* sty = app.add_subcommand("stylize", "Transfer the color style of a reference to a content image");
    std::string sty_content, sty_reference, sty_ckpt, sty_out, sty_emit;
    sty->add_option("--content", sty_content, "Content image")->required();
    sty->add_option("--reference", sty_reference, "Reference image")->required();
    sty->add_option("--ckpt", sty_ckpt, "Checkpoint")->required();
    sty->add_option("--out", sty_out, "Output image")->required();
    sty->add_option("--emit-preset", sty_emit, "Write the predicted preset JSON");

    // pick-ref
    auto* pick = app.add_subcommand("pick-ref", "Pick the perceptually closest reference");
    std::string pick_content, pick_refs;
    pick->add_option("--content", pick_content, "Content image")->required();
    pick->add_option("--refs", pick_refs, "Directory of candidate references")->required();

    // synth-sources
    auto* syn = app.add_subcommand("synth-sources", "Write procedural source images");
    std::string syn_out;
    int syn_count = 40, syn_w = 192, syn_h = 128;
    std::uint64_t syn_seed = 0;
    syn->add_option("--out", syn_out, "Output directory")->required();
    syn->add_option("--count", syn_count, "Number of images")->check(CLI::PositiveNumber);
    syn->add_option("--seed", syn_seed, "Seed")->required();
    syn->add_option("--width", syn_w, "Width")->check(CLI::PositiveNumber);
    syn->add_option("--height", syn_h, "Height")->check(CLI::PositiveNumber);

    // demo
    auto* demo = app.add_subcommand("demo", "Dataset, PPL / no-PPL training, held-out report");
    std::string demo_dir, demo_config, demo_images;
    std::uint64_t demo_seed = 1;
    std::optional<int> demo_steps;
    demo->add_option("--workdir", demo_dir, "Working directory")->required();
    demo->add_option("--seed", demo_seed, "Seed");
    demo->add_option("--config", demo_config, "Training config JSON (default: built-in toy config)");
    demo->add_option("--images", demo_images, "Bundled images to include (default: data/samples)");
    demo->add_option("--steps", demo_steps, "Override step count");

    for (auto* sub : app.get_subcommands({})) add_globals(sub, g);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\nRun with --help for usage." << std::endl;
        return kUsage;
    }

    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        set_thread_count(resolve_thread_count(g.threads, g.strict));

        if (*random) {
            Preset p = sample_random_preset(random_seed, sampling);
            p.id = "random-" + std::to_string(random_seed);
            const auto text = serialize_preset_text(p);
            if (random_out.empty()) {
                std::cout << text;
            } else {
                write_file_atomic(random_out, text);
                log(cmd, "wrote", {{"path", random_out}});
            }
        } else if (*apply) {
            const auto img = load_image(apply_image);
            const auto preset = read_preset(apply_preset_path);
            const auto out = apply_via_lut ? apply_lut(img, bake_lut(preset, apply_lut_size)) : apply_preset(img, preset);
            save_image(out, apply_out);
            log(cmd, "wrote", {{"path", apply_out}, {"width", out.width()}, {"height", out.height()}});
        } else if (*bake) {
            const auto lut = bake_lut(read_preset(bake_preset), bake_size);
            write_file_atomic(bake_out, export_cube(lut, bake_title));
            log(cmd, "wrote", {{"path", bake_out}, {"size", bake_size}});
        } else if (*gen) {
            gen_opts.images_dir = gen_images;
            gen_opts.out_dir = gen_out;
            const auto m = dataset::generate_dataset(gen_opts);
            log(cmd, "wrote", {{"manifest", (fs::path(gen_out) / "manifest.json").string()},
                               {"sources", m.sources.size()},
                               {"presets", m.presets.size()},
                               {"images", m.sources.size() + m.images.size()}});
        } else if (*eval) {
            const auto r = evaluate_pair(load_image(eval_a), load_image(eval_b), eval_512);
            std::cout << to_json(r).dump(2) << std::endl;
        } else if (*tr) {
            auto cfg = net::load_train_config(train_config);
            if (train_no_ppl) cfg.no_ppl = true;
            if (g.strict) cfg.strict = true;
            if (g.threads) cfg.threads = g.threads;
            if (train_steps) cfg.steps = *train_steps;
            if (train_seed) cfg.seed = *train_seed;
            const auto result = net::train(cfg, [&](const json& r) { log(cmd, r.value("kind", "record"), r); });
            json done = {{"steps", result.steps.size()}, {"checkpoint", cfg.checkpoint.string()}, {"log", cfg.log.string()}};
            if (!result.steps.empty()) done["final"] = net::to_json(result.steps.back());
            log(cmd, "done", done);
        } else if (*sty) {
            const auto model = net::load_model(sty_ckpt);
            const auto r = net::stylize(model, load_image(sty_content), load_image(sty_reference));
            save_image(r.image, sty_out);
            if (!sty_emit.empty()) write_file_atomic(sty_emit, serialize_preset_text(r.preset));
            log(cmd, "wrote", {{"path", sty_out}, {"preset", sty_emit}});
        } else if (*pick) {
            const auto files = dataset::list_images(pick_refs);
            std::vector<ImageBuffer> candidates;
            for (const auto& f : files) candidates.push_back(load_image(f));
            const auto r = net::pick_reference(load_image(pick_content), candidates);
            json table = json::array();
            for (std::size_t i = 0; i < files.size(); ++i) {
                table.push_back({{"index", i}, {"file", files[i].filename().string()}, {"distance", r.distances[i]}});
            }
            std::cout << json{{"index", r.index}, {"file", files[r.index].filename().string()}, {"candidates", table}}.dump(2)
                      << std::endl;
        } else if (*syn) {
            const auto paths = write_synth_sources(syn_out, syn_count, syn_seed, syn_w, syn_h);
            log(cmd, "wrote", {{"dir", syn_out}, {"count", paths.size()}});
        } else if (*demo) {
            net::ToyOptions opts;
            opts.workdir = demo_dir;
            opts.seed = demo_seed;
            opts.train = demo_config.empty() ? net::toy_train_config() : net::load_train_config(demo_config);
            if (demo_steps) opts.train.steps = *demo_steps;
            if (g.strict) opts.train.strict = true;
            if (g.threads) opts.train.threads = g.threads;
            if (!demo_images.empty()) {
                opts.bundled_images = demo_images;
            } else if (fs::path bundled = fs::path(PRESETFORGE_DATA_DIR) / "samples"; fs::is_directory(bundled)) {
                opts.bundled_images = bundled;
            }
            const auto report = net::run_toy_experiment(opts, [&](const json& r) { log(cmd, r.value("kind", "record"), r); });
            std::cout << report.dump(2) << std::endl;
        }
    } catch (const Error& e) {
        log(cmd, "error", {{"code", std::string(errc_name(e.code()))}, {"message", e.what()}});
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        log(cmd, "error", {{"code", "runtime"}, {"message", e.what()}});
        return kRuntimeError;
    }
    return kOk;
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("preset");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace presetforge::cli
