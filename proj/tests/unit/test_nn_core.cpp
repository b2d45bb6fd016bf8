#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "presetforge/fileutil.hpp"
#include "presetforge/nn/adam.hpp"
#include "presetforge/nn/checkpoint.hpp"
#include "presetforge/nn/gradcheck.hpp"
#include "presetforge/threads.hpp"
#include "test_util.hpp"

using namespace presetforge;
using namespace presetforge::nn;

TEST(Adam, ZeroGradientLeavesParameters) {
    ModelParams p;
    p.tensors.emplace("a", Tensor({3}, std::vector<float>{1, -2, 3}));
    const auto before = p;
    auto state = AdamState::for_params(p, {0.1});
    const auto g = p.zeros_like();
    for (int i = 0; i < 5; ++i) adam_step(p, g, state);
    EXPECT_EQ(p, before);
    EXPECT_EQ(state.step, 5u);
}

TEST(Adam, FirstStepMovesByLearningRate) {
    // t = 1: m = 0.1, v = 0.001, m_hat = 1, v_hat = 1, update = lr / (1 + eps).
    ModelParamsD p;
    p.tensors.emplace("p", TensorD({1}, 0.0));
    auto g = p.zeros_like();
    g["p"][0] = 1.0;
    auto state = BasicAdamState<double>::for_params(p, {0.1});
    adam_step(p, g, state);
    EXPECT_NEAR(p["p"][0], -0.1 / (1.0 + 1e-8), 1e-15);
}

TEST(Adam, MinimizesQuadratic) {
    ModelParamsD p;
    p.tensors.emplace("p", TensorD({1}, 0.0));
    auto state = BasicAdamState<double>::for_params(p, {0.1});
    for (int i = 0; i < 500; ++i) {
        auto g = p.zeros_like();
        g["p"][0] = 2.0 * (p["p"][0] - 3.0);
        adam_step(p, g, state);
    }
    EXPECT_LT(std::abs(p["p"][0] - 3.0), 1e-2);
}

TEST(Adam, ShapeMismatch) {
    ModelParams p, g;
    p.tensors.emplace("a", Tensor({3}));
    g.tensors.emplace("a", Tensor({4}));
    AdamState s;
    EXPECT_THROW(adam_step(p, g, s), Error);
}

TEST(GradCheck, QuadraticToy) {
    // f = sum_i c_i * p_i^2 + p_0 * p_1
    ModelParamsD p;
    p.tensors.emplace("p", TensorD({25}));
    for (std::size_t i = 0; i < 25; ++i) p["p"][i] = 0.3 + 0.02 * static_cast<double>(i);
    auto loss = [](const ModelParamsD& q, ModelParamsD* g) {
        const auto& v = q["p"];
        double f = v[0] * v[1];
        for (std::size_t i = 0; i < v.size(); ++i) f += static_cast<double>(i + 1) * v[i] * v[i];
        if (g) {
            auto& d = (*g)["p"];
            for (std::size_t i = 0; i < v.size(); ++i) d[i] = 2.0 * static_cast<double>(i + 1) * v[i];
            d[0] += v[1];
            d[1] += v[0];
        }
        return f;
    };
    const auto r = grad_check(loss, p, 25);
    EXPECT_EQ(r.probes, 25u);
    EXPECT_LE(r.max_rel_error, 1e-7);
}

TEST(GradCheck, EmptyProbeListIsZero) {
    ModelParamsD p;
    p.tensors.emplace("p", TensorD({2}, 1.0));
    int calls = 0;
    auto loss = [&](const ModelParamsD&, ModelParamsD*) {
        ++calls;
        return 1.0;
    };
    const auto r = grad_check(loss, p, std::vector<Probe>{});
    EXPECT_EQ(r.max_rel_error, 0.0);
    EXPECT_EQ(r.probes, 0u);
    EXPECT_EQ(calls, 0);
}

TEST(GradCheck, DetectsWrongGradient) {
    ModelParamsD p;
    p.tensors.emplace("p", TensorD({3}, 1.0));
    auto loss = [](const ModelParamsD& q, ModelParamsD* g) {
        if (g) (*g)["p"].fill(1.0);  // true gradient is 2
        return q["p"][0] * q["p"][0] + q["p"][1] * q["p"][1] + q["p"][2] * q["p"][2];
    };
    EXPECT_NEAR(grad_check(loss, p, 3).max_rel_error, 0.5, 1e-6);
}

TEST(GradCheck, RelativeErrorFloor) {
    EXPECT_DOUBLE_EQ(relative_error(0.0, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(relative_error(1e-9, 0.0), 1e-9 / 1e-8);
    EXPECT_DOUBLE_EQ(relative_error(2.0, 1.0), 0.5);
}

namespace {

Checkpoint sample_checkpoint(bool with_adam) {
    Checkpoint c;
    Tensor a({2, 3});
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::nextafter(static_cast<float>(i) * 0.37f, 10.0f);
    a[0] = -0.0f;
    a[1] = 1e-40f;  // subnormal
    c.params.tensors.emplace("b.weight", a);
    c.params.tensors.emplace("a.bias", Tensor({1}, 3.25f));
    c.meta = {{"net", {{"base_width", 4}}}};
    if (with_adam) {
        auto s = AdamState::for_params(c.params, {1e-3});
        s.step = 7;
        s.m["b.weight"][2] = 0.5f;
        s.v["a.bias"][0] = 0.125f;
        c.adam = s;
    }
    return c;
}

}  // namespace

TEST(Checkpoint, RoundTripIsBitExact) {
    for (bool adam : {false, true}) {
        const auto c = sample_checkpoint(adam);
        const auto bytes = encode_checkpoint(c);
        const auto back = decode_checkpoint(bytes);
        EXPECT_EQ(back.params, c.params);
        EXPECT_EQ(back.meta, c.meta);
        ASSERT_EQ(back.adam.has_value(), adam);
        if (adam) EXPECT_EQ(*back.adam, *c.adam);
        EXPECT_EQ(encode_checkpoint(back), bytes);
        EXPECT_TRUE(std::signbit(back.params["b.weight"][0]));
    }
}

TEST(Checkpoint, FileRoundTrip) {
    test::TempDir dir;
    const auto path = dir.path() / "sub" / "model.ckpt";
    const auto c = sample_checkpoint(true);
    save_checkpoint(c, path);
    EXPECT_EQ(load_checkpoint(path).params, c.params);
    for (const auto& e : std::filesystem::directory_iterator(path.parent_path())) {
        EXPECT_EQ(e.path().filename(), "model.ckpt");  // no temp files left behind
    }
}

TEST(Checkpoint, Layout) {
    const auto bytes = encode_checkpoint(sample_checkpoint(false));
    ASSERT_GT(bytes.size(), 16u);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 8), "DPRESET1");
    std::uint64_t len = 0;
    for (int i = 0; i < 8; ++i) len |= static_cast<std::uint64_t>(bytes[8 + i]) << (8 * i);
    const auto header = nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<long>(len));
    EXPECT_EQ(header["tensors"][0]["name"], "a.bias");
    EXPECT_EQ(header["tensors"][1]["offset"], 4);
    EXPECT_EQ(header["tensors"][1]["dtype"], "f32");
    EXPECT_EQ(bytes.size(), 16 + len + 4 * 7);
    // 3.25f little-endian
    const std::size_t data = 16 + len;
    EXPECT_EQ(bytes[data + 3], 0x40);
    EXPECT_EQ(bytes[data + 2], 0x50);
}

TEST(Checkpoint, Errors) {
    auto bytes = encode_checkpoint(sample_checkpoint(true));
    auto expect_code = [](std::vector<std::uint8_t> b, Errc code) {
        try {
            decode_checkpoint(b);
            ADD_FAILURE() << "no error";
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), code) << e.what();
        }
    };
    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    expect_code(bad_magic, Errc::BadMagic);
    expect_code({}, Errc::BadMagic);

    auto truncated = bytes;
    truncated.resize(bytes.size() - 3);
    expect_code(truncated, Errc::TruncatedData);
    expect_code(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 12), Errc::TruncatedData);

    auto huge = bytes;
    huge[15] = 0x7f;  // header length far beyond the file
    expect_code(huge, Errc::TruncatedData);

    auto garbled = bytes;
    garbled[16] = '#';
    expect_code(garbled, Errc::CorruptHeader);
}

TEST(Threads, Resolution) {
    EXPECT_EQ(resolve_thread_count(4, true), 1);
    EXPECT_EQ(resolve_thread_count(3, false), 3);
    EXPECT_THROW(resolve_thread_count(0, false), Error);
    ::setenv("PRESETFORGE_THREADS", "2", 1);
    EXPECT_EQ(resolve_thread_count(std::nullopt, false), 2);
    ::setenv("PRESETFORGE_THREADS", "zero", 1);
    EXPECT_THROW(resolve_thread_count(std::nullopt, false), Error);
    ::unsetenv("PRESETFORGE_THREADS");
    EXPECT_GE(resolve_thread_count(std::nullopt, false), 1);
}
