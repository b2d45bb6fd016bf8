#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "presetforge/net/deep_preset.hpp"
#include "presetforge/nn/gradcheck.hpp"
#include "presetforge/nn/ops.hpp"
#include "presetforge/rng.hpp"

using namespace presetforge;
using namespace presetforge::net;
using nn::ModelParamsD;
using nn::Shape;
using nn::TensorD;

namespace {

NetConfig micro() { return {2, 3, 4, 69}; }

TensorD rand_images(std::size_t n, std::size_t hw, std::uint64_t seed) {
    TensorD t({n, 3, hw, hw});
    Rng rng(seed);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(0.05, 0.95);
    return t;
}

Batch<double> micro_batch(std::size_t n, std::size_t hw, std::uint64_t seed) {
    Batch<double> b;
    b.x = rand_images(n, hw, seed);
    b.z = rand_images(n, hw, seed + 1);
    b.z_prime = rand_images(n, hw, seed + 2);
    b.y = rand_images(n, hw, seed + 3);
    b.p = TensorD({n, 69});
    Rng rng(seed + 4);
    for (std::size_t i = 0; i < b.p.size(); ++i) b.p[i] = rng.uniform(-0.9, 0.9);
    return b;
}

}  // namespace

TEST(NetConfig, Validation) {
    NetConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.spatial_multiple(), 16);
    c.preset_dim = 68;
    EXPECT_THROW(c.validate(), Error);
    c = {};
    c.embed_dim = 0;
    EXPECT_THROW(c.validate(), Error);
    EXPECT_EQ(net_config_from_json(to_json(NetConfig{})), NetConfig{});
}

TEST(Net, EncoderShapeContract) {
    NetConfig cfg;  // C0 = 16, depth 4
    const auto params = init_params<float>(cfg, 1);
    nn::Tensor x({1, 3, 32, 32}, 0.5f), z({1, 3, 32, 32}, 0.25f);
    const auto t = encode_T(cfg, params, x, z);
    ASSERT_EQ(t.pyramid.size(), 4u);
    const std::size_t sizes[] = {32, 16, 8, 4}, widths[] = {16, 32, 64, 128};
    for (std::size_t s = 0; s < 4; ++s) {
        EXPECT_EQ(t.pyramid[s].shape(), (Shape{1, widths[s], sizes[s], sizes[s]}));
    }
    EXPECT_EQ(t.final_map.shape(), (Shape{1, 128, 2, 2}));
    const auto c = encode_C(cfg, params, x);
    EXPECT_EQ(c.pyramid[2].shape(), t.pyramid[2].shape());
    EXPECT_EQ(encode_T(cfg, params, x, z).final_map, t.final_map);

    nn::Tensor bad({1, 3, 24, 32});
    EXPECT_THROW(encode_C(cfg, params, bad), Error);
}

TEST(Net, EncoderNamesAreDisjoint) {
    std::set<std::string> t, c;
    for (const auto& [name, _] : parameter_layout(NetConfig{})) {
        if (name[0] == 'T') t.insert(name.substr(1));
        if (name[0] == 'C') c.insert(name.substr(1));
    }
    EXPECT_EQ(t.size(), c.size());  // mirrored topology
    const auto params = init_params<float>(NetConfig{}, 1);
    EXPECT_NE(params["T.s1.conv1.w"], params["C.s1.conv1.w"]);
}

TEST(Net, ZeroInputStaysFinite) {
    NetConfig cfg;
    const auto params = init_params<float>(cfg, 2);
    nn::Tensor x({1, 3, 16, 16});
    const auto c = encode_C(cfg, params, x);
    for (float v : c.final_map.vec()) EXPECT_TRUE(std::isfinite(v));
}

TEST(Net, HeadAndDecoderRanges) {
    NetConfig cfg;
    cfg.base_width = 4;
    const auto params = init_params<float>(cfg, 3);
    nn::Tensor x({2, 3, 32, 32}), z({2, 3, 32, 32});
    Rng rng(4);
    for (auto& v : x.vec()) v = static_cast<float>(rng.uniform());
    for (auto& v : z.vec()) v = static_cast<float>(rng.uniform());
    const auto t = encode_T(cfg, params, x, z);
    const auto h = head_L(cfg, params, t.final_map);
    EXPECT_EQ(h.embedding.shape(), (Shape{2, 64}));
    EXPECT_EQ(h.preset.shape(), (Shape{2, 69}));
    for (float v : h.preset.vec()) EXPECT_TRUE(v > -1.0f && v < 1.0f);
    const auto y = decode_G(cfg, params, t, encode_C(cfg, params, x));
    EXPECT_EQ(y.shape(), x.shape());
    for (float v : y.vec()) EXPECT_TRUE(v > 0.0f && v < 1.0f);
}

TEST(Net, CheckParams) {
    NetConfig cfg{2, 3, 4, 69};
    auto params = init_params<float>(cfg, 1);
    EXPECT_NO_THROW(check_params(cfg, params));
    NetConfig other = cfg;
    other.embed_dim = 8;
    try {
        check_params(other, params);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::CheckpointMismatch);
    }
    params.tensors.erase("G.out.b");
    EXPECT_THROW(check_params(cfg, params), Error);
}

TEST(Net, InitIsSeeded) {
    EXPECT_EQ(init_params<float>(micro(), 5), init_params<float>(micro(), 5));
    EXPECT_NE(init_params<float>(micro(), 5), init_params<float>(micro(), 6));
}

TEST(Loss, ZeroWhenEverythingMatches) {
    const auto b = micro_batch(2, 8, 1);
    TensorD f({2, 4}, 0.3);
    const auto l = loss_total(b.y, b.y, b.p, b.p, f, f, LossWeights{});
    EXPECT_EQ(l.mse, 0.0);
    EXPECT_EQ(l.perceptual, 0.0);
    EXPECT_EQ(l.preset_l1, 0.0);
    EXPECT_EQ(l.ppl, 0.0);
    EXPECT_EQ(l.total, 0.0);
}

TEST(Loss, UniformOffsetMse) {
    const auto b = micro_batch(2, 8, 2);
    auto y = b.y;
    for (auto& v : y.vec()) v += 0.1;
    TensorD f({2, 4});
    const auto l = loss_total(y, b.y, b.p, b.p, f, f, LossWeights{1, 0, 0, 0});
    EXPECT_NEAR(l.total, 0.01, 1e-12);
}

TEST(Loss, L1TermsAreBatchMeansOfPerSampleNorms) {
    const auto b = micro_batch(2, 8, 5);
    auto ph = b.p;
    for (auto& v : ph.vec()) v += 0.1;
    TensorD f1({2, 4}, 0.0), f2({2, 4}, 0.0);
    for (std::size_t j = 0; j < 4; ++j) f2.vec()[j] = 0.5;  // sample 0 only
    const auto l = loss_total(b.y, b.y, ph, b.p, f1, f2, LossWeights{});
    EXPECT_NEAR(l.preset_l1, 69 * 0.1, 1e-12);
    EXPECT_NEAR(l.ppl, (4 * 0.5 + 0.0) / 2, 1e-12);
}

TEST(Loss, Recomposition) {
    const auto b = micro_batch(3, 16, 3);
    TensorD f1({3, 4}), f2({3, 4}), ph({3, 69});
    Rng rng(9);
    for (auto* t : {&f1, &f2, &ph})
        for (auto& v : t->vec()) v = rng.uniform(-0.9, 0.9);
    const auto l = loss_total(b.x, b.y, ph, b.p, f1, f2, LossWeights{});
    EXPECT_GT(l.mse, 0);
    EXPECT_GT(l.perceptual, 0);
    EXPECT_GT(l.preset_l1, 0);
    EXPECT_GT(l.ppl, 0);
    EXPECT_NEAR(l.total, 1.0 * l.mse + 0.5 * l.perceptual + 0.01 * l.preset_l1 + 1.0 * l.ppl, 1e-12);
}

TEST(Loss, ShapeMismatch) {
    const auto b = micro_batch(2, 8, 4);
    TensorD f({2, 4}), g({2, 5});
    EXPECT_THROW(loss_total(b.x, b.y, b.p, b.p, f, g, LossWeights{}), Error);
}

TEST(ForwardTrain, NoPplMatchesSinglePass) {
    const auto cfg = micro();
    const auto params = init_params<double>(cfg, 7);
    const auto b = micro_batch(2, 8, 5);
    LossWeights w;
    w.ppl = 0.0;
    const auto with = forward_train(cfg, params, b, w, nullptr, true);
    const auto without = forward_train(cfg, params, b, w, nullptr, false);
    EXPECT_EQ(with.loss.total, without.loss.total);
    EXPECT_EQ(with.y_hat, without.y_hat);
    EXPECT_GT(with.loss.ppl, 0.0);  // reported, weighted by zero
    EXPECT_EQ(without.loss.ppl, 0.0);

    auto g1 = params.zeros_like(), g2 = params.zeros_like();
    forward_train(cfg, params, b, w, &g1, true);
    forward_train(cfg, params, b, w, &g2, false);
    EXPECT_EQ(g1, g2);
}

TEST(ForwardTrain, IdenticalTripletsGiveIdenticalPerSampleLosses) {
    const auto cfg = micro();
    const auto params = init_params<double>(cfg, 8);
    const auto one = micro_batch(1, 8, 6);
    Batch<double> b;
    auto twice = [](const TensorD& t) {
        auto s = t.shape();
        s[0] = 2;
        std::vector<double> v = t.vec();
        v.insert(v.end(), t.vec().begin(), t.vec().end());
        return TensorD(s, v);
    };
    b.x = twice(one.x);
    b.z = twice(one.z);
    b.z_prime = twice(one.z_prime);
    b.y = twice(one.y);
    b.p = twice(one.p);
    const auto out = forward_train(cfg, params, b, LossWeights{});
    ASSERT_EQ(out.per_sample.size(), 2u);
    EXPECT_EQ(out.per_sample[0].total, out.per_sample[1].total);
    EXPECT_NEAR(out.per_sample[0].total, out.loss.total, 1e-12);
}

TEST(ForwardTrain, Deterministic) {
    const auto cfg = micro();
    const auto params = init_params<double>(cfg, 9);
    const auto b = micro_batch(2, 8, 7);
    auto g1 = params.zeros_like(), g2 = params.zeros_like();
    const auto a = forward_train(cfg, params, b, LossWeights{}, &g1);
    const auto c = forward_train(cfg, params, b, LossWeights{}, &g2);
    EXPECT_EQ(a.y_hat, c.y_hat);
    EXPECT_EQ(a.loss.total, c.loss.total);
    EXPECT_EQ(g1, g2);
}

TEST(ForwardTrain, MicroGradCheck) {
    const auto cfg = micro();
    const auto params = init_params<double>(cfg, 11);
    const auto b = micro_batch(2, 8, 8);
    auto loss = [&](const ModelParamsD& p, ModelParamsD* g) {
        return forward_train(cfg, p, b, LossWeights{}, g).loss.total;
    };
    const auto r = nn::grad_check(loss, params, 20, 3);
    EXPECT_GE(r.probes, 20u);
    EXPECT_LE(r.max_rel_error, 1e-3) << r.worst.name << "[" << r.worst.index << "] analytic " << r.worst_analytic
                                     << " numeric " << r.worst_numeric;
}
