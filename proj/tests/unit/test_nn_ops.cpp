#include <gtest/gtest.h>

#include <cmath>

#include "presetforge/nn/gradcheck.hpp"
#include "presetforge/nn/ops.hpp"
#include "presetforge/rng.hpp"

using namespace presetforge;
using namespace presetforge::nn;

namespace {

TensorD random_tensor(const Shape& s, std::uint64_t seed, double min_abs = 0.0) {
    TensorD t(s);
    Rng rng(seed);
    for (std::size_t i = 0; i < t.size(); ++i) {
        double v = rng.uniform(-1.0, 1.0);
        if (std::abs(v) < min_abs) v = v < 0 ? v - min_abs : v + min_abs;
        t[i] = v;
    }
    return t;
}

// Scalar probe loss: sum(r * y) with fixed random r, so dL/dy = r.
double dot(const TensorD& r, const TensorD& y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) acc += r[i] * y[i];
    return acc;
}

constexpr double kOpTol = 1e-4;

}  // namespace

TEST(Conv2d, CountsOverlapsOfOnesKernel) {
    Tensor x({1, 1, 4, 4}, 1.0f), w({1, 1, 3, 3}, 1.0f), b({1});
    const auto y = conv2d(x, w, b, 1);
    ASSERT_EQ(y.shape(), (Shape{1, 1, 4, 4}));
    EXPECT_FLOAT_EQ(y.at(0, 0, 1, 1), 9.0f);
    EXPECT_FLOAT_EQ(y.at(0, 0, 2, 2), 9.0f);
    EXPECT_FLOAT_EQ(y.at(0, 0, 0, 0), 4.0f);
    EXPECT_FLOAT_EQ(y.at(0, 0, 3, 3), 4.0f);
    EXPECT_FLOAT_EQ(y.at(0, 0, 0, 1), 6.0f);
}

TEST(Conv2d, StrideTwoHalvesWithCeil) {
    Tensor x({1, 1, 32, 32}), w({5, 1, 3, 3}), b({5});
    EXPECT_EQ(conv2d(x, w, b, 2).shape(), (Shape{1, 5, 16, 16}));
    Tensor odd({1, 1, 5, 7});
    EXPECT_EQ(conv2d(odd, w, b, 2).shape(), (Shape{1, 5, 3, 4}));
}

TEST(Conv2d, ShapeErrors) {
    Tensor x({1, 2, 4, 4}), w({1, 3, 3, 3}), b({1});
    try {
        conv2d(x, w, b, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::ShapeMismatch);
    }
    Tensor w2({1, 2, 3, 3});
    EXPECT_THROW(conv2d(x, w2, b, 3), Error);
    Tensor b2({2});
    EXPECT_THROW(conv2d(x, w2, b2, 1), Error);
}

TEST(Conv2d, GradCheck) {
    for (int stride : {1, 2}) {
        ModelParamsD p;
        p.tensors.emplace("x", random_tensor({2, 3, 5, 6}, 1));
        p.tensors.emplace("w", random_tensor({4, 3, 3, 3}, 2));
        p.tensors.emplace("b", random_tensor({4}, 3));
        const auto r = random_tensor(conv2d(p["x"], p["w"], p["b"], stride).shape(), 4);
        auto loss = [&](const ModelParamsD& q, ModelParamsD* g) {
            const auto y = conv2d(q["x"], q["w"], q["b"], stride);
            if (g) {
                TensorD dx;
                conv2d_backward(q["x"], q["w"], stride, r, &dx, (*g)["w"], (*g)["b"]);
                (*g)["x"] = dx;
            }
            return dot(r, y);
        };
        const auto res = grad_check(loss, p, 30);
        EXPECT_LE(res.max_rel_error, kOpTol) << "stride " << stride << " worst " << res.worst.name;
        EXPECT_GE(res.probes, 60u);
    }
}

TEST(Conv2d, BackwardAccumulatesParameterGradients) {
    Tensor x({1, 1, 4, 4}, 1.0f), w({1, 1, 3, 3}, 1.0f), b({1});
    Tensor dy({1, 1, 4, 4}, 1.0f), dw({1, 1, 3, 3}), db({1});
    conv2d_backward<float>(x, w, 1, dy, nullptr, dw, db);
    conv2d_backward<float>(x, w, 1, dy, nullptr, dw, db);
    EXPECT_FLOAT_EQ(db[0], 32.0f);
    EXPECT_FLOAT_EQ(dw[4], 32.0f);  // center tap sees every pixel
    EXPECT_FLOAT_EQ(dw[0], 18.0f);  // corner tap sees a 3x3 window
}

TEST(Activations, Values) {
    Tensor x({3}, std::vector<float>{-1.0f, 0.0f, 2.0f});
    const auto l = leaky_relu(x);
    EXPECT_FLOAT_EQ(l[0], -0.1f);
    EXPECT_FLOAT_EQ(l[2], 2.0f);
    EXPECT_FLOAT_EQ(sigmoid(x)[1], 0.5f);
    EXPECT_FLOAT_EQ(nn::tanh(x)[1], 0.0f);
}

TEST(Activations, GradCheck) {
    ModelParamsD p;
    p.tensors.emplace("x", random_tensor({2, 3, 4, 4}, 5, 0.05));
    const auto r = random_tensor({2, 3, 4, 4}, 6);
    for (int which = 0; which < 3; ++which) {
        auto loss = [&](const ModelParamsD& q, ModelParamsD* g) {
            TensorD y = which == 0 ? leaky_relu(q["x"]) : which == 1 ? sigmoid(q["x"]) : nn::tanh(q["x"]);
            if (g) {
                (*g)["x"] = which == 0 ? leaky_relu_backward(q["x"], r)
                            : which == 1 ? sigmoid_backward(y, r)
                                         : tanh_backward(y, r);
            }
            return dot(r, y);
        };
        EXPECT_LE(grad_check(loss, p, 40).max_rel_error, kOpTol) << "activation " << which;
    }
}

TEST(Upsample, RepeatsBlocks) {
    Tensor x({1, 1, 2, 2}, std::vector<float>{1, 2, 3, 4});
    const auto y = upsample_nearest2x(x);
    ASSERT_EQ(y.shape(), (Shape{1, 1, 4, 4}));
    EXPECT_EQ(y.vec(), (std::vector<float>{1, 1, 2, 2, 1, 1, 2, 2, 3, 3, 4, 4, 3, 3, 4, 4}));
}

TEST(Upsample, GradCheck) {
    ModelParamsD p;
    p.tensors.emplace("x", random_tensor({2, 2, 3, 3}, 7));
    const auto r = random_tensor({2, 2, 6, 6}, 8);
    auto loss = [&](const ModelParamsD& q, ModelParamsD* g) {
        if (g) (*g)["x"] = upsample_nearest2x_backward(r);
        return dot(r, upsample_nearest2x(q["x"]));
    };
    EXPECT_LE(grad_check(loss, p, 36).max_rel_error, kOpTol);
}

TEST(GlobalAvgPool, ConstantAndGradCheck) {
    Tensor c({2, 3, 4, 5}, 0.25f);
    const auto y = global_avg_pool(c);
    ASSERT_EQ(y.shape(), (Shape{2, 3}));
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_FLOAT_EQ(y[i], 0.25f);

    ModelParamsD p;
    p.tensors.emplace("x", random_tensor({2, 3, 4, 5}, 9));
    const auto r = random_tensor({2, 3}, 10);
    auto loss = [&](const ModelParamsD& q, ModelParamsD* g) {
        if (g) (*g)["x"] = global_avg_pool_backward(q["x"].shape(), r);
        return dot(r, global_avg_pool(q["x"]));
    };
    EXPECT_LE(grad_check(loss, p, 40).max_rel_error, kOpTol);
}

TEST(Concat, SplitsGradientAndChecksShapes) {
    ModelParamsD p;
    p.tensors.emplace("a", random_tensor({2, 2, 3, 3}, 11));
    p.tensors.emplace("b", random_tensor({2, 3, 3, 3}, 12));
    const auto r = random_tensor({2, 5, 3, 3}, 13);
    auto loss = [&](const ModelParamsD& q, ModelParamsD* g) {
        const auto y = concat_channels<double>({&q["a"], &q["b"]});
        if (g) {
            auto parts = concat_channels_backward<double>({&q["a"], &q["b"]}, r);
            (*g)["a"] = parts[0];
            (*g)["b"] = parts[1];
        }
        return dot(r, y);
    };
    EXPECT_LE(grad_check(loss, p, 30).max_rel_error, kOpTol);
    const auto y = concat_channels<double>({&p["a"], &p["b"]});
    EXPECT_EQ(y.at(1, 2, 1, 2), p["b"].at(1, 0, 1, 2));

    TensorD bad({2, 1, 4, 3});
    EXPECT_THROW(concat_channels<double>({&p["a"], &bad}), Error);
}

TEST(Linear, ValuesAndGradCheck) {
    Tensor x({1, 2}, std::vector<float>{1, 2}), w({1, 2}, std::vector<float>{3, 4}), b({1}, std::vector<float>{0.5f});
    EXPECT_FLOAT_EQ(linear(x, w, b)[0], 11.5f);
    Tensor bad_w({1, 3});
    EXPECT_THROW(linear(x, bad_w, b), Error);

    ModelParamsD p;
    p.tensors.emplace("x", random_tensor({3, 5}, 14));
    p.tensors.emplace("w", random_tensor({4, 5}, 15));
    p.tensors.emplace("b", random_tensor({4}, 16));
    const auto r = random_tensor({3, 4}, 17);
    auto loss = [&](const ModelParamsD& q, ModelParamsD* g) {
        if (g) {
            TensorD dx;
            linear_backward(q["x"], q["w"], r, &dx, (*g)["w"], (*g)["b"]);
            (*g)["x"] = dx;
        }
        return dot(r, linear(q["x"], q["w"], q["b"]));
    };
    EXPECT_LE(grad_check(loss, p, 20).max_rel_error, kOpTol);
}

TEST(Determinism, ConvIsBitStable) {
    const auto x = random_tensor({2, 4, 16, 16}, 18).cast<float>();
    const auto w = random_tensor({8, 4, 3, 3}, 19).cast<float>();
    const auto b = random_tensor({8}, 20).cast<float>();
    EXPECT_EQ(conv2d(x, w, b, 1), conv2d(x, w, b, 1));
}
