#include "presetforge/net/deep_preset.hpp"

#include <cmath>

#include "presetforge/color.hpp"
#include "presetforge/nn/ops.hpp"
#include "presetforge/perceptual.hpp"
#include "presetforge/rng.hpp"

namespace presetforge::net {

using namespace nn;

namespace {

std::string stage(const std::string& prefix, int s, const char* layer) {
    return prefix + ".s" + std::to_string(s) + "." + layer;
}

std::uint64_t name_hash(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(Errc::ShapeMismatch, what);
}

template <class T>
void check_images(const NetConfig& cfg, const BasicTensor<T>& x, const char* what) {
    require(x.rank() == 4 && x.dim(1) == 3, std::string(what) + " must be N x 3 x H x W, got " + shape_string(x.shape()));
    const auto m = static_cast<std::size_t>(cfg.spatial_multiple());
    require(x.dim(2) % m == 0 && x.dim(3) % m == 0,
            std::string(what) + " height and width must be multiples of " + std::to_string(m));
}

// conv -> leaky relu, with what the backward pass needs.
template <class T>
struct ConvAct {
    std::string name;
    int stride;
    BasicTensor<T> x, pre;
};

template <class T>
BasicTensor<T> conv_act(const BasicParams<T>& params, const std::string& name, const BasicTensor<T>& x, int stride,
                        std::vector<ConvAct<T>>* tape) {
    auto pre = conv2d(x, params[name + ".w"], params[name + ".b"], stride);
    auto y = leaky_relu(pre);
    if (tape) tape->push_back({name, stride, x, std::move(pre)});
    return y;
}

template <class T>
BasicTensor<T> conv_act_back(const BasicParams<T>& params, const ConvAct<T>& c, const BasicTensor<T>& dy,
                             BasicParams<T>& grads, bool need_dx = true) {
    const auto dpre = leaky_relu_backward(c.pre, dy);
    BasicTensor<T> dx;
    conv2d_backward(c.x, params[c.name + ".w"], c.stride, dpre, need_dx ? &dx : nullptr, grads[c.name + ".w"],
                    grads[c.name + ".b"]);
    return dx;
}

// Layers are stored three per stage: conv1, conv2, down.
template <class T>
EncoderOutput<T> encoder(const NetConfig& cfg, const BasicParams<T>& params, const std::string& prefix,
                         const BasicTensor<T>& input, std::vector<ConvAct<T>>* tape) {
    EncoderOutput<T> out;
    BasicTensor<T> cur = input;
    for (int s = 0; s < cfg.depth; ++s) {
        auto a1 = conv_act(params, stage(prefix, s, "conv1"), cur, 1, tape);
        auto a2 = conv_act(params, stage(prefix, s, "conv2"), a1, 1, tape);
        cur = conv_act(params, stage(prefix, s, "down"), a2, 2, tape);
        out.pyramid.push_back(std::move(a2));
    }
    out.final_map = std::move(cur);
    return out;
}

template <class T>
void encoder_backward(const NetConfig& cfg, const BasicParams<T>& params, const std::vector<ConvAct<T>>& tape,
                      const std::vector<BasicTensor<T>>& d_pyramid, BasicTensor<T> d_final, BasicParams<T>& grads) {
    BasicTensor<T> d = std::move(d_final);
    for (int s = cfg.depth - 1; s >= 0; --s) {
        const auto i = static_cast<std::size_t>(3 * s);
        d = conv_act_back(params, tape[i + 2], d, grads);
        if (!d_pyramid.empty() && !d_pyramid[static_cast<std::size_t>(s)].empty()) d += d_pyramid[static_cast<std::size_t>(s)];
        d = conv_act_back(params, tape[i + 1], d, grads);
        d = conv_act_back(params, tape[i], d, grads, s > 0);
    }
}

template <class T>
struct HeadTape {
    Shape in_shape;
    BasicTensor<T> pooled, h1_pre, h1;
    HeadOutput<T> out;
};

template <class T>
HeadOutput<T> head(const BasicParams<T>& params, const BasicTensor<T>& t_final, HeadTape<T>* tape) {
    auto pooled = global_avg_pool(t_final);
    auto h1_pre = linear(pooled, params["L.fc1.w"], params["L.fc1.b"]);
    auto h1 = leaky_relu(h1_pre);
    HeadOutput<T> out;
    out.embedding = linear(h1, params["L.fc2.w"], params["L.fc2.b"]);
    out.preset = nn::tanh(linear(out.embedding, params["L.preset.w"], params["L.preset.b"]));
    if (tape) *tape = {t_final.shape(), std::move(pooled), std::move(h1_pre), std::move(h1), out};
    return out;
}

// d_preset may be null (the Z' pass only feeds the embedding loss).
template <class T>
BasicTensor<T> head_backward(const BasicParams<T>& params, const HeadTape<T>& tape, BasicTensor<T> d_embedding,
                             const BasicTensor<T>* d_preset, BasicParams<T>& grads) {
    if (d_preset) {
        const auto d_pre = tanh_backward(tape.out.preset, *d_preset);
        BasicTensor<T> d_emb;
        linear_backward(tape.out.embedding, params["L.preset.w"], d_pre, &d_emb, grads["L.preset.w"],
                        grads["L.preset.b"]);
        d_embedding += d_emb;
    }
    BasicTensor<T> d_h1;
    linear_backward(tape.h1, params["L.fc2.w"], d_embedding, &d_h1, grads["L.fc2.w"], grads["L.fc2.b"]);
    const auto d_h1_pre = leaky_relu_backward(tape.h1_pre, d_h1);
    BasicTensor<T> d_pooled;
    linear_backward(tape.pooled, params["L.fc1.w"], d_h1_pre, &d_pooled, grads["L.fc1.w"], grads["L.fc1.b"]);
    return global_avg_pool_backward(tape.in_shape, d_pooled);
}

template <class T>
struct DecoderTape {
    std::vector<BasicTensor<T>> ups;       // per decoder step, coarse first
    std::vector<ConvAct<T>> convs;         // two per step
    BasicTensor<T> out_x, out_y;           // input and output of the final conv+sigmoid
    Shape t_final_shape, c_final_shape;
};

template <class T>
BasicTensor<T> decoder(const NetConfig& cfg, const BasicParams<T>& params, const EncoderOutput<T>& t,
                       const EncoderOutput<T>& c, DecoderTape<T>* tape) {
    require(t.pyramid.size() == static_cast<std::size_t>(cfg.depth) && c.pyramid.size() == t.pyramid.size(),
            "decoder pyramids must have one map per stage");
    BasicTensor<T> cur = concat_channels<T>({&t.final_map, &c.final_map});
    if (tape) {
        tape->t_final_shape = t.final_map.shape();
        tape->c_final_shape = c.final_map.shape();
    }
    for (int s = cfg.depth - 1; s >= 0; --s) {
        const auto i = static_cast<std::size_t>(s);
        auto up = upsample_nearest2x(cur);
        auto cat = concat_channels<T>({&up, &t.pyramid[i], &c.pyramid[i]});
        auto* convs = tape ? &tape->convs : nullptr;
        auto a1 = conv_act(params, stage("G", s, "conv1"), cat, 1, convs);
        cur = conv_act(params, stage("G", s, "conv2"), a1, 1, convs);
        if (tape) tape->ups.push_back(std::move(up));
    }
    auto y = sigmoid(conv2d(cur, params["G.out.w"], params["G.out.b"], 1));
    if (tape) {
        tape->out_x = std::move(cur);
        tape->out_y = y;
    }
    return y;
}

template <class T>
struct EncoderGrads {
    std::vector<BasicTensor<T>> pyramid;
    BasicTensor<T> final_map;
};

template <class T>
std::pair<EncoderGrads<T>, EncoderGrads<T>> decoder_backward(const NetConfig& cfg, const BasicParams<T>& params,
                                                             const DecoderTape<T>& tape, const EncoderOutput<T>& t,
                                                             const EncoderOutput<T>& c, const BasicTensor<T>& d_y,
                                                             BasicParams<T>& grads) {
    EncoderGrads<T> dt, dc;
    dt.pyramid.resize(static_cast<std::size_t>(cfg.depth));
    dc.pyramid.resize(static_cast<std::size_t>(cfg.depth));
    const auto d_pre = sigmoid_backward(tape.out_y, d_y);
    BasicTensor<T> d;
    conv2d_backward(tape.out_x, params["G.out.w"], 1, d_pre, &d, grads["G.out.w"], grads["G.out.b"]);
    // Forward visited s = depth-1 .. 0; walk the tape backwards.
    for (int s = 0; s < cfg.depth; ++s) {
        const auto i = static_cast<std::size_t>(s);
        const auto step = static_cast<std::size_t>(cfg.depth - 1 - s);
        d = conv_act_back(params, tape.convs[2 * step + 1], d, grads);
        d = conv_act_back(params, tape.convs[2 * step], d, grads);
        auto parts = concat_channels_backward<T>({&tape.ups[step], &t.pyramid[i], &c.pyramid[i]}, d);
        dt.pyramid[i] = std::move(parts[1]);
        dc.pyramid[i] = std::move(parts[2]);
        d = upsample_nearest2x_backward(parts[0]);
    }
    auto finals = concat_channels_backward<T>({&t.final_map, &c.final_map}, d);
    dt.final_map = std::move(finals[0]);
    dc.final_map = std::move(finals[1]);
    return {std::move(dt), std::move(dc)};
}

template <class T>
T sgn(T v) {
    return v > T(0) ? T(1) : (v < T(0) ? T(-1) : T(0));
}

}  // namespace

nlohmann::json to_json(const LossBreakdown& l) {
    return {{"mse", l.mse},
            {"perceptual", l.perceptual},
            {"preset_l1", l.preset_l1},
            {"ppl", l.ppl},
            {"total", l.total},
            {"weights", to_json(l.weights)}};
}

std::vector<std::pair<std::string, Shape>> parameter_layout(const NetConfig& cfg) {
    cfg.validate();
    std::vector<std::pair<std::string, Shape>> out;
    auto conv = [&](const std::string& name, std::size_t in, std::size_t o) {
        out.push_back({name + ".w", {o, in, 3, 3}});
        out.push_back({name + ".b", {o}});
    };
    auto fc = [&](const std::string& name, std::size_t in, std::size_t o) {
        out.push_back({name + ".w", {o, in}});
        out.push_back({name + ".b", {o}});
    };
    const auto width = [&](int s) { return static_cast<std::size_t>(cfg.stage_width(s)); };
    for (const char* prefix : {"T", "C"}) {
        std::size_t in = prefix[0] == 'T' ? 6 : 3;
        for (int s = 0; s < cfg.depth; ++s) {
            conv(stage(prefix, s, "conv1"), in, width(s));
            conv(stage(prefix, s, "conv2"), width(s), width(s));
            conv(stage(prefix, s, "down"), width(s), width(s));
            in = width(s);
        }
    }
    const std::size_t last = width(cfg.depth - 1);
    const auto embed = static_cast<std::size_t>(cfg.embed_dim);
    fc("L.fc1", last, embed);
    fc("L.fc2", embed, embed);
    fc("L.preset", embed, static_cast<std::size_t>(cfg.preset_dim));
    std::size_t prev = 2 * last;
    for (int s = cfg.depth - 1; s >= 0; --s) {
        conv(stage("G", s, "conv1"), prev + 2 * width(s), width(s));
        conv(stage("G", s, "conv2"), width(s), width(s));
        prev = width(s);
    }
    conv("G.out", width(0), 3);
    std::sort(out.begin(), out.end());
    return out;
}

template <class T>
BasicParams<T> init_params(const NetConfig& cfg, std::uint64_t seed) {
    BasicParams<T> params;
    for (const auto& [name, shape] : parameter_layout(cfg)) {
        BasicTensor<T> t(shape);
        if (shape.size() > 1) {
            const std::size_t fan_in = shape_numel(shape) / shape[0];
            const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
            Rng rng(derive_seed(seed, name_hash(name)));
            for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<T>(rng.normal(0.0, sd));
        }
        params.tensors.emplace(name, std::move(t));
    }
    return params;
}

template <class T>
void check_params(const NetConfig& cfg, const BasicParams<T>& params) {
    const auto layout = parameter_layout(cfg);
    if (layout.size() != params.tensors.size()) {
        throw Error(Errc::CheckpointMismatch, "expected " + std::to_string(layout.size()) + " tensors, found " +
                                                  std::to_string(params.tensors.size()));
    }
    for (const auto& [name, shape] : layout) {
        const auto& t = params[name];
        if (t.shape() != shape) {
            throw Error(Errc::CheckpointMismatch,
                        name + " has shape " + shape_string(t.shape()) + ", config expects " + shape_string(shape));
        }
    }
}

template <class T>
EncoderOutput<T> encode_T(const NetConfig& cfg, const BasicParams<T>& params, const BasicTensor<T>& x,
                          const BasicTensor<T>& z) {
    check_images(cfg, x, "content");
    check_images(cfg, z, "reference");
    require(x.shape() == z.shape(), "content and reference shapes differ");
    return encoder<T>(cfg, params, "T", concat_channels<T>({&x, &z}), nullptr);
}

template <class T>
EncoderOutput<T> encode_C(const NetConfig& cfg, const BasicParams<T>& params, const BasicTensor<T>& x) {
    check_images(cfg, x, "content");
    return encoder<T>(cfg, params, "C", x, nullptr);
}

template <class T>
HeadOutput<T> head_L(const NetConfig& cfg, const BasicParams<T>& params, const BasicTensor<T>& t_final) {
    require(t_final.rank() == 4 && t_final.dim(1) == static_cast<std::size_t>(cfg.stage_width(cfg.depth - 1)),
            "head input " + shape_string(t_final.shape()) + " does not match the config");
    return head<T>(params, t_final, nullptr);
}

template <class T>
BasicTensor<T> decode_G(const NetConfig& cfg, const BasicParams<T>& params, const EncoderOutput<T>& t,
                        const EncoderOutput<T>& c) {
    return decoder<T>(cfg, params, t, c, nullptr);
}

template <class T>
LossBreakdown loss_total(const BasicTensor<T>& y_hat, const BasicTensor<T>& y, const BasicTensor<T>& p_hat,
                         const BasicTensor<T>& p, const BasicTensor<T>& f_z, const BasicTensor<T>& f_z_prime,
                         const LossWeights& w, LossGrads<T>* grads) {
    y_hat.require_same_shape(y);
    p_hat.require_same_shape(p);
    f_z.require_same_shape(f_z_prime);
    require(y_hat.rank() == 4 && y_hat.dim(1) == 3, "loss images must be N x 3 x H x W");
    LossBreakdown l;
    l.weights = w;
    if (grads) {
        grads->y_hat = BasicTensor<T>(y_hat.shape());
        grads->p_hat = BasicTensor<T>(p_hat.shape());
        grads->f_z = BasicTensor<T>(f_z.shape());
        grads->f_z_prime = BasicTensor<T>(f_z.shape());
    }

    // Accumulate in double so float training and f64 checks share one path.
    const double n_img = static_cast<double>(y.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = static_cast<double>(y_hat[i]) - y[i];
        acc += d * d;
        if (grads) grads->y_hat[i] = static_cast<T>(w.mse * 2.0 * d / n_img);
    }
    l.mse = acc / n_img;

    const std::size_t n = y.dim(0), h = y.dim(2), wd = y.dim(3), plane = h * wd;
    const T kc[3] = {T(kLumaR), T(kLumaG), T(kLumaB)};
    acc = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        Plane<T> la(static_cast<int>(wd), static_cast<int>(h)), lb(static_cast<int>(wd), static_cast<int>(h));
        for (std::size_t c = 0; c < 3; ++c) {
            const T* pa = y_hat.data() + (s * 3 + c) * plane;
            const T* pb = y.data() + (s * 3 + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
                la.v[i] += kc[c] * pa[i];
                lb.v[i] += kc[c] * pb[i];
            }
        }
        Plane<T> g;
        const bool want = grads && w.perceptual != 0.0;
        acc += static_cast<double>(perceptual_plane(la, lb, want ? &g : nullptr));
        if (want) {
            const T scale = static_cast<T>(w.perceptual / static_cast<double>(n));
            for (std::size_t c = 0; c < 3; ++c) {
                T* d = grads->y_hat.data() + (s * 3 + c) * plane;
                for (std::size_t i = 0; i < plane; ++i) d[i] += scale * kc[c] * g.v[i];
            }
        }
    }
    l.perceptual = acc / static_cast<double>(n);

    // Preset and embedding terms are per-sample L1 norms averaged over the batch.
    const double n_p = static_cast<double>(p.dim(0));
    acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = static_cast<double>(p_hat[i]) - p[i];
        acc += std::abs(d);
        if (grads) grads->p_hat[i] = static_cast<T>(w.preset_l1 * sgn(d) / n_p);
    }
    l.preset_l1 = acc / n_p;

    const double n_f = static_cast<double>(f_z.dim(0));
    acc = 0.0;
    for (std::size_t i = 0; i < f_z.size(); ++i) {
        const double d = static_cast<double>(f_z[i]) - f_z_prime[i];
        acc += std::abs(d);
        if (grads) {
            const double g = w.ppl * sgn(d) / n_f;
            grads->f_z[i] = static_cast<T>(g);
            grads->f_z_prime[i] = static_cast<T>(-g);
        }
    }
    l.ppl = acc / n_f;

    l.total = w.mse * l.mse + w.perceptual * l.perceptual + w.preset_l1 * l.preset_l1 + w.ppl * l.ppl;
    return l;
}

namespace {

template <class T>
BasicTensor<T> slice_batch(const BasicTensor<T>& t, std::size_t i) {
    Shape s = t.shape();
    const std::size_t len = t.size() / s[0];
    s[0] = 1;
    return BasicTensor<T>(s, std::vector<T>(t.data() + i * len, t.data() + (i + 1) * len));
}

}  // namespace

template <class T>
TrainOutput<T> forward_train(const NetConfig& cfg, const BasicParams<T>& params, const Batch<T>& batch,
                             const LossWeights& w, std::type_identity_t<BasicParams<T>>* grads,
                             bool always_report_ppl) {
    check_images(cfg, batch.x, "content");
    for (const auto* t : {&batch.z, &batch.z_prime, &batch.y}) {
        require(t->shape() == batch.x.shape(), "batch image shapes differ");
    }
    require(batch.p.shape() == Shape{batch.x.dim(0), static_cast<std::size_t>(cfg.preset_dim)},
            "batch presets must be N x " + std::to_string(cfg.preset_dim));

    const bool backward = grads != nullptr;
    const bool second_pass = w.ppl != 0.0 || always_report_ppl;
    const bool second_backward = backward && w.ppl != 0.0;

    std::vector<ConvAct<T>> t_tape, t2_tape, c_tape;
    HeadTape<T> h_tape, h2_tape;
    DecoderTape<T> g_tape;

    const auto enc_t = encoder<T>(cfg, params, "T", concat_channels<T>({&batch.x, &batch.z}), backward ? &t_tape : nullptr);
    const auto enc_c = encoder<T>(cfg, params, "C", batch.x, backward ? &c_tape : nullptr);
    TrainOutput<T> out;
    out.head_z = head<T>(params, enc_t.final_map, backward ? &h_tape : nullptr);
    if (second_pass) {
        const auto enc_t2 = encoder<T>(cfg, params, "T", concat_channels<T>({&batch.x, &batch.z_prime}),
                                       second_backward ? &t2_tape : nullptr);
        out.head_z_prime = head<T>(params, enc_t2.final_map, second_backward ? &h2_tape : nullptr);
    }
    out.y_hat = decoder<T>(cfg, params, enc_t, enc_c, backward ? &g_tape : nullptr);

    // Without the second pass the embedding term is reported as zero.
    const BasicTensor<T>& f_prime = second_pass ? out.head_z_prime.embedding : out.head_z.embedding;
    LossGrads<T> lg;
    out.loss = loss_total(out.y_hat, batch.y, out.head_z.preset, batch.p, out.head_z.embedding, f_prime, w,
                          backward ? &lg : nullptr);

    const std::size_t n = batch.x.dim(0);
    if (n > 1) {
        for (std::size_t i = 0; i < n; ++i) {
            out.per_sample.push_back(loss_total(slice_batch(out.y_hat, i), slice_batch(batch.y, i),
                                                slice_batch(out.head_z.preset, i), slice_batch(batch.p, i),
                                                slice_batch(out.head_z.embedding, i), slice_batch(f_prime, i), w));
        }
    } else {
        out.per_sample.push_back(out.loss);
    }

    if (backward) {
        auto [dt, dc] = decoder_backward(cfg, params, g_tape, enc_t, enc_c, lg.y_hat, *grads);
        dt.final_map += head_backward(params, h_tape, lg.f_z, &lg.p_hat, *grads);
        encoder_backward(cfg, params, t_tape, dt.pyramid, std::move(dt.final_map), *grads);
        encoder_backward(cfg, params, c_tape, dc.pyramid, std::move(dc.final_map), *grads);
        if (second_backward) {
            auto d_final2 = head_backward<T>(params, h2_tape, lg.f_z_prime, nullptr, *grads);
            encoder_backward<T>(cfg, params, t2_tape, {}, std::move(d_final2), *grads);
        }
    }
    return out;
}

#define PRESETFORGE_INSTANTIATE_NET(T)                                                                              \
    template BasicParams<T> init_params<T>(const NetConfig&, std::uint64_t);                                        \
    template void check_params<T>(const NetConfig&, const BasicParams<T>&);                                        \
    template EncoderOutput<T> encode_T<T>(const NetConfig&, const BasicParams<T>&, const BasicTensor<T>&,           \
                                          const BasicTensor<T>&);                                                   \
    template EncoderOutput<T> encode_C<T>(const NetConfig&, const BasicParams<T>&, const BasicTensor<T>&);          \
    template HeadOutput<T> head_L<T>(const NetConfig&, const BasicParams<T>&, const BasicTensor<T>&);               \
    template BasicTensor<T> decode_G<T>(const NetConfig&, const BasicParams<T>&, const EncoderOutput<T>&,          \
                                        const EncoderOutput<T>&);                                                   \
    template LossBreakdown loss_total<T>(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&,       \
                                         const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&,       \
                                         const LossWeights&, LossGrads<T>*);                                        \
    template TrainOutput<T> forward_train<T>(const NetConfig&, const BasicParams<T>&, const Batch<T>&,              \
                                             const LossWeights&, std::type_identity_t<BasicParams<T>>*, bool);

PRESETFORGE_INSTANTIATE_NET(float)
PRESETFORGE_INSTANTIATE_NET(double)

}  // namespace presetforge::net
