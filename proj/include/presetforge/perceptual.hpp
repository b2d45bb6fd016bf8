#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace presetforge {

/// Single-channel plane used by the perceptual proxy.
template <class T>
struct Plane {
    int width = 0;
    int height = 0;
    std::vector<T> v;

    Plane() = default;
    Plane(int w, int h, T fill = T(0)) : width(w), height(h), v(static_cast<std::size_t>(w) * h, fill) {}

    T& operator()(int x, int y) { return v[static_cast<std::size_t>(y) * width + x]; }
    T operator()(int x, int y) const { return v[static_cast<std::size_t>(y) * width + x]; }
};

inline constexpr int kProxyLevels = 3;
inline constexpr double kProxyGradEps = 1e-6;

namespace detail {

inline int clampi(int v, int hi) { return std::clamp(v, 0, hi - 1); }

// [1 2 1]/4 separable blur with edge clamping.
template <class T>
Plane<T> blur(const Plane<T>& in) {
    Plane<T> tmp(in.width, in.height), out(in.width, in.height);
    for (int y = 0; y < in.height; ++y)
        for (int x = 0; x < in.width; ++x)
            tmp(x, y) = T(0.25) * in(clampi(x - 1, in.width), y) + T(0.5) * in(x, y) +
                        T(0.25) * in(clampi(x + 1, in.width), y);
    for (int y = 0; y < in.height; ++y)
        for (int x = 0; x < in.width; ++x)
            out(x, y) = T(0.25) * tmp(x, clampi(y - 1, in.height)) + T(0.5) * tmp(x, y) +
                        T(0.25) * tmp(x, clampi(y + 1, in.height));
    return out;
}

template <class T>
Plane<T> blur_adjoint(const Plane<T>& g) {
    Plane<T> tmp(g.width, g.height), out(g.width, g.height);
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x) {
            const T v = g(x, y);
            tmp(x, clampi(y - 1, g.height)) += T(0.25) * v;
            tmp(x, y) += T(0.5) * v;
            tmp(x, clampi(y + 1, g.height)) += T(0.25) * v;
        }
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x) {
            const T v = tmp(x, y);
            out(clampi(x - 1, g.width), y) += T(0.25) * v;
            out(x, y) += T(0.5) * v;
            out(clampi(x + 1, g.width), y) += T(0.25) * v;
        }
    return out;
}

template <class T>
Plane<T> downsample(const Plane<T>& in) {
    Plane<T> out((in.width + 1) / 2, (in.height + 1) / 2);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) out(x, y) = in(2 * x, 2 * y);
    return out;
}

template <class T>
Plane<T> downsample_adjoint(const Plane<T>& g, int width, int height) {
    Plane<T> out(width, height);
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x) out(2 * x, 2 * y) = g(x, y);
    return out;
}

// Sobel derivatives scaled by 1/8, edge clamped.
template <class T>
void sobel(const Plane<T>& p, Plane<T>& gx, Plane<T>& gy) {
    gx = Plane<T>(p.width, p.height);
    gy = Plane<T>(p.width, p.height);
    for (int y = 0; y < p.height; ++y) {
        const int ym = clampi(y - 1, p.height), yp = clampi(y + 1, p.height);
        for (int x = 0; x < p.width; ++x) {
            const int xm = clampi(x - 1, p.width), xp = clampi(x + 1, p.width);
            gx(x, y) = T(0.125) * ((p(xp, ym) + T(2) * p(xp, y) + p(xp, yp)) - (p(xm, ym) + T(2) * p(xm, y) + p(xm, yp)));
            gy(x, y) = T(0.125) * ((p(xm, yp) + T(2) * p(x, yp) + p(xp, yp)) - (p(xm, ym) + T(2) * p(x, ym) + p(xp, ym)));
        }
    }
}

template <class T>
Plane<T> sobel_adjoint(const Plane<T>& dgx, const Plane<T>& dgy) {
    Plane<T> out(dgx.width, dgx.height);
    const int w = dgx.width, h = dgx.height;
    for (int y = 0; y < h; ++y) {
        const int ym = clampi(y - 1, h), yp = clampi(y + 1, h);
        for (int x = 0; x < w; ++x) {
            const int xm = clampi(x - 1, w), xp = clampi(x + 1, w);
            const T a = T(0.125) * dgx(x, y);
            out(xp, ym) += a;
            out(xp, y) += T(2) * a;
            out(xp, yp) += a;
            out(xm, ym) -= a;
            out(xm, y) -= T(2) * a;
            out(xm, yp) -= a;
            const T b = T(0.125) * dgy(x, y);
            out(xm, yp) += b;
            out(x, yp) += T(2) * b;
            out(xp, yp) += b;
            out(xm, ym) -= b;
            out(x, ym) -= T(2) * b;
            out(xp, ym) -= b;
        }
    }
    return out;
}

template <class T>
T sign(T v) {
    return v > T(0) ? T(1) : (v < T(0) ? T(-1) : T(0));
}

}  // namespace detail

/// Pyramid-gradient perceptual proxy between two luminance planes:
/// mean over kProxyLevels Gaussian-pyramid levels of
///   mean|La - Lb| + mean|Ga - Gb|,
/// where G is the Sobel gradient magnitude sqrt(gx^2 + gy^2 + eps).
/// Symmetric in (a, b) and zero for identical planes. When `grad_a` is given
/// it receives d(proxy)/d(a).
template <class T>
T perceptual_plane(const Plane<T>& a, const Plane<T>& b, Plane<T>* grad_a = nullptr) {
    using detail::sign;
    std::vector<Plane<T>> la{a}, lb{b};
    for (int k = 1; k < kProxyLevels; ++k) {
        la.push_back(detail::downsample(detail::blur(la.back())));
        lb.push_back(detail::downsample(detail::blur(lb.back())));
    }
    T total = T(0);
    std::vector<Plane<T>> dl(kProxyLevels);
    for (int k = 0; k < kProxyLevels; ++k) {
        const auto& pa = la[k];
        const auto& pb = lb[k];
        const T inv_n = T(1) / static_cast<T>(pa.v.size());
        Plane<T> gxa, gya, gxb, gyb;
        detail::sobel(pa, gxa, gya);
        detail::sobel(pb, gxb, gyb);
        T lum_term = T(0), grad_term = T(0);
        Plane<T> dgx(pa.width, pa.height), dgy(pa.width, pa.height);
        dl[k] = Plane<T>(pa.width, pa.height);
        for (std::size_t i = 0; i < pa.v.size(); ++i) {
            const T dlum = pa.v[i] - pb.v[i];
            lum_term += std::abs(dlum);
            const T ma = std::sqrt(gxa.v[i] * gxa.v[i] + gya.v[i] * gya.v[i] + T(kProxyGradEps));
            const T mb = std::sqrt(gxb.v[i] * gxb.v[i] + gyb.v[i] * gyb.v[i] + T(kProxyGradEps));
            grad_term += std::abs(ma - mb);
            if (grad_a) {
                const T scale = inv_n / T(kProxyLevels);
                dl[k].v[i] = scale * sign(dlum);
                const T dm = scale * sign(ma - mb);
                dgx.v[i] = dm * gxa.v[i] / ma;
                dgy.v[i] = dm * gya.v[i] / ma;
            }
        }
        total += (lum_term + grad_term) * inv_n;
        if (grad_a) {
            const Plane<T> back = detail::sobel_adjoint(dgx, dgy);
            for (std::size_t i = 0; i < back.v.size(); ++i) dl[k].v[i] += back.v[i];
        }
    }
    if (grad_a) {
        // Walk the pyramid from coarse to fine, pushing gradients down.
        for (int k = kProxyLevels - 1; k > 0; --k) {
            const Plane<T> up = detail::blur_adjoint(detail::downsample_adjoint(dl[k], la[k - 1].width, la[k - 1].height));
            for (std::size_t i = 0; i < up.v.size(); ++i) dl[k - 1].v[i] += up.v[i];
        }
        *grad_a = std::move(dl[0]);
    }
    return total / T(kProxyLevels);
}

}  // namespace presetforge
