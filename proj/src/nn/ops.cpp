#include "presetforge/nn/ops.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Core>

namespace presetforge::nn {

std::string shape_string(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << ']';
    return os.str();
}

namespace {

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MapMat = Eigen::Map<RowMat<T>>;
template <class T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(Errc::ShapeMismatch, what);
}

template <class T>
void require_rank(const BasicTensor<T>& t, std::size_t rank, const char* name) {
    require(t.rank() == rank, std::string(name) + " must have rank " + std::to_string(rank) + ", got " +
                                  shape_string(t.shape()));
}

struct ConvGeom {
    std::size_t n, c, h, w, k, ho, wo;
    int stride;
    std::size_t rows() const { return c * 9; }
    std::size_t cols() const { return n * ho * wo; }
};

template <class T>
ConvGeom conv_geom(const BasicTensor<T>& x, const BasicTensor<T>& w, int stride) {
    require(stride == 1 || stride == 2, "conv2d stride must be 1 or 2");
    require_rank(x, 4, "conv2d input");
    require_rank(w, 4, "conv2d weight");
    require(w.dim(1) == x.dim(1) && w.dim(2) == 3 && w.dim(3) == 3,
            "conv2d weight " + shape_string(w.shape()) + " incompatible with input " + shape_string(x.shape()));
    ConvGeom g{};
    g.n = x.dim(0);
    g.c = x.dim(1);
    g.h = x.dim(2);
    g.w = x.dim(3);
    g.k = w.dim(0);
    g.stride = stride;
    g.ho = (g.h - 1) / stride + 1;
    g.wo = (g.w - 1) / stride + 1;
    return g;
}

template <class T>
void im2col(const BasicTensor<T>& x, const ConvGeom& g, std::vector<T>& col) {
    col.assign(g.rows() * g.cols(), T(0));
    const std::size_t plane = g.ho * g.wo;
    const auto rows = static_cast<std::ptrdiff_t>(g.rows());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < rows; ++r) {
        const std::size_t c = static_cast<std::size_t>(r) / 9;
        const int ky = static_cast<int>(r % 9) / 3;
        const int kx = static_cast<int>(r % 3);
        T* dst = &col[static_cast<std::size_t>(r) * g.cols()];
        for (std::size_t n = 0; n < g.n; ++n) {
            const T* src = &x.data()[(n * g.c + c) * g.h * g.w];
            for (std::size_t oy = 0; oy < g.ho; ++oy) {
                const long iy = static_cast<long>(oy) * g.stride + ky - 1;
                T* row = dst + n * plane + oy * g.wo;
                if (iy < 0 || iy >= static_cast<long>(g.h)) continue;
                const T* srow = src + static_cast<std::size_t>(iy) * g.w;
                for (std::size_t ox = 0; ox < g.wo; ++ox) {
                    const long ix = static_cast<long>(ox) * g.stride + kx - 1;
                    if (ix >= 0 && ix < static_cast<long>(g.w)) row[ox] = srow[ix];
                }
            }
        }
    }
}

template <class T>
void col2im(const std::vector<T>& col, const ConvGeom& g, BasicTensor<T>& dx) {
    dx.zero();
    const std::size_t plane = g.ho * g.wo;
    const auto channels = static_cast<std::ptrdiff_t>(g.c);
    // Each channel owns its own slice of dx, so the loop has no races and a
    // fixed accumulation order.
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ci = 0; ci < channels; ++ci) {
        const auto c = static_cast<std::size_t>(ci);
        for (int kk = 0; kk < 9; ++kk) {
            const int ky = kk / 3, kx = kk % 3;
            const T* srcr = &col[(c * 9 + kk) * g.cols()];
            for (std::size_t n = 0; n < g.n; ++n) {
                T* dst = &dx.data()[(n * g.c + c) * g.h * g.w];
                for (std::size_t oy = 0; oy < g.ho; ++oy) {
                    const long iy = static_cast<long>(oy) * g.stride + ky - 1;
                    if (iy < 0 || iy >= static_cast<long>(g.h)) continue;
                    const T* row = srcr + n * plane + oy * g.wo;
                    T* drow = dst + static_cast<std::size_t>(iy) * g.w;
                    for (std::size_t ox = 0; ox < g.wo; ++ox) {
                        const long ix = static_cast<long>(ox) * g.stride + kx - 1;
                        if (ix >= 0 && ix < static_cast<long>(g.w)) drow[ix] += row[ox];
                    }
                }
            }
        }
    }
}

}  // namespace

template <class T>
BasicTensor<T> conv2d(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& b, int stride) {
    const ConvGeom g = conv_geom(x, w, stride);
    require(b.rank() == 1 && b.dim(0) == g.k, "conv2d bias must have shape [K]");
    std::vector<T> col;
    im2col(x, g, col);
    BasicTensor<T> y({g.n, g.k, g.ho, g.wo});
    const std::size_t plane = g.ho * g.wo;
    const ConstMapMat<T> wm(w.data(), g.k, g.rows());
    const ConstMapMat<T> cm(col.data(), g.rows(), g.cols());
    // One product per sample: every sample goes through the same kernel path,
    // so a sample's output does not depend on its position in the batch.
    for (std::size_t n = 0; n < g.n; ++n) {
        MapMat<T> ym(y.data() + n * g.k * plane, g.k, plane);
        ym.noalias() = wm * cm.middleCols(static_cast<Eigen::Index>(n * plane), static_cast<Eigen::Index>(plane));
        for (std::size_t k = 0; k < g.k; ++k) ym.row(static_cast<Eigen::Index>(k)).array() += b[k];
    }
    return y;
}

template <class T>
void conv2d_backward(const BasicTensor<T>& x, const BasicTensor<T>& w, int stride, const BasicTensor<T>& dy,
                     std::type_identity_t<BasicTensor<T>>* dx, BasicTensor<T>& dw, BasicTensor<T>& db) {
    const ConvGeom g = conv_geom(x, w, stride);
    require(dy.shape() == Shape{g.n, g.k, g.ho, g.wo}, "conv2d output gradient shape " + shape_string(dy.shape()));
    dw.require_same_shape(w);
    require(db.rank() == 1 && db.dim(0) == g.k, "conv2d bias gradient must have shape [K]");
    const std::size_t plane = g.ho * g.wo;
    RowMat<T> dy_mat(g.k, g.cols());
    for (std::size_t n = 0; n < g.n; ++n)
        for (std::size_t k = 0; k < g.k; ++k) {
            const T* src = dy.data() + (n * g.k + k) * plane;
            T* dst = dy_mat.data() + k * g.cols() + n * plane;
            std::copy(src, src + plane, dst);
        }
    std::vector<T> col;
    im2col(x, g, col);
    ConstMapMat<T> col_mat(col.data(), g.rows(), g.cols());
    MapMat<T>(dw.data(), g.k, g.rows()).noalias() += dy_mat * col_mat.transpose();
    for (std::size_t k = 0; k < g.k; ++k) db[k] += dy_mat.row(static_cast<Eigen::Index>(k)).sum();
    if (dx) {
        std::vector<T> dcol_vec(g.rows() * g.cols());
        MapMat<T> dcol(dcol_vec.data(), g.rows(), g.cols());
        const ConstMapMat<T> wm(w.data(), g.k, g.rows());
        for (std::size_t n = 0; n < g.n; ++n) {
            const auto c0 = static_cast<Eigen::Index>(n * plane), len = static_cast<Eigen::Index>(plane);
            dcol.middleCols(c0, len).noalias() = wm.transpose() * dy_mat.middleCols(c0, len);
        }
        if (dx->shape() != x.shape()) *dx = BasicTensor<T>(x.shape());
        col2im(dcol_vec, g, *dx);
    }
}

template <class T>
BasicTensor<T> leaky_relu(const BasicTensor<T>& x, T slope) {
    BasicTensor<T> y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T(0) ? x[i] : slope * x[i];
    return y;
}

template <class T>
BasicTensor<T> leaky_relu_backward(const BasicTensor<T>& x, const BasicTensor<T>& dy, T slope) {
    x.require_same_shape(dy);
    BasicTensor<T> dx(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] > T(0) ? dy[i] : slope * dy[i];
    return dx;
}

template <class T>
BasicTensor<T> sigmoid(const BasicTensor<T>& x) {
    BasicTensor<T> y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = T(1) / (T(1) + std::exp(-x[i]));
    return y;
}

template <class T>
BasicTensor<T> sigmoid_backward(const BasicTensor<T>& y, const BasicTensor<T>& dy) {
    y.require_same_shape(dy);
    BasicTensor<T> dx(y.shape());
    for (std::size_t i = 0; i < y.size(); ++i) dx[i] = dy[i] * y[i] * (T(1) - y[i]);
    return dx;
}

template <class T>
BasicTensor<T> tanh(const BasicTensor<T>& x) {
    BasicTensor<T> y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
    return y;
}

template <class T>
BasicTensor<T> tanh_backward(const BasicTensor<T>& y, const BasicTensor<T>& dy) {
    y.require_same_shape(dy);
    BasicTensor<T> dx(y.shape());
    for (std::size_t i = 0; i < y.size(); ++i) dx[i] = dy[i] * (T(1) - y[i] * y[i]);
    return dx;
}

template <class T>
BasicTensor<T> upsample_nearest2x(const BasicTensor<T>& x) {
    require_rank(x, 4, "upsample input");
    const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    BasicTensor<T> y({n, c, 2 * h, 2 * w});
    for (std::size_t p = 0; p < n * c; ++p) {
        const T* src = x.data() + p * h * w;
        T* dst = y.data() + p * 4 * h * w;
        for (std::size_t yy = 0; yy < 2 * h; ++yy)
            for (std::size_t xx = 0; xx < 2 * w; ++xx) dst[yy * 2 * w + xx] = src[(yy / 2) * w + xx / 2];
    }
    return y;
}

template <class T>
BasicTensor<T> upsample_nearest2x_backward(const BasicTensor<T>& dy) {
    require_rank(dy, 4, "upsample gradient");
    require(dy.dim(2) % 2 == 0 && dy.dim(3) % 2 == 0, "upsample gradient must have even spatial size");
    const std::size_t n = dy.dim(0), c = dy.dim(1), h = dy.dim(2) / 2, w = dy.dim(3) / 2;
    BasicTensor<T> dx({n, c, h, w});
    for (std::size_t p = 0; p < n * c; ++p) {
        const T* src = dy.data() + p * 4 * h * w;
        T* dst = dx.data() + p * h * w;
        for (std::size_t yy = 0; yy < 2 * h; ++yy)
            for (std::size_t xx = 0; xx < 2 * w; ++xx) dst[(yy / 2) * w + xx / 2] += src[yy * 2 * w + xx];
    }
    return dx;
}

template <class T>
BasicTensor<T> global_avg_pool(const BasicTensor<T>& x) {
    require_rank(x, 4, "global_avg_pool input");
    const std::size_t n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
    BasicTensor<T> y({n, c});
    for (std::size_t p = 0; p < n * c; ++p) {
        T acc = T(0);
        const T* src = x.data() + p * hw;
        for (std::size_t i = 0; i < hw; ++i) acc += src[i];
        y[p] = acc / static_cast<T>(hw);
    }
    return y;
}

template <class T>
BasicTensor<T> global_avg_pool_backward(const Shape& x_shape, const BasicTensor<T>& dy) {
    require(x_shape.size() == 4 && dy.shape() == Shape{x_shape[0], x_shape[1]}, "global_avg_pool gradient shape");
    BasicTensor<T> dx(x_shape);
    const std::size_t hw = x_shape[2] * x_shape[3];
    for (std::size_t p = 0; p < dy.size(); ++p) {
        const T v = dy[p] / static_cast<T>(hw);
        std::fill(dx.data() + p * hw, dx.data() + (p + 1) * hw, v);
    }
    return dx;
}

template <class T>
BasicTensor<T> concat_channels(const std::vector<const BasicTensor<T>*>& parts) {
    require(!parts.empty(), "concat of nothing");
    const auto& first = *parts.front();
    require_rank(first, 4, "concat input");
    std::size_t channels = 0;
    for (const auto* p : parts) {
        require_rank(*p, 4, "concat input");
        require(p->dim(0) == first.dim(0) && p->dim(2) == first.dim(2) && p->dim(3) == first.dim(3),
                "concat inputs " + shape_string(first.shape()) + " and " + shape_string(p->shape()) + " differ");
        channels += p->dim(1);
    }
    const std::size_t n = first.dim(0), hw = first.dim(2) * first.dim(3);
    BasicTensor<T> y({n, channels, first.dim(2), first.dim(3)});
    for (std::size_t i = 0; i < n; ++i) {
        T* dst = y.data() + i * channels * hw;
        for (const auto* p : parts) {
            const std::size_t len = p->dim(1) * hw;
            std::copy_n(p->data() + i * len, len, dst);
            dst += len;
        }
    }
    return y;
}

template <class T>
std::vector<BasicTensor<T>> concat_channels_backward(const std::vector<const BasicTensor<T>*>& parts,
                                                     const BasicTensor<T>& dy) {
    std::vector<BasicTensor<T>> grads;
    grads.reserve(parts.size());
    std::size_t channels = 0;
    for (const auto* p : parts) {
        grads.emplace_back(p->shape());
        channels += p->dim(1);
    }
    require(dy.rank() == 4 && dy.dim(1) == channels, "concat gradient shape " + shape_string(dy.shape()));
    const std::size_t n = dy.dim(0), hw = dy.dim(2) * dy.dim(3);
    for (std::size_t i = 0; i < n; ++i) {
        const T* src = dy.data() + i * channels * hw;
        for (std::size_t k = 0; k < parts.size(); ++k) {
            const std::size_t len = parts[k]->dim(1) * hw;
            std::copy_n(src, len, grads[k].data() + i * len);
            src += len;
        }
    }
    return grads;
}

template <class T>
BasicTensor<T> linear(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& b) {
    require_rank(x, 2, "linear input");
    require_rank(w, 2, "linear weight");
    require(w.dim(1) == x.dim(1), "linear weight " + shape_string(w.shape()) + " vs input " + shape_string(x.shape()));
    require(b.rank() == 1 && b.dim(0) == w.dim(0), "linear bias must have shape [E]");
    const std::size_t n = x.dim(0), d = x.dim(1), e = w.dim(0);
    BasicTensor<T> y({n, e});
    MapMat<T> ym(y.data(), n, e);
    ym.noalias() = ConstMapMat<T>(x.data(), n, d) * ConstMapMat<T>(w.data(), e, d).transpose();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < e; ++j) y[i * e + j] += b[j];
    return y;
}

template <class T>
void linear_backward(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& dy,
                     std::type_identity_t<BasicTensor<T>>* dx, BasicTensor<T>& dw, BasicTensor<T>& db) {
    const std::size_t n = x.dim(0), d = x.dim(1), e = w.dim(0);
    require(dy.shape() == Shape{n, e}, "linear gradient shape " + shape_string(dy.shape()));
    dw.require_same_shape(w);
    ConstMapMat<T> dym(dy.data(), n, e);
    MapMat<T>(dw.data(), e, d).noalias() += dym.transpose() * ConstMapMat<T>(x.data(), n, d);
    for (std::size_t j = 0; j < e; ++j) db[j] += dym.col(static_cast<Eigen::Index>(j)).sum();
    if (dx) {
        *dx = BasicTensor<T>({n, d});
        MapMat<T>(dx->data(), n, d).noalias() = dym * ConstMapMat<T>(w.data(), e, d);
    }
}

#define PRESETFORGE_INSTANTIATE_OPS(T)                                                                          \
    template BasicTensor<T> conv2d(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&, int);   \
    template void conv2d_backward(const BasicTensor<T>&, const BasicTensor<T>&, int, const BasicTensor<T>&,     \
                                  std::type_identity_t<BasicTensor<T>>*, BasicTensor<T>&, BasicTensor<T>&);                           \
    template BasicTensor<T> leaky_relu(const BasicTensor<T>&, T);                                               \
    template BasicTensor<T> leaky_relu_backward(const BasicTensor<T>&, const BasicTensor<T>&, T);               \
    template BasicTensor<T> sigmoid(const BasicTensor<T>&);                                                     \
    template BasicTensor<T> sigmoid_backward(const BasicTensor<T>&, const BasicTensor<T>&);                     \
    template BasicTensor<T> tanh(const BasicTensor<T>&);                                                        \
    template BasicTensor<T> tanh_backward(const BasicTensor<T>&, const BasicTensor<T>&);                        \
    template BasicTensor<T> upsample_nearest2x(const BasicTensor<T>&);                                          \
    template BasicTensor<T> upsample_nearest2x_backward(const BasicTensor<T>&);                                 \
    template BasicTensor<T> global_avg_pool(const BasicTensor<T>&);                                             \
    template BasicTensor<T> global_avg_pool_backward(const Shape&, const BasicTensor<T>&);                      \
    template BasicTensor<T> concat_channels(const std::vector<const BasicTensor<T>*>&);                         \
    template std::vector<BasicTensor<T>> concat_channels_backward(const std::vector<const BasicTensor<T>*>&,    \
                                                                  const BasicTensor<T>&);                       \
    template BasicTensor<T> linear(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&);        \
    template void linear_backward(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&,          \
                                  std::type_identity_t<BasicTensor<T>>*, BasicTensor<T>&, BasicTensor<T>&);

PRESETFORGE_INSTANTIATE_OPS(float)
PRESETFORGE_INSTANTIATE_OPS(double)

}  // namespace presetforge::nn
