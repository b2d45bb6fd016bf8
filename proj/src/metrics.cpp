#include "presetforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "presetforge/color.hpp"
#include "presetforge/resize.hpp"

namespace presetforge {

namespace {

void check_same_size(const ImageBuffer& a, const ImageBuffer& b) {
    validate_image(a);
    validate_image(b);
    if (a.width() != b.width() || a.height() != b.height()) {
        throw Error(Errc::DimensionMismatch, std::to_string(a.width()) + "x" + std::to_string(a.height()) + " vs " +
                                                 std::to_string(b.width()) + "x" + std::to_string(b.height()));
    }
}

double pearson(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
    const auto n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += static_cast<double>(a[i]);
        mb += static_cast<double>(b[i]);
    }
    ma /= n;
    mb /= n;
    double cov = 0, va = 0, vb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = static_cast<double>(a[i]) - ma;
        const double db = static_cast<double>(b[i]) - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if (va == 0.0 || vb == 0.0) return a == b ? 1.0 : 0.0;
    return cov / std::sqrt(va * vb);
}

}  // namespace

double psnr(const ImageBuffer& a, const ImageBuffer& b) {
    check_same_size(a, b);
    const auto da = a.data();
    const auto db = b.data();
    double sum = 0.0;
    for (std::size_t i = 0; i < da.size(); ++i) {
        const double d = static_cast<double>(da[i]) - static_cast<double>(db[i]);
        sum += d * d;
    }
    const double mse = sum / static_cast<double>(da.size());
    if (mse <= 0.0) return kPsnrCapDb;
    return std::min(kPsnrCapDb, 10.0 * std::log10(1.0 / mse));
}

ChannelHistograms histogram(const ImageBuffer& img, int bins) {
    if (bins < 2) throw Error(Errc::InvalidParameter, "bins must be >= 2");
    validate_image(img);
    ChannelHistograms h;
    for (auto& c : h) c.assign(static_cast<std::size_t>(bins), 0);
    const auto d = img.data();
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double v = std::clamp(static_cast<double>(d[i]), 0.0, 1.0);
        const auto bin = std::min(static_cast<int>(v * bins), bins - 1);
        ++h[i % 3][static_cast<std::size_t>(bin)];
    }
    return h;
}

double hist_correlation(const ChannelHistograms& a, const ChannelHistograms& b) {
    double acc = 0.0;
    for (int c = 0; c < 3; ++c) {
        if (a[c].size() != b[c].size()) throw Error(Errc::DimensionMismatch, "histogram bin counts differ");
        acc += pearson(a[c], b[c]);
    }
    return acc / 3.0;
}

double hist_correlation(const ImageBuffer& a, const ImageBuffer& b) {
    check_same_size(a, b);
    return hist_correlation(histogram(a), histogram(b));
}

double hist_chi_squared(const ChannelHistograms& a, const ChannelHistograms& b) {
    double acc = 0.0;
    for (int c = 0; c < 3; ++c) {
        if (a[c].size() != b[c].size()) throw Error(Errc::DimensionMismatch, "histogram bin counts differ");
        for (std::size_t i = 0; i < a[c].size(); ++i) {
            if (a[c][i] == 0 && b[c][i] == 0) continue;
            const double ha = static_cast<double>(a[c][i]);
            const double d = ha - static_cast<double>(b[c][i]);
            acc += d * d / (ha + kChiSquaredEps);
        }
    }
    return acc / 3.0;
}

double hist_chi_squared(const ImageBuffer& a, const ImageBuffer& b) {
    check_same_size(a, b);
    return hist_chi_squared(histogram(a), histogram(b));
}

Plane<double> luminance_plane(const ImageBuffer& img) {
    Plane<double> p(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            const float* c = img.px(x, y);
            p(x, y) = luminance({c[0], c[1], c[2]});
        }
    return p;
}

double perceptual_proxy(const ImageBuffer& a, const ImageBuffer& b) {
    check_same_size(a, b);
    return perceptual_plane(luminance_plane(a), luminance_plane(b));
}

MetricsReport evaluate_pair(const ImageBuffer& a, const ImageBuffer& b, bool resize_512) {
    if (resize_512) return evaluate_pair(resize_exact(a, 512, 512), resize_exact(b, 512, 512), false);
    check_same_size(a, b);
    MetricsReport r;
    r.psnr_db = psnr(a, b);
    const auto ha = histogram(a);
    const auto hb = histogram(b);
    r.hist_corr = hist_correlation(ha, hb);
    r.hist_chi2 = hist_chi_squared(ha, hb);
    r.perceptual_proxy = perceptual_proxy(a, b);
    return r;
}

nlohmann::json to_json(const MetricsReport& r) {
    return {{"psnr_db", r.psnr_db},
            {"hist_corr", r.hist_corr},
            {"hist_chi2", r.hist_chi2},
            {"perceptual_proxy", r.perceptual_proxy}};
}

}  // namespace presetforge
