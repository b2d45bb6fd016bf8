#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "presetforge/image.hpp"
#include "presetforge/perceptual.hpp"

namespace presetforge {

inline constexpr double kPsnrCapDb = 100.0;
inline constexpr int kDefaultHistogramBins = 256;
inline constexpr double kChiSquaredEps = 1e-10;

/// 10*log10(1/MSE), MSE over every channel of every pixel; capped at 100 dB.
double psnr(const ImageBuffer& a, const ImageBuffer& b);

/// Raw per-channel counts over uniform bins on [0, 1]; 1.0 lands in the last bin.
using ChannelHistograms = std::array<std::vector<std::uint64_t>, 3>;
ChannelHistograms histogram(const ImageBuffer& img, int bins = kDefaultHistogramBins);

/// Pearson correlation of the per-channel count vectors, averaged over RGB.
/// A channel whose histograms have zero variance scores 1 when both are
/// identical and 0 otherwise.
double hist_correlation(const ImageBuffer& a, const ImageBuffer& b);
double hist_correlation(const ChannelHistograms& a, const ChannelHistograms& b);

/// Per channel sum over bins of (ha - hb)^2 / (ha + eps), skipping bins empty
/// in both, averaged over RGB. `a` is the reference: the measure is asymmetric.
double hist_chi_squared(const ImageBuffer& a, const ImageBuffer& b);
double hist_chi_squared(const ChannelHistograms& a, const ChannelHistograms& b);

Plane<double> luminance_plane(const ImageBuffer& img);

/// Pyramid-gradient proxy on luminance (see perceptual_plane). Stand-in for
/// a learned perceptual metric; not numerically comparable to one.
double perceptual_proxy(const ImageBuffer& a, const ImageBuffer& b);

struct MetricsReport {
    double psnr_db = 0;
    double hist_corr = 0;
    double hist_chi2 = 0;
    double perceptual_proxy = 0;
};

/// All four metrics; with resize_512 both inputs are first resized to 512x512.
MetricsReport evaluate_pair(const ImageBuffer& a, const ImageBuffer& b, bool resize_512 = false);

nlohmann::json to_json(const MetricsReport& r);

}  // namespace presetforge
