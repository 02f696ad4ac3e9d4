#pragma once

// Atmospheric-scattering haze synthesis and the dark-channel-prior estimator
// (used both for atmospheric light during synthesis and as a baseline).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "blindsynth/core/depth.hpp"
#include "blindsynth/core/filters.hpp"
#include "blindsynth/core/grid.hpp"
#include "blindsynth/guided_filter.hpp"

namespace blindsynth::haze {

struct AtmosphericLight {
    std::array<float, 3> rgb{1.0f, 1.0f, 1.0f};

    [[nodiscard]] bool valid() const noexcept {
        return std::all_of(rgb.begin(), rgb.end(), [](float v) { return std::isfinite(v) && v >= 0.0f && v <= 1.0f; });
    }
    friend bool operator==(const AtmosphericLight&, const AtmosphericLight&) = default;
};

struct HazeParams {
    double beta_atm = 1.0;  // 1/m
    double omega = 0.95;
    int patch = 15;          // odd
    double t_floor = 0.1;
    int guide_radius = 20;
    double guide_eps = 1e-3;

    void validate() const {
        if (!(beta_atm > 0.0)) throw std::invalid_argument("beta_atm must be > 0");
        if (!(omega > 0.0 && omega <= 1.0)) throw std::invalid_argument("omega must be in (0,1]");
        if (patch < 1 || patch % 2 == 0) throw std::invalid_argument("patch must be odd and >= 1");
    }
};

[[nodiscard]] inline double transmission(double depth_m, double beta_atm) noexcept {
    return std::exp(-beta_atm * depth_m);
}

/// t(x) = exp(-beta * d(x)).
[[nodiscard]] inline BlindnessMap transmission_from_depth(const DepthMap& depth, double beta_atm) {
    if (!depth.is_dense()) throw std::invalid_argument("transmission_from_depth: depth must be dense");
    if (!(beta_atm > 0.0)) throw std::invalid_argument("transmission_from_depth: beta_atm must be > 0");
    BlindnessMap t(depth.height(), depth.width());
    for (int y = 0; y < depth.height(); ++y) {
        for (int x = 0; x < depth.width(); ++x) {
            t.at(y, x) = static_cast<float>(transmission(depth.depth(y, x), beta_atm));
        }
    }
    return t;
}

/// Haze amount = 1 - t.
[[nodiscard]] inline BlindnessMap haze_ground_truth(const BlindnessMap& t) {
    BlindnessMap out(t.height(), t.width());
    std::transform(t.values().begin(), t.values().end(), out.values().begin(),
                   [](float v) { return clamp01(1.0 - static_cast<double>(v)); });
    return out;
}

/// I = J t + A (1 - t), per channel.
[[nodiscard]] inline RasterImage synthesize_haze(const RasterImage& clean, const BlindnessMap& t,
                                                 const AtmosphericLight& light) {
    require_same_size(clean, t, "synthesize_haze");
    RasterImage out(clean.height(), clean.width(), clean.channels());
    const int c = clean.channels();
    for (int y = 0; y < clean.height(); ++y) {
        for (int x = 0; x < clean.width(); ++x) {
            const double tx = t.at(y, x);
            for (int k = 0; k < c; ++k) {
                const double a = light.rgb[std::min(k, 2)];
                out.at(y, x, k) = clamp01(clean.at(y, x, k) * tx + a * (1.0 - tx));
            }
        }
    }
    return out;
}

/// Min over a patch x patch window of the per-pixel channel minimum.
[[nodiscard]] inline ScalarMap dark_channel(const RasterImage& img, int patch) {
    if (img.channels() != 3) throw std::invalid_argument("dark_channel: expected a 3-channel image");
    if (patch < 1 || patch % 2 == 0) throw std::invalid_argument("dark_channel: patch must be odd and >= 1");
    ScalarMap per_pixel(img.height(), img.width());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            per_pixel.at(y, x) = std::min({img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2)});
        }
    }
    return min_filter(per_pixel, patch / 2);
}

/// Among the brightest 0.1% of dark-channel pixels, the color of the one with
/// the largest channel sum. Ties resolve to the earliest pixel in scan order.
[[nodiscard]] inline AtmosphericLight estimate_atmospheric_light(const RasterImage& img, int patch = 15) {
    if (img.channels() != 3) throw std::invalid_argument("estimate_atmospheric_light: expected 3 channels");
    if (img.empty()) throw std::invalid_argument("estimate_atmospheric_light: empty image");
    const ScalarMap dark = dark_channel(img, patch);
    const std::size_t n = dark.pixel_count();
    const std::size_t top = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.001 * n)));

    std::vector<std::uint32_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
    auto brighter = [&](std::uint32_t a, std::uint32_t b) {
        const float va = dark.values()[a];
        const float vb = dark.values()[b];
        return va != vb ? va > vb : a < b;
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(), brighter);

    const int w = img.width();
    std::uint32_t best = order[0];
    double best_sum = -1.0;
    for (std::size_t i = 0; i < top; ++i) {
        const std::uint32_t p = order[i];
        const int y = static_cast<int>(p / w);
        const int x = static_cast<int>(p % w);
        const double s = static_cast<double>(img.at(y, x, 0)) + img.at(y, x, 1) + img.at(y, x, 2);
        if (s > best_sum || (s == best_sum && p < best)) {
            best_sum = s;
            best = p;
        }
    }
    const int y = static_cast<int>(best / w);
    const int x = static_cast<int>(best % w);
    return AtmosphericLight{{img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2)}};
}

/// 1 - omega * dark_channel(I / A), before clamping or refinement.
[[nodiscard]] inline ScalarMap raw_transmission_dcp(const RasterImage& hazy, const AtmosphericLight& light,
                                                    double omega, int patch = 15) {
    if (hazy.channels() != 3) throw std::invalid_argument("estimate_transmission_dcp: expected 3 channels");
    for (float a : light.rgb) {
        if (!(a > 0.0f)) throw std::invalid_argument("estimate_transmission_dcp: atmospheric light channel is zero");
    }
    RasterImage normalized(hazy.height(), hazy.width(), 3);
    for (int y = 0; y < hazy.height(); ++y) {
        for (int x = 0; x < hazy.width(); ++x) {
            for (int k = 0; k < 3; ++k) {
                normalized.at(y, x, k) = static_cast<float>(static_cast<double>(hazy.at(y, x, k)) / light.rgb[k]);
            }
        }
    }
    ScalarMap t = dark_channel(normalized, patch);
    for (float& v : t.values()) v = static_cast<float>(1.0 - omega * v);
    return t;
}

/// DCP transmission: raw estimate clamped to [t_floor, 1], then refined by a
/// guided filter on the gray image and clamped again.
[[nodiscard]] inline BlindnessMap estimate_transmission_dcp(const RasterImage& hazy, const AtmosphericLight& light,
                                                            const HazeParams& params = {}) {
    ScalarMap t = raw_transmission_dcp(hazy, light, params.omega, params.patch);
    const auto floor = static_cast<float>(params.t_floor);
    for (float& v : t.values()) v = std::clamp(v, floor, 1.0f);
    const ScalarMap refined = guided_filter(channel_mean(hazy), t, params.guide_radius, params.guide_eps);
    BlindnessMap out(refined.height(), refined.width());
    std::transform(refined.values().begin(), refined.values().end(), out.values().begin(),
                   [floor](float v) { return std::clamp(v, floor, 1.0f); });
    return out;
}

/// Full baseline: estimate A from the hazy image, then haze amount = 1 - t.
[[nodiscard]] inline BlindnessMap estimate_haze_amount(const RasterImage& hazy, const HazeParams& params = {}) {
    const AtmosphericLight light = estimate_atmospheric_light(hazy, params.patch);
    AtmosphericLight safe = light;
    for (float& a : safe.rgb) a = std::max(a, 1.0f / 255.0f);
    return haze_ground_truth(estimate_transmission_dcp(hazy, safe, params));
}

/// J = (I - A(1 - t)) / t; pixels with t below t_min are left at 0.
[[nodiscard]] inline RasterImage invert_haze(const RasterImage& hazy, const BlindnessMap& t,
                                             const AtmosphericLight& light, double t_min = 0.05) {
    require_same_size(hazy, t, "invert_haze");
    RasterImage out(hazy.height(), hazy.width(), hazy.channels());
    for (int y = 0; y < hazy.height(); ++y) {
        for (int x = 0; x < hazy.width(); ++x) {
            const double tx = t.at(y, x);
            if (tx <= t_min) continue;
            for (int k = 0; k < hazy.channels(); ++k) {
                const double a = light.rgb[std::min(k, 2)];
                out.at(y, x, k) = static_cast<float>((hazy.at(y, x, k) - a * (1.0 - tx)) / tx);
            }
        }
    }
    return out;
}

}  // namespace blindsynth::haze
