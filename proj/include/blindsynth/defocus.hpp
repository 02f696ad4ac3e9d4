#pragma once

// Depth-layered defocus rendering with occlusion masks. Layer 0 is the
// farthest inverse-depth bin and layer K-1 the nearest; the occlusion term of
// layer k multiplies over the blurred masks of every nearer layer.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "blindsynth/core/depth.hpp"
#include "blindsynth/core/grid.hpp"

namespace blindsynth::defocus {

struct CocModel {
    double focus_depth = 10.0;  // m
    double kappa = 0.0;         // px * m
    int max_diameter = 31;      // px, odd

    void validate() const {
        if (!(focus_depth > 0.0) || !std::isfinite(focus_depth)) throw std::invalid_argument("focus depth must be > 0");
        if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("kappa must be >= 0");
        if (max_diameter < 1 || max_diameter % 2 == 0) throw std::invalid_argument("max diameter must be odd and >= 1");
    }

    /// D = clamp(kappa * |1/d_f - 1/d|, 0, D_max).
    [[nodiscard]] double diameter(double depth) const noexcept {
        const double d = kappa * std::abs(1.0 / focus_depth - 1.0 / depth);
        return std::clamp(d, 0.0, static_cast<double>(max_diameter));
    }
};

[[nodiscard]] inline ScalarMap coc_diameter_map(const DepthMap& depth, const CocModel& model) {
    model.validate();
    if (!depth.is_dense()) throw std::invalid_argument("coc_diameter_map: depth must be dense");
    ScalarMap out(depth.height(), depth.width());
    for (int y = 0; y < depth.height(); ++y) {
        for (int x = 0; x < depth.width(); ++x) {
            out.at(y, x) = static_cast<float>(model.diameter(depth.depth(y, x)));
        }
    }
    return out;
}

[[nodiscard]] inline BlindnessMap defocus_ground_truth(const ScalarMap& diameters, int max_diameter) {
    if (max_diameter < 1) throw std::invalid_argument("defocus_ground_truth: max diameter must be >= 1");
    BlindnessMap out(diameters.height(), diameters.width());
    std::transform(diameters.values().begin(), diameters.values().end(), out.values().begin(),
                   [max_diameter](float d) { return clamp01(static_cast<double>(d) / max_diameter); });
    return out;
}

/// Uniform disk. Offsets (dx, dy) belong to the support when
/// dx^2 + dy^2 <= ((D - 1) / 2)^2, so an odd diameter D spans exactly D pixels.
struct DiskKernel {
    int radius = 0;
    std::vector<int> half_width{0};  // per row dy = -radius..radius
    double weight = 1.0;          // every support entry
    int support = 1;

    [[nodiscard]] bool identity() const noexcept { return radius == 0; }

    /// Dense (2r+1)^2 form.
    [[nodiscard]] ScalarMap dense() const {
        const int n = 2 * radius + 1;
        ScalarMap k(n, n);
        for (int dy = -radius; dy <= radius; ++dy) {
            const int hw = half_width[dy + radius];
            for (int dx = -hw; dx <= hw; ++dx) k.at(dy + radius, dx + radius) = static_cast<float>(weight);
        }
        return k;
    }
};

[[nodiscard]] inline DiskKernel disk_kernel(double diameter) {
    if (!(diameter >= 0.0) || !std::isfinite(diameter)) throw std::invalid_argument("disk_kernel: diameter must be >= 0");
    DiskKernel k;
    if (diameter <= 1.0) {
        k.half_width = {0};
        return k;
    }
    const double r = (diameter - 1.0) / 2.0;
    const double r2 = r * r + 1e-9;
    k.radius = static_cast<int>(std::floor(r + 1e-9));
    k.half_width.resize(2 * k.radius + 1);
    k.support = 0;
    for (int dy = -k.radius; dy <= k.radius; ++dy) {
        int hw = 0;
        while (static_cast<double>(hw + 1) * (hw + 1) + static_cast<double>(dy) * dy <= r2) ++hw;
        k.half_width[dy + k.radius] = hw;
        k.support += 2 * hw + 1;
    }
    k.weight = 1.0 / k.support;
    return k;
}

namespace detail {

struct Box {
    int y0, y1, x0, x1;  // inclusive; empty when y0 > y1
};

/// Convolution of a multi-channel double grid with a disk, edge-clamped,
/// evaluated only inside `region`. Each disk row is a horizontal span, so each
/// output costs one prefix-sum difference per kernel row.
inline Grid<double, ScalarTag> convolve_disk(const Grid<double, ScalarTag>& src, const DiskKernel& kernel,
                                             const Box& region) {
    const int h = src.height();
    const int w = src.width();
    const int c = src.channels();
    Grid<double, ScalarTag> out(h, w, c);
    if (region.y0 > region.y1) return out;
    if (kernel.identity()) {
        for (int y = region.y0; y <= region.y1; ++y) {
            for (int x = region.x0; x <= region.x1; ++x) {
                for (int k = 0; k < c; ++k) out.at(y, x, k) = src.at(y, x, k);
            }
        }
        return out;
    }
    const int r = kernel.radius;
    const int row_lo = std::max(0, region.y0 - r);
    const int row_hi = std::min(h - 1, region.y1 + r);
    const int pw = w + 2 * r + 1;
    // prefix[(row - row_lo)][channel][i]: sum of clamped row over padded indices < i
    std::vector<double> prefix(static_cast<std::size_t>(row_hi - row_lo + 1) * c * pw);
    for (int y = row_lo; y <= row_hi; ++y) {
        for (int k = 0; k < c; ++k) {
            double* p = prefix.data() + (static_cast<std::size_t>(y - row_lo) * c + k) * pw;
            p[0] = 0.0;
            for (int i = 0; i < w + 2 * r; ++i) {
                const int x = std::clamp(i - r, 0, w - 1);
                p[i + 1] = p[i] + src.at(y, x, k);
            }
        }
    }
    for (int y = region.y0; y <= region.y1; ++y) {
        for (int dy = -r; dy <= r; ++dy) {
            const int sy = std::clamp(y + dy, 0, h - 1);
            const int hw = kernel.half_width[dy + r];
            for (int k = 0; k < c; ++k) {
                const double* p = prefix.data() + (static_cast<std::size_t>(sy - row_lo) * c + k) * pw;
                for (int x = region.x0; x <= region.x1; ++x) {
                    // padded index of column x is x + r
                    out.at(y, x, k) += p[x + r + hw + 1] - p[x + r - hw];
                }
            }
        }
        for (int x = region.x0; x <= region.x1; ++x) {
            for (int k = 0; k < c; ++k) out.at(y, x, k) *= kernel.weight;
        }
    }
    return out;
}

}  // namespace detail

struct DepthLayer {
    double inverse_lo = 0.0;
    double inverse_hi = 0.0;
    double representative_depth = 0.0;  // m
    double diameter = 0.0;              // px
    std::size_t pixel_count = 0;
    BinaryMap mask;            // A_k
    BinaryMap extension_mask;  // A*_k
    RasterImage extended;      // L*_k, meaningful where extension_mask is set
    DiskKernel kernel;         // h(k)

    [[nodiscard]] bool empty() const noexcept { return pixel_count == 0; }
};

struct DepthLayerSet {
    RasterImage image;  // L
    std::vector<DepthLayer> layers;
    int band = 0;
};

/// Splits the scene into K equal bins in inverse depth. Each layer carries its
/// membership mask, the replicated extension of its pixels into nearer-layer
/// pixels within a ceil(D_max/2) band, and the disk for the CoC at the bin's
/// inverse-depth midpoint.
[[nodiscard]] inline DepthLayerSet decompose_layers(const RasterImage& img, const DepthMap& depth, int layer_count,
                                                    const CocModel& model) {
    if (layer_count < 2) throw std::invalid_argument("decompose_layers: need at least 2 layers");
    if (!depth.is_dense()) throw std::invalid_argument("decompose_layers: depth must be dense");
    require_same_size(img, depth, "decompose_layers");
    model.validate();

    const int h = img.height();
    const int w = img.width();
    double inv_lo = std::numeric_limits<double>::infinity();
    double inv_hi = -std::numeric_limits<double>::infinity();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double inv = 1.0 / depth.depth(y, x);
            inv_lo = std::min(inv_lo, inv);
            inv_hi = std::max(inv_hi, inv);
        }
    }
    const double span = inv_hi - inv_lo;

    std::vector<int> bin(static_cast<std::size_t>(h) * w, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int b = 0;
            if (span > 0.0) {
                const double u = (1.0 / depth.depth(y, x) - inv_lo) / span;
                b = std::min(layer_count - 1, static_cast<int>(std::floor(u * layer_count)));
            }
            bin[static_cast<std::size_t>(y) * w + x] = b;
        }
    }

    DepthLayerSet set;
    set.image = img;
    set.band = (model.max_diameter + 1) / 2;
    set.layers.resize(layer_count);
    for (int k = 0; k < layer_count; ++k) {
        DepthLayer& layer = set.layers[k];
        layer.inverse_lo = inv_lo + span * k / layer_count;
        layer.inverse_hi = inv_lo + span * (k + 1) / layer_count;
        const double mid = span > 0.0 ? 0.5 * (layer.inverse_lo + layer.inverse_hi) : inv_lo;
        layer.representative_depth = 1.0 / mid;
        layer.diameter = model.diameter(layer.representative_depth);
        layer.kernel = disk_kernel(layer.diameter);
        layer.mask = BinaryMap(h, w);
        for (std::size_t i = 0; i < bin.size(); ++i) {
            if (bin[i] == k) {
                layer.mask.values()[i] = 1;
                ++layer.pixel_count;
            }
        }
    }

    const int c = img.channels();
    for (int k = 0; k < layer_count; ++k) {
        DepthLayer& layer = set.layers[k];
        layer.extension_mask = BinaryMap(h, w);
        if (layer.empty() || k == layer_count - 1) continue;
        const NearestSeeds nearest = nearest_seeds(layer.mask, Connectivity::Eight, set.band);
        layer.extended = RasterImage(h, w, c);
        for (std::size_t i = 0; i < bin.size(); ++i) {
            if (bin[i] <= k || nearest.seed[i] < 0) continue;
            layer.extension_mask.values()[i] = 1;
            const auto s = static_cast<std::size_t>(nearest.seed[i]);
            for (int ch = 0; ch < c; ++ch) {
                layer.extended.values()[i * c + ch] = img.values()[s * c + ch];
            }
        }
    }
    return set;
}

/// Composites sum_k [(A_k L + A*_k L*_k) * h(k)] M_k with
/// M_k = prod_{k' nearer than k} (1 - A_k' * h(k')), then divides by the same
/// composite of the all-ones image so constant regions are fixed points.
[[nodiscard]] inline RasterImage layered_defocus_blur(const DepthLayerSet& set) {
    const RasterImage& img = set.image;
    const int h = img.height();
    const int w = img.width();
    const int c = img.channels();
    const std::size_t n = static_cast<std::size_t>(h) * w;

    std::vector<double> num(n * c, 0.0);
    std::vector<double> den(n, 0.0);
    std::vector<double> visible(n, 1.0);

    for (int k = static_cast<int>(set.layers.size()) - 1; k >= 0; --k) {
        const DepthLayer& layer = set.layers[k];
        if (layer.empty()) continue;

        // Channels: c image terms, extended weight, membership mask.
        Grid<double, ScalarTag> src(h, w, c + 2);
        detail::Box support{h, -1, w, -1};
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * w + x;
                const bool inside = layer.mask.values()[i] != 0;
                const bool ext = !inside && layer.extension_mask.values()[i] != 0;
                if (!inside && !ext) continue;
                for (int ch = 0; ch < c; ++ch) {
                    src.at(y, x, ch) = inside ? img.values()[i * c + ch] : layer.extended.values()[i * c + ch];
                }
                src.at(y, x, c) = 1.0;
                src.at(y, x, c + 1) = inside ? 1.0 : 0.0;
                support.y0 = std::min(support.y0, y);
                support.y1 = std::max(support.y1, y);
                support.x0 = std::min(support.x0, x);
                support.x1 = std::max(support.x1, x);
            }
        }
        const int r = layer.kernel.radius;
        const detail::Box region{std::max(0, support.y0 - r), std::min(h - 1, support.y1 + r),
                                 std::max(0, support.x0 - r), std::min(w - 1, support.x1 + r)};
        const auto blurred = detail::convolve_disk(src, layer.kernel, region);
        for (int y = region.y0; y <= region.y1; ++y) {
            for (int x = region.x0; x <= region.x1; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * w + x;
                const double m = visible[i];
                if (m == 0.0) continue;
                for (int ch = 0; ch < c; ++ch) num[i * c + ch] += blurred.at(y, x, ch) * m;
                den[i] += blurred.at(y, x, c) * m;
                visible[i] = m * (1.0 - blurred.at(y, x, c + 1));
            }
        }
    }

    RasterImage out(h, w, c);
    for (std::size_t i = 0; i < n; ++i) {
        for (int ch = 0; ch < c; ++ch) {
            out.values()[i * c + ch] = den[i] > 0.0 ? clamp01(num[i * c + ch] / den[i]) : img.values()[i * c + ch];
        }
    }
    return out;
}

/// Per-image calibration: focus at the given depth quantile, kappa
/// chosen so the 99th-percentile diameter equals p99_fraction * D_max.
[[nodiscard]] inline CocModel calibrate_coc_model(const DepthMap& depth, double focus_quantile, double p99_fraction,
                                                  int max_diameter) {
    CocModel model;
    model.max_diameter = max_diameter;
    model.focus_depth = depth_quantile(depth, focus_quantile);
    std::vector<double> g;
    g.reserve(depth.pixel_count());
    for (int y = 0; y < depth.height(); ++y) {
        for (int x = 0; x < depth.width(); ++x) {
            if (depth.valid(y, x)) g.push_back(std::abs(1.0 / model.focus_depth - 1.0 / depth.depth(y, x)));
        }
    }
    std::sort(g.begin(), g.end());
    const double p99 = g[static_cast<std::size_t>(std::llround(0.99 * (g.size() - 1)))];
    model.kappa = p99 > 0.0 ? p99_fraction * max_diameter / p99 : 0.0;
    model.validate();
    return model;
}

struct DefocusResult {
    RasterImage image;
    ScalarMap diameters;
    BlindnessMap ground_truth;
};

[[nodiscard]] inline DefocusResult synthesize_defocus(const RasterImage& img, const DepthMap& depth,
                                                      const CocModel& model, int layer_count = 16) {
    DefocusResult r;
    r.image = layered_defocus_blur(decompose_layers(img, depth, layer_count, model));
    r.diameters = coc_diameter_map(depth, model);
    r.ground_truth = defocus_ground_truth(r.diameters, model.max_diameter);
    return r;
}

}  // namespace blindsynth::defocus
