#pragma once

// Procedural RGB + metric-depth street scenes for smoke corpora, benchmarks
// and closed-loop tests. A flat ground plane under a sky band, with box
// "vehicles" standing on it that translate horizontally over time.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>
#include <stdexcept>
#include <vector>

#include "blindsynth/core/depth.hpp"
#include "blindsynth/core/grid.hpp"
#include "blindsynth/core/png_io.hpp"
#include "blindsynth/core/random.hpp"

namespace blindsynth::synthetic {

/// Value noise in [0, 1]: random lattice every `cell` pixels, smoothstep
/// interpolated, two octaves.
[[nodiscard]] inline RasterImage smooth_noise(int height, int width, int channels, double cell, std::uint64_t seed) {
    if (height < 1 || width < 1 || channels < 1) throw std::invalid_argument("smooth_noise: bad size");
    if (!(cell >= 1.0)) throw std::invalid_argument("smooth_noise: cell must be >= 1");
    RasterImage out(height, width, channels);
    Xoshiro256 rng(seed);
    const std::array<double, 2> cells{cell, std::max(1.0, cell / 2.0)};
    const std::array<double, 2> amps{0.65, 0.35};
    for (int o = 0; o < 2; ++o) {
        const int gh = static_cast<int>(std::ceil(height / cells[o])) + 2;
        const int gw = static_cast<int>(std::ceil(width / cells[o])) + 2;
        std::vector<double> lattice(static_cast<std::size_t>(gh) * gw * channels);
        for (double& v : lattice) v = rng.uniform();
        auto at = [&](int gy, int gx, int c) { return lattice[(static_cast<std::size_t>(gy) * gw + gx) * channels + c]; };
        for (int y = 0; y < height; ++y) {
            const double fy = y / cells[o];
            const int y0 = static_cast<int>(fy);
            double ty = fy - y0;
            ty = ty * ty * (3.0 - 2.0 * ty);
            for (int x = 0; x < width; ++x) {
                const double fx = x / cells[o];
                const int x0 = static_cast<int>(fx);
                double tx = fx - x0;
                tx = tx * tx * (3.0 - 2.0 * tx);
                for (int c = 0; c < channels; ++c) {
                    const double top = at(y0, x0, c) * (1 - tx) + at(y0, x0 + 1, c) * tx;
                    const double bot = at(y0 + 1, x0, c) * (1 - tx) + at(y0 + 1, x0 + 1, c) * tx;
                    out.at(y, x, c) += static_cast<float>(amps[o] * (top * (1 - ty) + bot * ty));
                }
            }
        }
    }
    return out;
}

/// Sub-image [y0, y0+h) x [x0, x0+w); must lie inside the source.
template <typename T, typename Tag>
[[nodiscard]] Grid<T, Tag> crop(const Grid<T, Tag>& src, int y0, int x0, int h, int w) {
    if (y0 < 0 || x0 < 0 || h < 1 || w < 1 || y0 + h > src.height() || x0 + w > src.width()) {
        throw std::out_of_range("crop: window outside source");
    }
    Grid<T, Tag> out(h, w, src.channels());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < src.channels(); ++c) out.at(y, x, c) = src.at(y0 + y, x0 + x, c);
        }
    }
    return out;
}

struct ToySceneSpec {
    int height = 128;
    int width = 192;
    std::uint64_t seed = 1;
    int objects = 4;
    /// Flat per-region colors (no texture): the regime where the dark-channel
    /// prior holds exactly.
    bool constant_albedo = false;
    double sky_fraction = 0.15;  // 0 for no sky
    double max_depth = 80.0;
    double min_depth = 2.0;
};

struct ToyFrame {
    RasterImage rgb;
    DepthMap depth;  // dense, meters
};

namespace detail {

struct ToyObject {
    double depth;
    double x_center;
    double velocity;  // px / frame
    std::array<float, 3> color;
    std::uint64_t texture_seed;
};

/// A color whose smallest channel is dark, so its dark channel is near zero.
inline std::array<float, 3> dark_channel_color(Xoshiro256& rng) {
    std::array<float, 3> c{};
    for (float& v : c) v = static_cast<float>(rng.uniform(0.25, 0.85));
    c[rng.below(3)] = static_cast<float>(rng.uniform(0.02, 0.08));
    return c;
}

}  // namespace detail

/// Frame `t` of the scene. Objects move by velocity * t pixels; the camera and
/// ground are static.
[[nodiscard]] inline ToyFrame render_toy_frame(const ToySceneSpec& spec, int t) {
    if (spec.height < 8 || spec.width < 8) throw std::invalid_argument("toy scene must be at least 8x8");
    const int h = spec.height;
    const int w = spec.width;
    const double focal = h;  // px
    const double cam_height = 1.65;
    const int horizon = std::clamp(static_cast<int>(std::lround(spec.sky_fraction * h)), 0, h - 2);

    Xoshiro256 rng(derive_seed({spec.seed, 0x746f79ULL}));
    const std::array<float, 3> sky{0.62f, 0.74f, 0.9f};
    const std::array<float, 3> ground = detail::dark_channel_color(rng);
    std::vector<detail::ToyObject> objects;
    for (int i = 0; i < spec.objects; ++i) {
        detail::ToyObject o{};
        o.depth = rng.uniform(5.0, 30.0);
        o.x_center = rng.uniform(0.1, 0.9) * w;
        o.velocity = rng.uniform(-3.0, 3.0);
        o.color = detail::dark_channel_color(rng);
        o.texture_seed = rng();
        objects.push_back(o);
    }
    std::sort(objects.begin(), objects.end(), [](const auto& a, const auto& b) { return a.depth > b.depth; });

    ToyFrame f{RasterImage(h, w, 3), DepthMap(h, w)};
    const RasterImage ground_tex =
        spec.constant_albedo ? RasterImage() : smooth_noise(h, w, 1, 5.0, derive_seed({spec.seed, 0x67ULL}));
    for (int y = 0; y < h; ++y) {
        const bool is_sky = y < horizon;
        const double d = is_sky ? spec.max_depth
                                : std::clamp(cam_height * focal / (y - horizon + 0.5), spec.min_depth, spec.max_depth);
        for (int x = 0; x < w; ++x) {
            const auto& col = is_sky ? sky : ground;
            const float m = (is_sky || spec.constant_albedo) ? 1.0f : 0.7f + 0.3f * ground_tex.at(y, x);
            for (int c = 0; c < 3; ++c) f.rgb.at(y, x, c) = col[c] * m;
            f.depth.set(y, x, static_cast<float>(d));
        }
    }

    for (const auto& o : objects) {
        const int bottom = std::min(h - 1, horizon + static_cast<int>(std::lround(cam_height * focal / o.depth)));
        const int oh = std::max(2, static_cast<int>(std::lround(1.5 * focal / o.depth)));
        const int ow = std::max(3, static_cast<int>(std::lround(3.5 * focal / o.depth)));
        const double cx = o.x_center + o.velocity * t;
        const int x0 = static_cast<int>(std::lround(cx - ow / 2.0));
        const int y0 = bottom - oh + 1;
        RasterImage tex;
        if (!spec.constant_albedo) tex = smooth_noise(oh, ow, 1, 4.0, o.texture_seed);
        for (int y = std::max(0, y0); y <= bottom; ++y) {
            for (int x = std::max(0, x0); x < std::min(w, x0 + ow); ++x) {
                const float m = spec.constant_albedo ? 1.0f : 0.6f + 0.4f * tex.at(y - y0, x - x0);
                for (int c = 0; c < 3; ++c) f.rgb.at(y, x, c) = o.color[c] * m;
                f.depth.set(y, x, static_cast<float>(o.depth));
            }
        }
    }
    return f;
}

/// LiDAR-like sparsification: keeps every `row_stride`-th row and drops
/// everything above `top_rows` (no returns from the sky).
[[nodiscard]] inline DepthMap sparsify_depth(const DepthMap& dense, int row_stride, int top_rows = 0) {
    if (row_stride < 1) throw std::invalid_argument("sparsify_depth: row_stride must be >= 1");
    DepthMap out = dense;
    for (int y = 0; y < dense.height(); ++y) {
        if (y < top_rows || y % row_stride != 0) {
            for (int x = 0; x < dense.width(); ++x) out.invalidate(y, x);
        }
    }
    return out;
}

struct ToyCorpusSpec {
    int sequences = 1;
    int frames_per_sequence = 2;
    ToySceneSpec scene{.height = 48, .width = 64};
    int depth_row_stride = 3;
};

[[nodiscard]] inline std::string toy_frame_name(int i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%010d.png", i);
    return buf;
}

/// KITTI-shaped corpus: rgb/seq_NN/<frame>.png and sparse uint16 depth under
/// depth/ with the same relative paths. Sequence s uses scene seed
/// scene.seed + 1000 s. Returns {rgb_root, depth_root}.
inline std::pair<std::filesystem::path, std::filesystem::path> write_toy_corpus(const std::filesystem::path& root,
                                                                              const ToyCorpusSpec& spec) {
    if (spec.sequences < 1 || spec.frames_per_sequence < 1) throw std::invalid_argument("toy corpus must be nonempty");
    const auto rgb = root / "rgb";
    const auto depth = root / "depth";
    for (int s = 0; s < spec.sequences; ++s) {
        char seq[32];
        std::snprintf(seq, sizeof seq, "seq_%02d", s);
        std::filesystem::create_directories(rgb / seq);
        std::filesystem::create_directories(depth / seq);
        ToySceneSpec scene = spec.scene;
        scene.seed = spec.scene.seed + static_cast<std::uint64_t>(s) * 1000;
        const int sky_rows = static_cast<int>(scene.sky_fraction * scene.height);
        for (int t = 0; t < spec.frames_per_sequence; ++t) {
            const ToyFrame f = render_toy_frame(scene, t);
            save_image(f.rgb, rgb / seq / toy_frame_name(t));
            save_depth(sparsify_depth(f.depth, spec.depth_row_stride, sky_rows), depth / seq / toy_frame_name(t));
        }
    }
    return {rgb, depth};
}

}  // namespace blindsynth::synthetic
