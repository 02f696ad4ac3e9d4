#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "blindsynth/core/grid.hpp"
#include "blindsynth/flow.hpp"

namespace blindsynth::motion {

/// Backward warp by s * flow: out(x) = img(x - s * flow(x)), bilinear with
/// border clamping. For f1(x) = f0(x - d) and flow d this yields the frame at
/// time s.
[[nodiscard]] inline RasterImage warp(const RasterImage& img, const FlowField& flow, double s) {
    require_same_size(img, flow, "warp");
    if (flow.channels() != 2) throw std::invalid_argument("warp: flow must have 2 channels");
    if (s == 0.0) return img;
    RasterImage out(img.height(), img.width(), img.channels());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const double sx = x - s * flow.at(y, x, 0);
            const double sy = y - s * flow.at(y, x, 1);
            for (int c = 0; c < img.channels(); ++c) {
                out.at(y, x, c) = clamp01(detail::sample(img, sy, sx, c));
            }
        }
    }
    return out;
}

/// n in-between frames at s_i = i / (n + 1), blending the forward warp of f0
/// and the backward warp of f1 with weights (1 - s_i, s_i). f01 and f10 are the
/// forward (f0 -> f1) and backward (f1 -> f0) flows.
[[nodiscard]] inline std::vector<RasterImage> interpolate_frames(const RasterImage& f0, const RasterImage& f1,
                                                                 const FlowField& f01, const FlowField& f10, int n) {
    require_same_size(f0, f1, "interpolate_frames");
    if (n < 1) throw std::invalid_argument("interpolate_frames: n must be >= 1");
    std::vector<RasterImage> frames;
    frames.reserve(n);
    for (int i = 1; i <= n; ++i) {
        const double s = static_cast<double>(i) / (n + 1);
        const RasterImage a = warp(f0, f01, s);
        const RasterImage b = warp(f1, f10, 1.0 - s);
        RasterImage mix(f0.height(), f0.width(), f0.channels());
        for (std::size_t k = 0; k < mix.values().size(); ++k) {
            mix.values()[k] = clamp01((1.0 - s) * a.values()[k] + s * b.values()[k]);
        }
        frames.push_back(std::move(mix));
    }
    return frames;
}

/// Same, estimating both flows with dense_flow.
[[nodiscard]] inline std::vector<RasterImage> interpolate_frames(const RasterImage& f0, const RasterImage& f1, int n,
                                                                 const FlowParams& params = {}) {
    require_same_size(f0, f1, "interpolate_frames");
    if (f0.channels() != f1.channels()) throw SizeMismatchError("interpolate_frames: channel mismatch");
    if (n < 1) throw std::invalid_argument("interpolate_frames: n must be >= 1");
    return interpolate_frames(f0, f1, dense_flow(f0, f1, params), dense_flow(f1, f0, params), n);
}

/// Pixel-wise mean of exactly five frames.
[[nodiscard]] inline RasterImage synthesize_motion_blur(std::span<const RasterImage> frames) {
    if (frames.size() != 5) throw std::invalid_argument("synthesize_motion_blur: expected exactly 5 frames");
    for (const auto& f : frames) {
        require_same_size(frames[0], f, "synthesize_motion_blur");
        if (f.channels() != frames[0].channels()) throw SizeMismatchError("synthesize_motion_blur: channel mismatch");
    }
    RasterImage out(frames[0].height(), frames[0].width(), frames[0].channels());
    for (std::size_t k = 0; k < out.values().size(); ++k) {
        double s = 0.0;
        for (const auto& f : frames) s += f.values()[k];
        out.values()[k] = clamp01(s / 5.0);
    }
    return out;
}

/// clamp(|flow| / v_max, 0, 1).
[[nodiscard]] inline BlindnessMap motion_ground_truth(const FlowField& flow, double v_max) {
    if (!(v_max > 0.0)) throw std::invalid_argument("motion_ground_truth: v_max must be > 0");
    if (flow.channels() != 2) throw std::invalid_argument("motion_ground_truth: flow must have 2 channels");
    BlindnessMap out(flow.height(), flow.width());
    for (int y = 0; y < flow.height(); ++y) {
        for (int x = 0; x < flow.width(); ++x) {
            out.at(y, x) = clamp01(std::hypot(flow.at(y, x, 0), flow.at(y, x, 1)) / v_max);
        }
    }
    return out;
}

/// Binary locator of motion regions: amount > threshold.
[[nodiscard]] inline BinaryMap motion_mask(const BlindnessMap& amount, double threshold = 0.02) {
    BinaryMap out(amount.height(), amount.width());
    for (std::size_t i = 0; i < amount.values().size(); ++i) out.values()[i] = amount.values()[i] > threshold ? 1 : 0;
    return out;
}

struct MotionResult {
    RasterImage image;
    FlowField flow;
    BlindnessMap ground_truth;
    BinaryMap mask;
};

/// Endpoint pair -> three interpolated frames -> five-frame average. Ground
/// truth is the flow magnitude between the endpoints.
[[nodiscard]] inline MotionResult synthesize_motion(const RasterImage& f0, const RasterImage& f1, double v_max = 32.0,
                                                    const FlowParams& params = {}, double mask_threshold = 0.02) {
    MotionResult r;
    std::vector<RasterImage> frames;
    frames.reserve(5);
    frames.push_back(f0);
    r.flow = dense_flow(f0, f1, params);
    for (auto& f : interpolate_frames(f0, f1, r.flow, dense_flow(f1, f0, params), 3)) frames.push_back(std::move(f));
    frames.push_back(f1);
    r.image = synthesize_motion_blur(frames);
    r.ground_truth = motion_ground_truth(r.flow, v_max);
    r.mask = motion_mask(r.ground_truth, mask_threshold);
    return r;
}

}  // namespace blindsynth::motion
