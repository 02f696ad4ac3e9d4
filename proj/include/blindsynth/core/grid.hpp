#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "blindsynth/core/error.hpp"

namespace blindsynth {

/// Row-major H x W x C pixel storage. The Tag parameter only makes
/// otherwise-identical grids (images, blindness maps, flow) distinct types.
template <typename T, typename Tag>
class Grid {
public:
    using value_type = T;

    Grid() = default;

    Grid(int height, int width, int channels = 1, T fill = T{})
        : height_(height), width_(width), channels_(channels) {
        if (height < 0 || width < 0 || channels < 1) {
            throw std::invalid_argument("grid dimensions must be non-negative with at least one channel");
        }
        data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
    }

    Grid(int height, int width, int channels, std::vector<T> data)
        : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
        if (height < 0 || width < 0 || channels < 1) {
            throw std::invalid_argument("grid dimensions must be non-negative with at least one channel");
        }
        if (data_.size() != static_cast<std::size_t>(height) * width * channels) {
            throw std::invalid_argument("grid data length does not match height*width*channels");
        }
    }

    [[nodiscard]] int height() const noexcept { return height_; }
    [[nodiscard]] int width() const noexcept { return width_; }
    [[nodiscard]] int channels() const noexcept { return channels_; }
    [[nodiscard]] std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(height_) * width_;
    }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    [[nodiscard]] std::size_t index(int y, int x, int c = 0) const noexcept {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    [[nodiscard]] T& at(int y, int x, int c = 0) noexcept { return data_[index(y, x, c)]; }
    [[nodiscard]] const T& at(int y, int x, int c = 0) const noexcept { return data_[index(y, x, c)]; }

    /// Edge-clamped read.
    [[nodiscard]] const T& clamped(int y, int x, int c = 0) const noexcept {
        y = std::clamp(y, 0, height_ - 1);
        x = std::clamp(x, 0, width_ - 1);
        return data_[index(y, x, c)];
    }

    [[nodiscard]] std::span<T> values() noexcept { return data_; }
    [[nodiscard]] std::span<const T> values() const noexcept { return data_; }
    [[nodiscard]] std::span<T> row(int y) noexcept {
        return std::span<T>(data_).subspan(index(y, 0), static_cast<std::size_t>(width_) * channels_);
    }
    [[nodiscard]] std::span<const T> row(int y) const noexcept {
        return std::span<const T>(data_).subspan(index(y, 0), static_cast<std::size_t>(width_) * channels_);
    }

    [[nodiscard]] bool same_shape(int h, int w) const noexcept { return height_ == h && width_ == w; }
    template <typename U, typename OtherTag>
    [[nodiscard]] bool same_size(const Grid<U, OtherTag>& other) const noexcept {
        return height_ == other.height() && width_ == other.width();
    }

    friend bool operator==(const Grid& a, const Grid& b) = default;

private:
    int height_ = 0;
    int width_ = 0;
    int channels_ = 1;
    std::vector<T> data_;
};

struct ImageTag {};
struct BlindnessTag {};
struct ScalarTag {};
struct BinaryTag {};
struct FlowTag {};

/// Pixels in [0,1], 1 or 3 channels.
using RasterImage = Grid<float, ImageTag>;
/// Per-pixel blindness amount in [0,1]; also carries transmission maps.
using BlindnessMap = Grid<float, BlindnessTag>;
/// Unconstrained single-channel real map (diameters, dark channel, ...).
using ScalarMap = Grid<float, ScalarTag>;
/// Strictly {0,1}.
using BinaryMap = Grid<std::uint8_t, BinaryTag>;
/// Two channels: u (x displacement) then v (y displacement), in pixels.
using FlowField = Grid<float, FlowTag>;

/// Reinterpret a grid under a different tag; values are copied unchanged.
template <typename ToTag, typename T, typename FromTag>
[[nodiscard]] Grid<T, ToTag> retag(const Grid<T, FromTag>& g) {
    return Grid<T, ToTag>(g.height(), g.width(), g.channels(),
                          std::vector<T>(g.values().begin(), g.values().end()));
}

template <typename A, typename B>
void require_same_size(const A& a, const B& b, const char* what) {
    if (a.height() != b.height() || a.width() != b.width()) {
        throw SizeMismatchError(std::string(what) + ": size mismatch (" + std::to_string(a.height()) + "x" +
                                std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                                std::to_string(b.width()) + ")");
    }
}

/// Throws unless every value is finite and within [0,1].
template <typename Tag>
void require_unit_range(const Grid<float, Tag>& g, const char* what) {
    for (float v : g.values()) {
        if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
            throw std::invalid_argument(std::string(what) + ": value outside [0,1]");
        }
    }
}

template <typename Tag>
[[nodiscard]] bool in_unit_range(const Grid<float, Tag>& g) {
    return std::all_of(g.values().begin(), g.values().end(),
                       [](float v) { return std::isfinite(v) && v >= 0.0f && v <= 1.0f; });
}

inline float clamp01(double v) noexcept { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

/// Luminance (Rec.601 weights) of a 1- or 3-channel image.
inline ScalarMap luminance(const RasterImage& img) {
    ScalarMap out(img.height(), img.width());
    if (img.channels() == 1) {
        std::copy(img.values().begin(), img.values().end(), out.values().begin());
        return out;
    }
    if (img.channels() != 3) {
        throw std::invalid_argument("luminance: expected 1 or 3 channels");
    }
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            out.at(y, x) = 0.299f * img.at(y, x, 0) + 0.587f * img.at(y, x, 1) + 0.114f * img.at(y, x, 2);
        }
    }
    return out;
}

/// Per-channel arithmetic mean, used as a gray guide.
inline ScalarMap channel_mean(const RasterImage& img) {
    ScalarMap out(img.height(), img.width());
    const int c = img.channels();
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            double s = 0.0;
            for (int k = 0; k < c; ++k) s += img.at(y, x, k);
            out.at(y, x) = static_cast<float>(s / c);
        }
    }
    return out;
}

}  // namespace blindsynth
