#pragma once

// Independent brute-force reference implementations. They share no code with
// the library beyond the container types, and favor the most literal loop over
// speed.

#include <unistd.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "blindsynth/core/depth.hpp"
#include "blindsynth/core/grid.hpp"

namespace oracle {

using namespace blindsynth;

/// Edge-clamped convolution with a uniform disk of the given diameter.
/// Support is every integer offset inside a circle of radius (D-1)/2.
inline RasterImage disk_convolve(const RasterImage& img, double diameter) {
    const double r = diameter <= 1.0 ? 0.0 : (diameter - 1.0) / 2.0;
    std::vector<std::pair<int, int>> offsets;
    const int R = static_cast<int>(std::ceil(r));
    for (int dy = -R; dy <= R; ++dy) {
        for (int dx = -R; dx <= R; ++dx) {
            if (dx * dx + dy * dy <= r * r + 1e-9) offsets.emplace_back(dy, dx);
        }
    }
    RasterImage out(img.height(), img.width(), img.channels());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            for (int c = 0; c < img.channels(); ++c) {
                double s = 0.0;
                for (auto [dy, dx] : offsets) s += img.clamped(y + dy, x + dx, c);
                out.at(y, x, c) = static_cast<float>(s / offsets.size());
            }
        }
    }
    return out;
}

/// Mean over the (2r+1)^2 window clipped to the image.
template <typename T, typename Tag>
std::vector<double> box_mean(const Grid<T, Tag>& g, int r) {
    std::vector<double> out(g.pixel_count());
    for (int y = 0; y < g.height(); ++y) {
        for (int x = 0; x < g.width(); ++x) {
            double s = 0.0;
            int n = 0;
            for (int yy = std::max(0, y - r); yy <= std::min(g.height() - 1, y + r); ++yy) {
                for (int xx = std::max(0, x - r); xx <= std::min(g.width() - 1, x + r); ++xx) {
                    s += g.at(yy, xx);
                    ++n;
                }
            }
            out[static_cast<std::size_t>(y) * g.width() + x] = s / n;
        }
    }
    return out;
}

/// min over an edge-clamped patch of min over channels.
inline std::vector<double> dark_channel(const RasterImage& img, int patch) {
    const int r = patch / 2;
    std::vector<double> out(img.pixel_count());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            double m = std::numeric_limits<double>::infinity();
            for (int dy = -r; dy <= r; ++dy) {
                for (int dx = -r; dx <= r; ++dx) {
                    for (int c = 0; c < img.channels(); ++c) m = std::min<double>(m, img.clamped(y + dy, x + dx, c));
                }
            }
            out[static_cast<std::size_t>(y) * img.width() + x] = m;
        }
    }
    return out;
}

/// Top ceil(0.1%) of the dark channel (ties by scan order), then the first
/// pixel with the largest channel sum among them.
inline std::array<float, 3> atmospheric_light(const RasterImage& img, int patch) {
    const auto dark = dark_channel(img, patch);
    std::vector<std::size_t> idx(dark.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return dark[a] > dark[b]; });
    const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.001 * idx.size())));
    std::size_t best = idx[0];
    double best_sum = -1.0;
    std::vector<std::size_t> top(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n));
    std::sort(top.begin(), top.end());
    for (std::size_t i : top) {
        double s = 0.0;
        for (int c = 0; c < 3; ++c) s += img.values()[i * 3 + c];
        if (s > best_sum) {
            best_sum = s;
            best = i;
        }
    }
    return {img.values()[best * 3], img.values()[best * 3 + 1], img.values()[best * 3 + 2]};
}

/// Nearest valid pixel by exhaustive scan: Manhattan distance, ties to the
/// lowest scan index.
inline DepthMap nearest_fill(const DepthMap& sparse) {
    DepthMap out(sparse.height(), sparse.width());
    for (int y = 0; y < sparse.height(); ++y) {
        for (int x = 0; x < sparse.width(); ++x) {
            int best = std::numeric_limits<int>::max();
            float v = 0.0f;
            for (int yy = 0; yy < sparse.height(); ++yy) {
                for (int xx = 0; xx < sparse.width(); ++xx) {
                    if (!sparse.valid(yy, xx)) continue;
                    const int d = std::abs(yy - y) + std::abs(xx - x);
                    if (d < best) {
                        best = d;
                        v = sparse.depth(yy, xx);
                    }
                }
            }
            out.set(y, x, v);
        }
    }
    return out;
}

/// Median of a vector (upper median for even sizes).
inline double median(std::vector<double> v) {
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

/// Self-deleting scratch directory.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("blindsynth_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace oracle
