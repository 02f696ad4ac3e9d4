#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "blindsynth/core/grid.hpp"

namespace blindsynth {

/// Metric depth in meters with a validity mask. Invalid pixels carry depth 0.
class DepthMap {
public:
    DepthMap() = default;
    DepthMap(int height, int width) : depth_(height, width, 1, 0.0f), valid_(height, width, 1, 0) {}

    /// Dense map from a depth grid; every value must be finite and > 0.
    static DepthMap dense(const ScalarMap& meters) {
        DepthMap d(meters.height(), meters.width());
        for (int y = 0; y < meters.height(); ++y) {
            for (int x = 0; x < meters.width(); ++x) d.set(y, x, meters.at(y, x));
        }
        return d;
    }

    [[nodiscard]] int height() const noexcept { return depth_.height(); }
    [[nodiscard]] int width() const noexcept { return depth_.width(); }
    [[nodiscard]] std::size_t pixel_count() const noexcept { return depth_.pixel_count(); }

    [[nodiscard]] float depth(int y, int x) const noexcept { return depth_.at(y, x); }
    [[nodiscard]] bool valid(int y, int x) const noexcept { return valid_.at(y, x) != 0; }

    void set(int y, int x, float meters) {
        if (!std::isfinite(meters) || meters <= 0.0f) {
            throw std::invalid_argument("valid depth must be finite and > 0");
        }
        depth_.at(y, x) = meters;
        valid_.at(y, x) = 1;
    }
    void invalidate(int y, int x) noexcept {
        depth_.at(y, x) = 0.0f;
        valid_.at(y, x) = 0;
    }

    [[nodiscard]] const ScalarMap& meters() const noexcept { return depth_; }
    [[nodiscard]] const BinaryMap& mask() const noexcept { return valid_; }

    [[nodiscard]] std::size_t valid_count() const noexcept {
        return static_cast<std::size_t>(std::count(valid_.values().begin(), valid_.values().end(), 1));
    }
    [[nodiscard]] bool is_dense() const noexcept { return valid_count() == pixel_count(); }

    friend bool operator==(const DepthMap&, const DepthMap&) = default;

private:
    ScalarMap depth_;
    BinaryMap valid_;
};

enum class Connectivity { Four, Eight };

/// Result of a multi-source nearest-seed search: for every reached pixel,
/// the flat index of its nearest seed and the graph distance to it.
struct NearestSeeds {
    std::vector<std::int64_t> seed;  // -1 where unreached
    std::vector<int> distance;       // -1 where unreached
};

/// Layered BFS from every nonzero pixel of `seeds`. Four-connectivity gives
/// Manhattan distance, eight gives Chebyshev. Among equidistant seeds the one
/// earliest in scan order wins. Search stops beyond `max_distance`.
inline NearestSeeds nearest_seeds(const BinaryMap& seeds, Connectivity conn,
                                  int max_distance = std::numeric_limits<int>::max()) {
    const int h = seeds.height();
    const int w = seeds.width();
    const std::size_t n = seeds.pixel_count();
    NearestSeeds out{std::vector<std::int64_t>(n, -1), std::vector<int>(n, -1)};

    std::vector<std::int64_t> frontier;
    for (std::size_t i = 0; i < n; ++i) {
        if (seeds.values()[i] != 0) {
            out.seed[i] = static_cast<std::int64_t>(i);
            out.distance[i] = 0;
            frontier.push_back(static_cast<std::int64_t>(i));
        }
    }

    static constexpr int dy4[] = {-1, 0, 0, 1};
    static constexpr int dx4[] = {0, -1, 1, 0};
    static constexpr int dy8[] = {-1, -1, -1, 0, 0, 1, 1, 1};
    static constexpr int dx8[] = {-1, 0, 1, -1, 1, -1, 0, 1};
    const int* dy = conn == Connectivity::Four ? dy4 : dy8;
    const int* dx = conn == Connectivity::Four ? dx4 : dx8;
    const int nn = conn == Connectivity::Four ? 4 : 8;

    std::vector<std::int64_t> next;
    for (int d = 1; d <= max_distance && !frontier.empty(); ++d) {
        next.clear();
        for (std::int64_t p : frontier) {
            const int py = static_cast<int>(p / w);
            const int px = static_cast<int>(p % w);
            for (int k = 0; k < nn; ++k) {
                const int qy = py + dy[k];
                const int qx = px + dx[k];
                if (qy < 0 || qy >= h || qx < 0 || qx >= w) continue;
                const std::size_t q = static_cast<std::size_t>(qy) * w + qx;
                if (out.distance[q] == -1) {
                    out.distance[q] = d;
                    out.seed[q] = out.seed[p];
                    next.push_back(static_cast<std::int64_t>(q));
                } else if (out.distance[q] == d && out.seed[p] < out.seed[q]) {
                    out.seed[q] = out.seed[p];
                }
            }
        }
        frontier.swap(next);
    }
    return out;
}

/// Densifies a sparse depth map: every invalid pixel takes the value of its
/// nearest valid pixel (Manhattan distance, ties by scan order).
inline DepthMap fill_depth(const DepthMap& sparse) {
    if (sparse.valid_count() == 0) {
        throw std::invalid_argument("fill_depth: depth map has no valid pixels");
    }
    const NearestSeeds nearest = nearest_seeds(sparse.mask(), Connectivity::Four);
    DepthMap dense(sparse.height(), sparse.width());
    const int w = sparse.width();
    for (int y = 0; y < sparse.height(); ++y) {
        for (int x = 0; x < w; ++x) {
            const std::int64_t s = nearest.seed[static_cast<std::size_t>(y) * w + x];
            dense.set(y, x, sparse.depth(static_cast<int>(s / w), static_cast<int>(s % w)));
        }
    }
    return dense;
}

/// Value at quantile q in [0,1] of the valid depths (nearest-rank on sorted values).
inline float depth_quantile(const DepthMap& depth, double q) {
    std::vector<float> v;
    v.reserve(depth.valid_count());
    for (int y = 0; y < depth.height(); ++y) {
        for (int x = 0; x < depth.width(); ++x) {
            if (depth.valid(y, x)) v.push_back(depth.depth(y, x));
        }
    }
    if (v.empty()) throw std::invalid_argument("depth_quantile: no valid pixels");
    std::sort(v.begin(), v.end());
    const auto idx = static_cast<std::size_t>(std::llround(std::clamp(q, 0.0, 1.0) * (v.size() - 1)));
    return v[idx];
}

}  // namespace blindsynth
