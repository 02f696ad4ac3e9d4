#pragma once

// Separable window filters shared by the estimators.

#include <algorithm>
#include <limits>
#include <vector>

#include "blindsynth/core/grid.hpp"

namespace blindsynth {

/// Mean over the (2r+1)^2 window clipped to the image, per channel.
/// Sums are accumulated in double, row pass then column pass.
template <typename Tag>
[[nodiscard]] Grid<double, Tag> box_mean(const Grid<double, Tag>& in, int radius) {
    const int h = in.height();
    const int w = in.width();
    const int c = in.channels();
    Grid<double, Tag> rows(h, w, c);
    std::vector<double> prefix(static_cast<std::size_t>(w) + 1);
    for (int y = 0; y < h; ++y) {
        for (int k = 0; k < c; ++k) {
            prefix[0] = 0.0;
            for (int x = 0; x < w; ++x) prefix[x + 1] = prefix[x] + in.at(y, x, k);
            for (int x = 0; x < w; ++x) {
                const int lo = std::max(0, x - radius);
                const int hi = std::min(w - 1, x + radius);
                rows.at(y, x, k) = (prefix[hi + 1] - prefix[lo]) / (hi - lo + 1);
            }
        }
    }
    Grid<double, Tag> out(h, w, c);
    std::vector<double> colprefix(static_cast<std::size_t>(h) + 1);
    for (int x = 0; x < w; ++x) {
        for (int k = 0; k < c; ++k) {
            colprefix[0] = 0.0;
            for (int y = 0; y < h; ++y) colprefix[y + 1] = colprefix[y] + rows.at(y, x, k);
            for (int y = 0; y < h; ++y) {
                const int lo = std::max(0, y - radius);
                const int hi = std::min(h - 1, y + radius);
                out.at(y, x, k) = (colprefix[hi + 1] - colprefix[lo]) / (hi - lo + 1);
            }
        }
    }
    return out;
}

/// Minimum over the (2r+1)^2 window; clipping the window at the border is
/// equivalent to edge clamping for a min.
template <typename T, typename Tag>
[[nodiscard]] Grid<T, Tag> min_filter(const Grid<T, Tag>& in, int radius) {
    const int h = in.height();
    const int w = in.width();
    Grid<T, Tag> tmp(h, w, 1);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            T m = std::numeric_limits<T>::max();
            const int hi = std::min(w - 1, x + radius);
            for (int i = std::max(0, x - radius); i <= hi; ++i) m = std::min(m, in.at(y, i));
            tmp.at(y, x) = m;
        }
    }
    Grid<T, Tag> out(h, w, 1);
    for (int y = 0; y < h; ++y) {
        const int lo = std::max(0, y - radius);
        const int hi = std::min(h - 1, y + radius);
        for (int x = 0; x < w; ++x) {
            T m = std::numeric_limits<T>::max();
            for (int j = lo; j <= hi; ++j) m = std::min(m, tmp.at(j, x));
            out.at(y, x) = m;
        }
    }
    return out;
}

template <typename Tag, typename FromTag>
[[nodiscard]] Grid<double, Tag> to_double(const Grid<float, FromTag>& g) {
    return Grid<double, Tag>(g.height(), g.width(), g.channels(),
                             std::vector<double>(g.values().begin(), g.values().end()));
}

}  // namespace blindsynth
