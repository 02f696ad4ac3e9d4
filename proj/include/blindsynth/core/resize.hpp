#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "blindsynth/core/grid.hpp"

namespace blindsynth {

/// Bilinear resize with align-corners sampling: output corners land exactly
/// on input corners, so source coordinate = out_index * (in - 1) / (out - 1).
template <typename Tag>
[[nodiscard]] Grid<float, Tag> resize_bilinear(const Grid<float, Tag>& img, int height, int width) {
    if (height < 1 || width < 1) throw std::invalid_argument("resize_bilinear: target dimensions must be >= 1");
    if (img.empty()) throw std::invalid_argument("resize_bilinear: empty source");
    if (img.same_shape(height, width)) return img;

    const int c = img.channels();
    Grid<float, Tag> out(height, width, c);
    const double sy = height > 1 ? static_cast<double>(img.height() - 1) / (height - 1) : 0.0;
    const double sx = width > 1 ? static_cast<double>(img.width() - 1) / (width - 1) : 0.0;
    for (int y = 0; y < height; ++y) {
        const double fy = y * sy;
        const int y0 = std::min(static_cast<int>(fy), img.height() - 1);
        const int y1 = std::min(y0 + 1, img.height() - 1);
        const double wy = fy - y0;
        for (int x = 0; x < width; ++x) {
            const double fx = x * sx;
            const int x0 = std::min(static_cast<int>(fx), img.width() - 1);
            const int x1 = std::min(x0 + 1, img.width() - 1);
            const double wx = fx - x0;
            for (int k = 0; k < c; ++k) {
                const double top = (1.0 - wx) * img.at(y0, x0, k) + wx * img.at(y0, x1, k);
                const double bottom = (1.0 - wx) * img.at(y1, x0, k) + wx * img.at(y1, x1, k);
                out.at(y, x, k) = static_cast<float>((1.0 - wy) * top + wy * bottom);
            }
        }
    }
    return out;
}

}  // namespace blindsynth
