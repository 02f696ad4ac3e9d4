#pragma once

#include <stdexcept>

#include "blindsynth/core/filters.hpp"
#include "blindsynth/core/grid.hpp"

namespace blindsynth {

/// Gray-guide guided filter: per window, input ~ a * guide + b by ridge
/// regression with penalty eps; output averages the (a, b) of every window
/// covering a pixel. Windows are (2r+1)^2 clipped at the borders.
template <typename GuideTag, typename InTag>
[[nodiscard]] Grid<float, InTag> guided_filter(const Grid<float, GuideTag>& guide, const Grid<float, InTag>& input,
                                               int radius, double eps) {
    require_same_size(guide, input, "guided_filter");
    if (guide.channels() != 1 || input.channels() != 1) {
        throw std::invalid_argument("guided_filter: guide and input must be single-channel");
    }
    if (!(eps > 0.0)) throw std::invalid_argument("guided_filter: eps must be > 0");
    if (radius < 0) throw std::invalid_argument("guided_filter: radius must be >= 0");

    const int h = guide.height();
    const int w = guide.width();
    // Channels: I, p, I*I, I*p
    Grid<double, ScalarTag> stats(h, w, 4);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double i = guide.at(y, x);
            const double p = input.at(y, x);
            stats.at(y, x, 0) = i;
            stats.at(y, x, 1) = p;
            stats.at(y, x, 2) = i * i;
            stats.at(y, x, 3) = i * p;
        }
    }
    const auto means = box_mean(stats, radius);
    Grid<double, ScalarTag> ab(h, w, 2);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double mi = means.at(y, x, 0);
            const double mp = means.at(y, x, 1);
            const double var = means.at(y, x, 2) - mi * mi;
            const double cov = means.at(y, x, 3) - mi * mp;
            const double a = cov / (var + eps);
            ab.at(y, x, 0) = a;
            ab.at(y, x, 1) = mp - a * mi;
        }
    }
    const auto mean_ab = box_mean(ab, radius);
    Grid<float, InTag> out(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            out.at(y, x) = static_cast<float>(mean_ab.at(y, x, 0) * guide.at(y, x) + mean_ab.at(y, x, 1));
        }
    }
    return out;
}

}  // namespace blindsynth
