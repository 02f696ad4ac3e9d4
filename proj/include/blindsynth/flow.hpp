#pragma once

// Two-frame dense optical flow by polynomial expansion (Farneback).
//
// Each frame is locally approximated by f(x) ~ x^T A x + b^T x + c using a
// Gaussian-weighted least-squares fit. A displacement d maps b2 = b1 - 2 A d,
// so per pixel A d = -(b2 - b1) / 2 (plus the prior displacement term). The
// normal equations A^T A d = A^T db are averaged over a window and solved,
// iterated, and refined coarse-to-fine over a pyramid.

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "blindsynth/core/filters.hpp"
#include "blindsynth/core/grid.hpp"

namespace blindsynth::motion {

struct FlowParams {
    int pyramid_levels = 3;
    double pyramid_scale = 0.5;
    int window = 15;
    int iterations = 3;
    int poly_n = 5;
    double poly_sigma = 1.1;

    void validate() const {
        if (pyramid_levels < 1) throw std::invalid_argument("flow: pyramid_levels must be >= 1");
        if (window < 1 || window % 2 == 0) throw std::invalid_argument("flow: window must be odd");
        if (poly_n < 3 || poly_n % 2 == 0) throw std::invalid_argument("flow: poly_n must be odd and >= 3");
        if (iterations < 1) throw std::invalid_argument("flow: iterations must be >= 1");
        if (!(poly_sigma > 0.0)) throw std::invalid_argument("flow: poly_sigma must be > 0");
        if (!(pyramid_scale > 0.0 && pyramid_scale < 1.0)) throw std::invalid_argument("flow: pyramid_scale in (0,1)");
    }

    friend bool operator==(const FlowParams&, const FlowParams&) = default;
};

namespace detail {

using Plane = Grid<double, ScalarTag>;

inline Plane gaussian_blur(const Plane& in, double sigma) {
    if (sigma <= 0.0) return in;
    const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(2 * r + 1);
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) sum += k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
    for (double& v : k) v /= sum;
    const int h = in.height();
    const int w = in.width();
    Plane tmp(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int i = -r; i <= r; ++i) s += k[i + r] * in.clamped(y, x + i);
            tmp.at(y, x) = s;
        }
    }
    Plane out(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int i = -r; i <= r; ++i) s += k[i + r] * tmp.clamped(y + i, x);
            out.at(y, x) = s;
        }
    }
    return out;
}

/// Bilinear sample at a real position with edge clamping.
template <typename T, typename Tag>
inline double sample(const Grid<T, Tag>& g, double y, double x, int c = 0) {
    y = std::clamp(y, 0.0, static_cast<double>(g.height() - 1));
    x = std::clamp(x, 0.0, static_cast<double>(g.width() - 1));
    const int y0 = static_cast<int>(y);
    const int x0 = static_cast<int>(x);
    const int y1 = std::min(y0 + 1, g.height() - 1);
    const int x1 = std::min(x0 + 1, g.width() - 1);
    const double wy = y - y0;
    const double wx = x - x0;
    const double top = (1.0 - wx) * g.at(y0, x0, c) + wx * g.at(y0, x1, c);
    const double bottom = (1.0 - wx) * g.at(y1, x0, c) + wx * g.at(y1, x1, c);
    return (1.0 - wy) * top + wy * bottom;
}

/// Resample to (h, w) with pixel-center alignment.
inline Plane resample(const Plane& in, int h, int w) {
    Plane out(h, w, in.channels());
    const double sy = static_cast<double>(in.height()) / h;
    const double sx = static_cast<double>(in.width()) / w;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < in.channels(); ++c) {
                out.at(y, x, c) = sample(in, (y + 0.5) * sy - 0.5, (x + 0.5) * sx - 0.5, c);
            }
        }
    }
    return out;
}

/// Six correlation filters producing (c, bx, by, axx, ayy, axy) from a
/// (2n+1)^2 neighbourhood weighted by a Gaussian applicability.
struct PolyBasis {
    int half = 0;
    std::array<std::vector<double>, 6> filters;
};

inline PolyBasis make_poly_basis(int poly_n, double sigma) {
    PolyBasis basis;
    basis.half = poly_n / 2;
    const int n = basis.half;
    const int side = 2 * n + 1;
    auto phi = [](int x, int y) { return std::array<double, 6>{1.0, double(x), double(y), double(x) * x, double(y) * y, double(x) * y}; };
    std::array<std::array<double, 6>, 6> g{};
    for (int y = -n; y <= n; ++y) {
        for (int x = -n; x <= n; ++x) {
            const double a = std::exp(-0.5 * (x * x + y * y) / (sigma * sigma));
            const auto p = phi(x, y);
            for (int i = 0; i < 6; ++i) {
                for (int j = 0; j < 6; ++j) g[i][j] += a * p[i] * p[j];
            }
        }
    }
    // Invert G by Gauss-Jordan with partial pivoting.
    std::array<std::array<double, 12>, 6> aug{};
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) aug[i][j] = g[i][j];
        aug[i][6 + i] = 1.0;
    }
    for (int col = 0; col < 6; ++col) {
        int piv = col;
        for (int r = col + 1; r < 6; ++r) {
            if (std::abs(aug[r][col]) > std::abs(aug[piv][col])) piv = r;
        }
        std::swap(aug[col], aug[piv]);
        const double d = aug[col][col];
        for (double& v : aug[col]) v /= d;
        for (int r = 0; r < 6; ++r) {
            if (r == col) continue;
            const double f = aug[r][col];
            for (int j = 0; j < 12; ++j) aug[r][j] -= f * aug[col][j];
        }
    }
    for (auto& f : basis.filters) f.assign(static_cast<std::size_t>(side) * side, 0.0);
    for (int y = -n; y <= n; ++y) {
        for (int x = -n; x <= n; ++x) {
            const double a = std::exp(-0.5 * (x * x + y * y) / (sigma * sigma));
            const auto p = phi(x, y);
            const std::size_t idx = static_cast<std::size_t>(y + n) * side + (x + n);
            for (int i = 0; i < 6; ++i) {
                double s = 0.0;
                for (int j = 0; j < 6; ++j) s += aug[i][6 + j] * p[j];
                basis.filters[i][idx] = a * s;
            }
        }
    }
    return basis;
}

/// Per-pixel expansion, 5 channels: bx, by, axx, ayy, axy.
inline Plane poly_expansion(const Plane& img, const PolyBasis& basis) {
    const int h = img.height();
    const int w = img.width();
    const int n = basis.half;
    const int side = 2 * n + 1;
    Plane out(h, w, 5);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::array<double, 5> acc{};
            for (int dy = -n; dy <= n; ++dy) {
                const int sy = std::clamp(y + dy, 0, h - 1);
                for (int dx = -n; dx <= n; ++dx) {
                    const double v = img.at(sy, std::clamp(x + dx, 0, w - 1));
                    const std::size_t idx = static_cast<std::size_t>(dy + n) * side + (dx + n);
                    for (int i = 0; i < 5; ++i) acc[i] += basis.filters[i + 1][idx] * v;
                }
            }
            for (int i = 0; i < 5; ++i) out.at(y, x, i) = acc[i];
        }
    }
    return out;
}

/// Normal-equation terms (g11, g12, g22, h1, h2) at each pixel for the
/// current flow estimate.
inline Plane update_matrices(const Plane& r0, const Plane& r1, const Plane& flow) {
    const int h = r0.height();
    const int w = r0.width();
    Plane m(h, w, 5);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double dx = flow.at(y, x, 0);
            const double dy = flow.at(y, x, 1);
            const double sx = x + dx;
            const double sy = y + dy;
            std::array<double, 5> b2{};
            for (int i = 0; i < 5; ++i) b2[i] = sample(r1, sy, sx, i);
            const double a11 = 0.5 * (r0.at(y, x, 2) + b2[2]);
            const double a22 = 0.5 * (r0.at(y, x, 3) + b2[3]);
            const double a12 = 0.25 * (r0.at(y, x, 4) + b2[4]);
            const double db1 = -0.5 * (b2[0] - r0.at(y, x, 0)) + a11 * dx + a12 * dy;
            const double db2 = -0.5 * (b2[1] - r0.at(y, x, 1)) + a12 * dx + a22 * dy;
            m.at(y, x, 0) = a11 * a11 + a12 * a12;
            m.at(y, x, 1) = a12 * (a11 + a22);
            m.at(y, x, 2) = a12 * a12 + a22 * a22;
            m.at(y, x, 3) = a11 * db1 + a12 * db2;
            m.at(y, x, 4) = a12 * db1 + a22 * db2;
        }
    }
    return m;
}

inline void solve_flow(const Plane& averaged, Plane& flow) {
    for (int y = 0; y < flow.height(); ++y) {
        for (int x = 0; x < flow.width(); ++x) {
            const double g11 = averaged.at(y, x, 0);
            const double g12 = averaged.at(y, x, 1);
            const double g22 = averaged.at(y, x, 2);
            const double h1 = averaged.at(y, x, 3);
            const double h2 = averaged.at(y, x, 4);
            const double idet = 1.0 / (g11 * g22 - g12 * g12 + 1e-3);
            flow.at(y, x, 0) = (g22 * h1 - g12 * h2) * idet;
            flow.at(y, x, 1) = (g11 * h2 - g12 * h1) * idet;
        }
    }
}

inline Plane to_plane_255(const RasterImage& img) {
    const ScalarMap lum = luminance(img);
    Plane p(lum.height(), lum.width());
    for (std::size_t i = 0; i < p.values().size(); ++i) p.values()[i] = 255.0 * lum.values()[i];
    return p;
}

}  // namespace detail

/// Displacement from f0 to f1: f1(x + flow(x)) ~ f0(x). Color inputs are
/// converted to luminance.
[[nodiscard]] inline FlowField dense_flow(const RasterImage& f0, const RasterImage& f1, const FlowParams& params = {}) {
    params.validate();
    require_same_size(f0, f1, "dense_flow");
    if (f0.empty()) throw std::invalid_argument("dense_flow: empty frames");
    using detail::Plane;

    const Plane base0 = detail::to_plane_255(f0);
    const Plane base1 = detail::to_plane_255(f1);
    const detail::PolyBasis basis = detail::make_poly_basis(params.poly_n, params.poly_sigma);
    const int min_side = 2 * basis.half + 1;

    // Coarsest usable level first.
    int levels = params.pyramid_levels;
    while (levels > 1) {
        const double s = std::pow(params.pyramid_scale, levels - 1);
        if (std::lround(f0.height() * s) >= min_side && std::lround(f0.width() * s) >= min_side) break;
        --levels;
    }

    Plane flow;
    for (int level = levels - 1; level >= 0; --level) {
        const double scale = std::pow(params.pyramid_scale, level);
        const int h = std::max(1, static_cast<int>(std::lround(f0.height() * scale)));
        const int w = std::max(1, static_cast<int>(std::lround(f0.width() * scale)));
        Plane i0 = base0;
        Plane i1 = base1;
        if (level > 0) {
            const double sigma = (1.0 / scale - 1.0) * 0.5;
            i0 = detail::resample(detail::gaussian_blur(base0, sigma), h, w);
            i1 = detail::resample(detail::gaussian_blur(base1, sigma), h, w);
        }

        if (flow.empty()) {
            flow = Plane(h, w, 2);
        } else {
            const double fy = static_cast<double>(h) / flow.height();
            const double fx = static_cast<double>(w) / flow.width();
            flow = detail::resample(flow, h, w);
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    flow.at(y, x, 0) *= fx;
                    flow.at(y, x, 1) *= fy;
                }
            }
        }

        const Plane r0 = detail::poly_expansion(i0, basis);
        const Plane r1 = detail::poly_expansion(i1, basis);
        for (int it = 0; it < params.iterations; ++it) {
            const Plane m = detail::update_matrices(r0, r1, flow);
            detail::solve_flow(box_mean(m, params.window / 2), flow);
        }
    }

    FlowField out(f0.height(), f0.width(), 2);
    for (std::size_t i = 0; i < out.values().size(); ++i) out.values()[i] = static_cast<float>(flow.values()[i]);
    return out;
}

}  // namespace blindsynth::motion
