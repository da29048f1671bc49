#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "saddlejet/error.hpp"
#include "saddlejet/hamiltonian.hpp"
#include "saddlejet/jet.hpp"
#include "saddlejet/model_case.hpp"
#include "saddlejet/parallel.hpp"
#include "saddlejet/surface.hpp"

namespace saddlejet {

struct DivergenceProfile {
    std::vector<double> radii;
    std::vector<double> max_diff;
    double contact_order = std::numeric_limits<double>::infinity();
    bool order_is_bound = false; // some radii were below the noise floor
    std::size_t fitted = 0;
    std::optional<DefectReport> residual1;
    std::optional<DefectReport> residual2;
};

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    require(x.size() == y.size() && x.size() >= 2, ErrorKind::Precondition, "slope fit needs at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double lx = std::log(x[k]), ly = std::log(y[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = n * sxx - sx * sx;
    require(den > 0, ErrorKind::Precondition, "slope fit needs distinct abscissae");
    return (n * sxy - sx * sy) / den;
}

/// Bilinear interpolation of z - z' on the common grid; nullopt outside or next to invalid nodes.
inline std::optional<double> difference_at(const SolutionGrid& s1, const SolutionGrid& s2, double x, double y)
{
    const Grid& g = s1.grid;
    if (x < g.sigma.front() || x > g.sigma.back() || y < g.tau.front() || y > g.tau.back()) {
        return std::nullopt;
    }
    auto cell = [](const std::vector<double>& v, double t) {
        auto it = std::upper_bound(v.begin(), v.end(), t);
        std::size_t i = it == v.begin() ? 0 : static_cast<std::size_t>(it - v.begin()) - 1;
        return std::min(i, v.size() - 2);
    };
    const std::size_t i = cell(g.sigma, x), j = cell(g.tau, y);
    const double tx = (x - g.sigma[i]) / (g.sigma[i + 1] - g.sigma[i]);
    const double ty = (y - g.tau[j]) / (g.tau[j + 1] - g.tau[j]);
    double d[2][2];
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const std::size_t k = s1.index(i + a, j + b);
            if (!s1.valid[k] || !s2.valid[k]) {
                return std::nullopt;
            }
            d[a][b] = s1.z[k] - s2.z[k];
        }
    }
    return (1 - tx) * ((1 - ty) * d[0][0] + ty * d[0][1]) + tx * ((1 - ty) * d[1][0] + ty * d[1][1]);
}

/// max |z1 - z2| over 720 points of the circle of radius r around the base point.
inline double max_difference_on_circle(const SolutionGrid& s1, const SolutionGrid& s2, double r)
{
    double m = 0.0;
    std::size_t hits = 0;
    constexpr int n = 720;
    for (int k = 0; k < n; ++k) {
        const double th = 2.0 * std::numbers::pi * k / n;
        if (const auto d = difference_at(s1, s2, s1.x0 + r * std::cos(th), s1.y0 + r * std::sin(th))) {
            m = std::max(m, std::abs(*d));
            ++hits;
        }
    }
    require(hits > 0, ErrorKind::Precondition, "circle does not meet the valid part of the grid");
    return m;
}

/// Divergence of two solutions on circles around the base point of s1. Radii
/// are geometric from r_max/4 to r_max, with r_max the inscribed radius.
inline DivergenceProfile compare_solutions(const SolutionGrid& s1, const SolutionGrid& s2,
                                           const std::optional<HamiltonianSpec>& spec = std::nullopt,
                                           std::size_t n_radii = 8)
{
    if (!(s1.grid == s2.grid)) {
        fail(ErrorKind::GridMismatch, "solutions live on different grids");
    }
    require(n_radii >= 5, ErrorKind::Precondition, "divergence profile needs at least 5 radii");
    const Grid& g = s1.grid;
    const double r_max = std::min({s1.x0 - g.sigma.front(), g.sigma.back() - s1.x0, s1.y0 - g.tau.front(),
                                   g.tau.back() - s1.y0});
    require(r_max > 0, ErrorKind::Precondition, "base point lies on the grid boundary");

    DivergenceProfile prof;
    prof.radii.resize(n_radii);
    prof.max_diff.resize(n_radii);
    for (std::size_t k = 0; k < n_radii; ++k) {
        prof.radii[k] = r_max * std::pow(0.25, static_cast<double>(n_radii - 1 - k) / (n_radii - 1));
    }
    prof.radii.back() = r_max;
    parallel_for(n_radii, [&](std::size_t k) { prof.max_diff[k] = max_difference_on_circle(s1, s2, prof.radii[k]); });

    std::vector<double> xs, ys;
    const double floor = 100.0 * std::numeric_limits<double>::epsilon();
    for (std::size_t k = 0; k < n_radii; ++k) {
        if (prof.max_diff[k] > floor) {
            xs.push_back(prof.radii[k]);
            ys.push_back(prof.max_diff[k]);
        }
    }
    prof.fitted = xs.size();
    prof.order_is_bound = xs.size() < n_radii;
    if (xs.size() >= 2) {
        prof.contact_order = loglog_slope(xs, ys);
    }
    if (spec) {
        prof.residual1 = residual_grid(*spec, s1);
        prof.residual2 = residual_grid(*spec, s2);
    }
    return prof;
}

struct AxisDecay {
    // slopes of log|w_i| against log of the distance to an axis, along u or v
    double exp_w3_u = 0, exp_w3_v = 0, exp_w4_u = 0, exp_w4_v = 0;
    // same fits restricted to the three smallest offsets
    double tail_w3_u = 0, tail_w3_v = 0, tail_w4_u = 0, tail_w4_v = 0;
    // ((bl - a)/(a+b), (al - b)/(a+b))
    double predicted_first = 0, predicted_second = 0;
    // exact model exponents (bl-a, a(l+1), b(l+1), al-b)/(a+b)
    double model_w3_u = 0, model_w3_v = 0, model_w4_u = 0, model_w4_v = 0;
    double decades_u = 0, decades_v = 0;
    bool low_confidence = false;
};

/// Grid with nodes u0 2^{-k}, k = levels..0, on both axes.
inline Grid dyadic_quadrant_grid(double u0, double v0, int levels)
{
    require(u0 > 0 && v0 > 0 && levels >= 2, ErrorKind::Precondition, "dyadic grid needs positive extents and levels >= 2");
    Grid g;
    for (int k = levels; k >= 0; --k) {
        g.sigma.push_back(std::ldexp(u0, -k));
        g.tau.push_back(std::ldexp(v0, -k));
    }
    return g;
}

/// Decay of the v3, v4 components of a parameter-chart saddle surface towards
/// the axes, measured in the open first quadrant. Along v the row with the
/// largest u is used, along u the column with the largest v.
inline AxisDecay axis_decay_exponents(const JetSurface& surf)
{
    require(surf.chart == Chart::Parameter, ErrorKind::Precondition, "axis decay needs a (u, v) parameter-chart surface");
    require(surf.meta.a > 0 && surf.meta.b > 0 && surf.meta.phi_plus.has_value(), ErrorKind::Precondition,
            "axis decay needs a, b and phi+ in the surface metadata");
    const double a = surf.meta.a, b = surf.meta.b;
    const double l = surf.meta.phi_plus->vanishing_order();
    const double inf = std::numeric_limits<double>::infinity();
    AxisDecay out;
    if (std::isinf(l)) {
        out.predicted_first = out.predicted_second = inf;
        out.model_w3_u = out.model_w3_v = out.model_w4_u = out.model_w4_v = inf;
    } else {
        out.predicted_first = (b * l - a) / (a + b);
        out.predicted_second = (a * l - b) / (a + b);
        out.model_w3_u = out.predicted_first;
        out.model_w3_v = a * (l + 1) / (a + b);
        out.model_w4_u = b * (l + 1) / (a + b);
        out.model_w4_v = out.predicted_second;
    }

    const Grid& g = surf.grid;
    std::vector<std::size_t> is, js;
    for (std::size_t i = 0; i < g.rows(); ++i) {
        if (g.sigma[i] > 0) {
            is.push_back(i);
        }
    }
    for (std::size_t j = 0; j < g.cols(); ++j) {
        if (g.tau[j] > 0) {
            js.push_back(j);
        }
    }
    require(is.size() >= 3 && js.size() >= 3, ErrorKind::Precondition,
            "axis decay needs at least 3 positive offsets on each axis");
    const SaddleBasis basis{a, b};

    struct Fit {
        double all = 0, tail = 0;
    };
    // slopes of |w_c| along a line of nodes
    auto fit = [&](const std::vector<std::pair<double, std::size_t>>& line, int c) -> Fit {
        std::vector<double> xs, ys;
        for (const auto& [off, idx] : line) {
            if (!surf.valid[idx]) {
                continue;
            }
            const double w = std::abs(basis.to_w(surf.points[idx])[c]);
            if (w > 0) {
                xs.push_back(off);
                ys.push_back(w);
            }
        }
        if (xs.size() < 2) {
            return {inf, inf};
        }
        Fit f;
        f.all = loglog_slope(xs, ys);
        const std::size_t t = std::min<std::size_t>(3, xs.size());
        f.tail = loglog_slope(std::vector<double>(xs.begin(), xs.begin() + t), std::vector<double>(ys.begin(), ys.begin() + t));
        return f;
    };
    std::vector<std::pair<double, std::size_t>> along_v, along_u;
    for (std::size_t j : js) {
        along_v.emplace_back(g.tau[j], surf.index(is.back(), j));
    }
    for (std::size_t i : is) {
        along_u.emplace_back(g.sigma[i], surf.index(i, js.back()));
    }
    const Fit w3u = fit(along_u, 2), w3v = fit(along_v, 2), w4u = fit(along_u, 3), w4v = fit(along_v, 3);
    out.exp_w3_u = w3u.all;
    out.exp_w3_v = w3v.all;
    out.exp_w4_u = w4u.all;
    out.exp_w4_v = w4v.all;
    out.tail_w3_u = w3u.tail;
    out.tail_w3_v = w3v.tail;
    out.tail_w4_u = w4u.tail;
    out.tail_w4_v = w4v.tail;
    out.decades_u = std::log10(g.sigma[is.back()] / g.sigma[is.front()]);
    out.decades_v = std::log10(g.tau[js.back()] / g.tau[js.front()]);
    out.low_confidence = out.decades_u < 2.0 || out.decades_v < 2.0;
    return out;
}

} // namespace saddlejet
