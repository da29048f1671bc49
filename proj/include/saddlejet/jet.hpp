#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "saddlejet/error.hpp"
#include "saddlejet/hamiltonian.hpp"
#include "saddlejet/phase.hpp"
#include "saddlejet/surface.hpp"

namespace saddlejet {

/// A function z on a base grid together with the jet (p, q) it came from.
struct SolutionGrid {
    Grid grid; // sigma = x, tau = y
    std::vector<double> z;
    std::vector<double> p;
    std::vector<double> q;
    std::vector<char> valid;
    double x0 = 0.0;
    double y0 = 0.0;
    double loop_defect = 0.0;
    std::vector<std::string> warnings;

    std::size_t index(std::size_t i, std::size_t j) const { return i * grid.cols() + j; }
    double z_at(std::size_t i, std::size_t j) const { return z[index(i, j)]; }
};

struct DefectReport {
    double max_defect = 0.0;          // max |q_x - p_y|
    double mean_defect = 0.0;
    double max_defect_off_axes = 0.0; // excluding stencils that touch x = 0 or y = 0
    double max_abs_H = 0.0;
    double loop_defect = 0.0;         // max |circulation of p dx + q dy| / cell area
    double max_zx_error = 0.0;        // residual_grid only: max |z_x - p|
    double max_zy_error = 0.0;
    bool projectable = true;
    bool lagrangian = false;
    std::size_t nodes = 0;
    std::string fd_scheme = "five-point differences with the grid step; one-sided at boundaries";
    std::vector<std::string> warnings;
};

enum class PathOrder { HorizontalFirst, VerticalFirst };

namespace detail {

// Five-point Lagrange stencils: fourth order, central in the interior and
// one-sided next to the boundary.
inline constexpr int kStencil = 5;

/// Derivative at xs[at] of the interpolating polynomial through kStencil nodes.
inline double dstencil(const double* xs, const double* fs, int at)
{
    const double x = xs[at];
    double d = 0.0;
    for (int k = 0; k < kStencil; ++k) {
        // derivative of the k-th Lagrange basis polynomial at x
        double num = 0.0;
        double den = 1.0;
        for (int m = 0; m < kStencil; ++m) {
            if (m == k) {
                continue;
            }
            den *= xs[k] - xs[m];
            double prod = 1.0;
            for (int n = 0; n < kStencil; ++n) {
                if (n != k && n != m) {
                    prod *= x - xs[n];
                }
            }
            num += prod;
        }
        d += fs[k] * num / den;
    }
    return d;
}

/// Stencil start and position for node i on an axis of n >= kStencil nodes.
inline std::pair<std::size_t, int> stencil(std::size_t i, std::size_t n)
{
    const std::size_t half = kStencil / 2;
    const std::size_t start = std::min(i > half ? i - half : 0, n - kStencil);
    return {start, static_cast<int>(i - start)};
}

/// d field / d sigma (dir = 0) or d tau (dir = 1) at node (i, j); nullopt if a
/// stencil node is invalid.
template <class Field>
std::optional<double> grid_derivative(const Grid& g, const std::vector<char>& valid, Field&& field, std::size_t i,
                                      std::size_t j, int dir)
{
    const std::size_t n = dir == 0 ? g.rows() : g.cols();
    if (n < static_cast<std::size_t>(kStencil)) {
        return std::nullopt;
    }
    const auto [start, at] = stencil(dir == 0 ? i : j, n);
    double xs[kStencil], fs[kStencil];
    for (int k = 0; k < kStencil; ++k) {
        const std::size_t ii = dir == 0 ? start + k : i, jj = dir == 0 ? j : start + k;
        const std::size_t idx = ii * g.cols() + jj;
        if (!valid[idx]) {
            return std::nullopt;
        }
        xs[k] = dir == 0 ? g.sigma[ii] : g.tau[jj];
        fs[k] = field(idx);
    }
    return dstencil(xs, fs, at);
}

inline bool stencil_touches_axis(const Grid& g, std::size_t i, std::size_t j)
{
    auto near = [](const std::vector<double>& v, std::size_t k) {
        const auto [start, at] = stencil(k, v.size());
        (void)at;
        for (std::size_t m = start; m < start + kStencil && m < v.size(); ++m) {
            if (std::abs(v[m]) < 1e-14) {
                return true;
            }
        }
        return false;
    };
    return near(g.sigma, i) || near(g.tau, j);
}

} // namespace detail

/// Closedness of p dx + q dy on a sampled surface, via q_x - p_y.
inline DefectReport check_lagrangian(const JetSurface& surf, double tol = 1e-6)
{
    const Grid& g = surf.grid;
    DefectReport rep;
    if (g.rows() < static_cast<std::size_t>(detail::kStencil) || g.cols() < static_cast<std::size_t>(detail::kStencil)) {
        rep.projectable = false;
        rep.warnings.push_back("grid too small for five-point differences");
        return rep;
    }
    auto comp = [&](int c) {
        return [&surf, c](std::size_t idx) {
            const auto& P = surf.points[idx];
            return c == 0 ? P.x : c == 1 ? P.y : c == 2 ? P.p : P.q;
        };
    };
    if (surf.spec) {
        for (std::size_t k = 0; k < surf.points.size(); ++k) {
            if (surf.valid[k]) {
                rep.max_abs_H = std::max(rep.max_abs_H, std::abs(eval_H(*surf.spec, surf.points[k])));
            }
        }
    }

    // projectability
    if (surf.chart == Chart::Base) {
        for (std::size_t i = 0; i < g.rows() && rep.projectable; ++i) {
            for (std::size_t j = 0; j < g.cols(); ++j) {
                const auto& P = surf.at(i, j);
                const double scale = 1.0 + std::abs(g.sigma[i]) + std::abs(g.tau[j]);
                if (surf.is_valid(i, j) && (std::abs(P.x - g.sigma[i]) > 1e-8 * scale || std::abs(P.y - g.tau[j]) > 1e-8 * scale)) {
                    rep.projectable = false;
                    rep.warnings.push_back("base-chart surface does not sit over its grid");
                    break;
                }
            }
        }
    }
    std::vector<double> defect(surf.points.size(), std::nan(""));
    int jac_sign = 0;
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < g.rows() && rep.projectable; ++i) {
        for (std::size_t j = 0; j < g.cols(); ++j) {
            const std::size_t idx = surf.index(i, j);
            if (!surf.valid[idx]) {
                continue;
            }
            double d;
            if (surf.chart == Chart::Base) {
                const auto qx = detail::grid_derivative(g, surf.valid, comp(3), i, j, 0);
                const auto py = detail::grid_derivative(g, surf.valid, comp(2), i, j, 1);
                if (!qx || !py) {
                    continue;
                }
                d = *qx - *py;
            } else {
                double D[4][2];
                bool ok = true;
                for (int c = 0; c < 4 && ok; ++c) {
                    for (int dir = 0; dir < 2 && ok; ++dir) {
                        const auto v = detail::grid_derivative(g, surf.valid, comp(c), i, j, dir);
                        ok = v.has_value();
                        D[c][dir] = ok ? *v : 0.0;
                    }
                }
                if (!ok) {
                    continue;
                }
                const double J = D[0][0] * D[1][1] - D[0][1] * D[1][0];
                const int s = J > 0 ? 1 : (J < 0 ? -1 : 0);
                if (s == 0 || (jac_sign != 0 && s != jac_sign)) {
                    rep.projectable = false;
                    rep.warnings.push_back("base projection folds or degenerates over the parameter grid");
                    break;
                }
                jac_sign = s;
                // omega(F_sigma, F_tau) = (q_x - p_y) det d(x,y)/d(sigma,tau)
                const double w = D[2][0] * D[0][1] - D[2][1] * D[0][0] + D[3][0] * D[1][1] - D[3][1] * D[1][0];
                d = w / J;
            }
            defect[idx] = d;
            const double ad = std::abs(d);
            rep.max_defect = std::max(rep.max_defect, ad);
            if (!detail::stencil_touches_axis(g, i, j)) {
                rep.max_defect_off_axes = std::max(rep.max_defect_off_axes, ad);
            }
            sum += ad;
            ++count;
        }
    }
    if (!rep.projectable) {
        rep.max_defect = rep.mean_defect = rep.max_defect_off_axes = 0.0;
        rep.lagrangian = false;
        return rep;
    }
    rep.nodes = count;
    rep.mean_defect = count ? sum / count : 0.0;

    // discrete circulation around each cell, trapezoid on edges
    for (std::size_t i = 0; i + 1 < g.rows(); ++i) {
        for (std::size_t j = 0; j + 1 < g.cols(); ++j) {
            const std::size_t c[4] = {surf.index(i, j), surf.index(i + 1, j), surf.index(i + 1, j + 1),
                                      surf.index(i, j + 1)};
            bool ok = true;
            for (auto k : c) {
                ok = ok && surf.valid[k];
            }
            if (!ok) {
                continue;
            }
            double circ = 0.0, area = 0.0;
            for (int e = 0; e < 4; ++e) {
                const auto& A = surf.points[c[e]];
                const auto& B = surf.points[c[(e + 1) % 4]];
                circ += 0.5 * (A.p + B.p) * (B.x - A.x) + 0.5 * (A.q + B.q) * (B.y - A.y);
                area += A.x * B.y - B.x * A.y;
            }
            area = std::abs(area) / 2;
            if (area > 0) {
                rep.loop_defect = std::max(rep.loop_defect, std::abs(circ) / area);
            }
        }
    }
    rep.lagrangian = rep.max_defect < tol;
    return rep;
}

/// z from integrating p dx + q dy along grid paths from the base node, trapezoid rule.
inline SolutionGrid reconstruct_z(const JetSurface& surf, double x0 = 0.0, double y0 = 0.0,
                                  PathOrder order = PathOrder::HorizontalFirst)
{
    if (surf.chart != Chart::Base) {
        fail(ErrorKind::Reconstruction, "surface is not sampled over a base (x, y) grid");
    }
    const Grid& g = surf.grid;
    const DefectReport rep = check_lagrangian(surf);
    if (!rep.projectable) {
        fail(ErrorKind::Reconstruction, "surface does not project onto its base grid");
    }
    // Saddle jets are only finitely smooth across the axes, so stencils that
    // straddle x = 0 or y = 0 carry truncation error unrelated to closedness.
    if (rep.max_defect_off_axes > 1e-3) {
        std::ostringstream os;
        os << "surface is far from Lagrangian: max |q_x - p_y| = " << rep.max_defect_off_axes;
        fail(ErrorKind::Reconstruction, os.str());
    }
    auto find = [](const std::vector<double>& v, double x, const char* name) {
        for (std::size_t k = 0; k < v.size(); ++k) {
            const double h = v.size() > 1 ? std::abs(v[std::min(k + 1, v.size() - 1)] - v[k == 0 ? 0 : k - 1]) : 1.0;
            if (std::abs(v[k] - x) <= 1e-9 * std::max(h, 1e-300)) {
                return k;
            }
        }
        fail(ErrorKind::Precondition, std::string("base point ") + name + " is not a grid node");
    };
    const std::size_t i0 = find(g.sigma, x0, "x"), j0 = find(g.tau, y0, "y");

    SolutionGrid sol;
    sol.grid = g;
    sol.x0 = g.sigma[i0];
    sol.y0 = g.tau[j0];
    const std::size_t n = surf.points.size();
    sol.z.assign(n, std::nan(""));
    sol.p.resize(n);
    sol.q.resize(n);
    sol.valid.assign(n, 0);
    for (std::size_t k = 0; k < n; ++k) {
        sol.p[k] = surf.points[k].p;
        sol.q[k] = surf.points[k].q;
    }
    if (rep.max_defect > 1e-6) {
        std::ostringstream os;
        os << "surface is only approximately Lagrangian: max |q_x - p_y| = " << rep.max_defect
           << " (" << rep.max_defect_off_axes << " away from the axes)";
        sol.warnings.push_back(os.str());
    }
    sol.loop_defect = rep.loop_defect;

    auto idx = [&](std::size_t i, std::size_t j) { return i * g.cols() + j; };
    auto set = [&](std::size_t k, double v, bool ok) {
        sol.z[k] = ok ? v : std::nan("");
        sol.valid[k] = ok ? 1 : 0;
    };
    // step between neighbouring nodes along x (dir 0) or y (dir 1)
    auto step = [&](std::size_t from, std::size_t to, int dir) {
        const double a = dir == 0 ? g.sigma[from / g.cols()] : g.tau[from % g.cols()];
        const double b = dir == 0 ? g.sigma[to / g.cols()] : g.tau[to % g.cols()];
        const double fa = dir == 0 ? sol.p[from] : sol.q[from];
        const double fb = dir == 0 ? sol.p[to] : sol.q[to];
        return 0.5 * (fa + fb) * (b - a);
    };
    set(idx(i0, j0), 0.0, surf.valid[idx(i0, j0)] != 0);
    const int first = order == PathOrder::HorizontalFirst ? 0 : 1;
    const int second = 1 - first;
    const std::size_t n_first = first == 0 ? g.rows() : g.cols();
    const std::size_t n_second = second == 0 ? g.rows() : g.cols();
    const std::size_t a0 = first == 0 ? i0 : j0, b0 = first == 0 ? j0 : i0;
    auto node = [&](std::size_t along_first, std::size_t along_second) {
        return first == 0 ? idx(along_first, along_second) : idx(along_second, along_first);
    };
    // leg one: along the first direction through the base node
    for (int dirn : {1, -1}) {
        for (std::ptrdiff_t k = static_cast<std::ptrdiff_t>(a0) + dirn;
             k >= 0 && k < static_cast<std::ptrdiff_t>(n_first); k += dirn) {
            const std::size_t cur = node(k, b0), prev = node(k - dirn, b0);
            const bool ok = sol.valid[prev] && surf.valid[cur];
            set(cur, ok ? sol.z[prev] + step(prev, cur, first) : 0.0, ok);
        }
    }
    // leg two: from each node of leg one along the second direction
    for (std::size_t a = 0; a < n_first; ++a) {
        for (int dirn : {1, -1}) {
            for (std::ptrdiff_t k = static_cast<std::ptrdiff_t>(b0) + dirn;
                 k >= 0 && k < static_cast<std::ptrdiff_t>(n_second); k += dirn) {
                const std::size_t cur = node(a, k), prev = node(a, k - dirn);
                const bool ok = sol.valid[prev] && surf.valid[cur];
                set(cur, ok ? sol.z[prev] + step(prev, cur, second) : 0.0, ok);
            }
        }
    }
    return sol;
}

/// |H| with the carried (p, q) and the mismatch between (p, q) and the
/// differences of the reconstructed z.
inline DefectReport residual_grid(const HamiltonianSpec& spec, const SolutionGrid& sol)
{
    const Grid& g = sol.grid;
    DefectReport rep;
    for (std::size_t i = 0; i < g.rows(); ++i) {
        for (std::size_t j = 0; j < g.cols(); ++j) {
            const std::size_t k = sol.index(i, j);
            if (!sol.valid[k]) {
                continue;
            }
            ++rep.nodes;
            rep.max_abs_H = std::max(rep.max_abs_H, std::abs(eval_H(spec, {g.sigma[i], g.tau[j], sol.p[k], sol.q[k]})));
            auto zf = [&sol](std::size_t idx) { return sol.z[idx]; };
            if (const auto zx = detail::grid_derivative(g, sol.valid, zf, i, j, 0)) {
                rep.max_zx_error = std::max(rep.max_zx_error, std::abs(*zx - sol.p[k]));
            }
            if (const auto zy = detail::grid_derivative(g, sol.valid, zf, i, j, 1)) {
                rep.max_zy_error = std::max(rep.max_zy_error, std::abs(*zy - sol.q[k]));
            }
        }
    }
    rep.loop_defect = sol.loop_defect;
    return rep;
}

/// Builds a base-chart jet surface from callables, e.g. for exact jets in tests.
template <class PFn, class QFn>
JetSurface jet_from_functions(const Grid& g, PFn&& p, QFn&& q, std::optional<HamiltonianSpec> spec = std::nullopt)
{
    JetSurface surf("explicit-jet", Chart::Base, g);
    surf.sigma_name = "x";
    surf.tau_name = "y";
    for (std::size_t i = 0; i < g.rows(); ++i) {
        for (std::size_t j = 0; j < g.cols(); ++j) {
            const double x = g.sigma[i], y = g.tau[j];
            surf.at(i, j) = {x, y, p(x, y), q(x, y)};
        }
    }
    surf.spec = std::move(spec);
    if (surf.spec) {
        surf.update_residual();
    }
    return surf;
}

} // namespace saddlejet
