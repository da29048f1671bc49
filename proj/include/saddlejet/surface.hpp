#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "saddlejet/data_function.hpp"
#include "saddlejet/error.hpp"
#include "saddlejet/hamiltonian.hpp"
#include "saddlejet/phase.hpp"

namespace saddlejet {

/// Rectangular, ordered parameter grid; sigma is the slow (row) index.
struct Grid {
    std::vector<double> sigma;
    std::vector<double> tau;

    static std::vector<double> linspace(double lo, double hi, int n)
    {
        require(n >= 2, ErrorKind::Validation, "linspace needs at least 2 nodes");
        std::vector<double> out(n);
        for (int k = 0; k < n; ++k) {
            out[k] = lo + (hi - lo) * k / (n - 1);
        }
        // endpoints exactly, so symmetric grids contain 0 when n is odd
        out.front() = lo;
        out.back() = hi;
        if (n % 2 == 1 && lo == -hi) {
            out[n / 2] = 0.0;
        }
        return out;
    }

    static Grid square(double half_width, int n)
    {
        auto v = linspace(-half_width, half_width, n);
        return {v, v};
    }

    std::size_t rows() const { return sigma.size(); }
    std::size_t cols() const { return tau.size(); }
    std::size_t size() const { return rows() * cols(); }

    void validate() const
    {
        require(!sigma.empty() && !tau.empty(), ErrorKind::Validation, "grid must be non-empty");
        for (const auto* axis : {&sigma, &tau}) {
            for (std::size_t k = 1; k < axis->size(); ++k) {
                require((*axis)[k] > (*axis)[k - 1], ErrorKind::Validation, "grid nodes must be strictly increasing");
            }
            for (double v : *axis) {
                require(std::isfinite(v), ErrorKind::Validation, "grid nodes must be finite");
            }
        }
    }

    friend bool operator==(const Grid&, const Grid&) = default;
};

// Parameter: (sigma, tau) are construction parameters such as (u, v) or (s, t).
// Base: (sigma, tau) = (x, y), so the surface is a graph over the base grid.
enum class Chart { Parameter, Base };

struct SurfaceMeta {
    double a = 0.0;
    double b = 0.0;
    std::optional<DataFunction> phi_plus;
    std::optional<DataFunction> phi_minus;
    double max_abs_H = 0.0;
    std::vector<std::string> warnings;
    std::map<std::string, double> numbers; // construction-specific diagnostics
};

/// A sampled 2-parameter surface in phase space, meant as the jet of a solution.
struct JetSurface {
    std::string construction;
    Chart chart = Chart::Parameter;
    std::string sigma_name = "u";
    std::string tau_name = "v";
    Grid grid;
    std::vector<PhasePoint> points;
    std::vector<char> valid;
    std::optional<HamiltonianSpec> spec;
    SurfaceMeta meta;

    JetSurface() = default;
    JetSurface(std::string tag, Chart c, Grid g)
        : construction(std::move(tag)), chart(c), grid(std::move(g)), points(grid.size()), valid(grid.size(), 1)
    {
    }

    std::size_t index(std::size_t i, std::size_t j) const { return i * grid.cols() + j; }
    const PhasePoint& at(std::size_t i, std::size_t j) const { return points[index(i, j)]; }
    PhasePoint& at(std::size_t i, std::size_t j) { return points[index(i, j)]; }
    bool is_valid(std::size_t i, std::size_t j) const { return valid[index(i, j)] != 0; }

    std::size_t invalid_count() const
    {
        std::size_t n = 0;
        for (char v : valid) {
            n += v ? 0 : 1;
        }
        return n;
    }

    /// Largest |H| over valid points; also stored in meta.max_abs_H.
    double update_residual()
    {
        require(spec.has_value(), ErrorKind::Precondition, "surface has no Hamiltonian attached");
        double m = 0.0;
        for (std::size_t k = 0; k < points.size(); ++k) {
            if (valid[k]) {
                m = std::max(m, std::abs(eval_H(*spec, points[k])));
            }
        }
        meta.max_abs_H = m;
        return m;
    }
};

} // namespace saddlejet
