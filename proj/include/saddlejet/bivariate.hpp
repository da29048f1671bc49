#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "saddlejet/error.hpp"

namespace saddlejet {

struct PolyTerm {
    int i = 0; // power of the first argument
    int j = 0; // power of the second argument
    double c = 0.0;
};

// How a bivariate function was built, so it can be written back out.
struct BivariateDescriptor {
    enum class Kind { Builtin, Polynomial, Custom };
    Kind kind = Kind::Custom;
    std::string name;   // builtin name
    double param = 0.0; // builtin parameter (the c of "product")
    std::vector<PolyTerm> terms;
};

// A smooth function of two variables with first and second derivatives.
// Hessian entries are returned as (f_11, f_12, f_22).
struct Bivariate {
    std::function<double(double, double)> value;
    std::function<std::array<double, 2>(double, double)> grad;
    std::function<std::array<double, 3>(double, double)> hess;
    BivariateDescriptor desc;

    double operator()(double u, double v) const { return value(u, v); }
};

namespace detail {

inline double ipow(double x, int n)
{
    double r = 1.0;
    for (int k = 0; k < n; ++k) {
        r *= x;
    }
    return r;
}

} // namespace detail

inline Bivariate polynomial(std::vector<PolyTerm> terms)
{
    for (const auto& t : terms) {
        require(t.i >= 0 && t.j >= 0, ErrorKind::Validation, "polynomial powers must be non-negative");
        require(std::isfinite(t.c), ErrorKind::Validation, "polynomial coefficients must be finite");
    }
    Bivariate f;
    f.desc.kind = BivariateDescriptor::Kind::Polynomial;
    f.desc.terms = terms;
    f.value = [terms](double u, double v) {
        double s = 0.0;
        for (const auto& t : terms) {
            s += t.c * detail::ipow(u, t.i) * detail::ipow(v, t.j);
        }
        return s;
    };
    f.grad = [terms](double u, double v) {
        std::array<double, 2> g{0.0, 0.0};
        for (const auto& t : terms) {
            if (t.i > 0) {
                g[0] += t.c * t.i * detail::ipow(u, t.i - 1) * detail::ipow(v, t.j);
            }
            if (t.j > 0) {
                g[1] += t.c * t.j * detail::ipow(u, t.i) * detail::ipow(v, t.j - 1);
            }
        }
        return g;
    };
    f.hess = [terms](double u, double v) {
        std::array<double, 3> h{0.0, 0.0, 0.0};
        for (const auto& t : terms) {
            if (t.i > 1) {
                h[0] += t.c * t.i * (t.i - 1) * detail::ipow(u, t.i - 2) * detail::ipow(v, t.j);
            }
            if (t.i > 0 && t.j > 0) {
                h[1] += t.c * t.i * t.j * detail::ipow(u, t.i - 1) * detail::ipow(v, t.j - 1);
            }
            if (t.j > 1) {
                h[2] += t.c * t.j * (t.j - 1) * detail::ipow(u, t.i) * detail::ipow(v, t.j - 2);
            }
        }
        return h;
    };
    return f;
}

/// f(u, v) = u + v
inline Bivariate linear_f()
{
    auto f = polynomial({{1, 0, 1.0}, {0, 1, 1.0}});
    f.desc = {BivariateDescriptor::Kind::Builtin, "linear", 0.0, {}};
    return f;
}

/// f(u, v) = u + v + c u v
inline Bivariate product_f(double c = 1.0)
{
    auto f = polynomial({{1, 0, 1.0}, {0, 1, 1.0}, {1, 1, c}});
    f.desc = {BivariateDescriptor::Kind::Builtin, "product", c, {}};
    return f;
}

/// f(u, v) = e^u + e^v - 2, which already has f(0,0)=0 and unit first partials.
inline Bivariate exp_f()
{
    Bivariate f;
    f.desc = {BivariateDescriptor::Kind::Builtin, "exp", 0.0, {}};
    f.value = [](double u, double v) { return std::exp(u) + std::exp(v) - 2.0; };
    f.grad = [](double u, double v) { return std::array<double, 2>{std::exp(u), std::exp(v)}; };
    f.hess = [](double u, double v) { return std::array<double, 3>{std::exp(u), 0.0, std::exp(v)}; };
    return f;
}

inline Bivariate builtin_f(const std::string& name, double param = 1.0)
{
    if (name == "linear") {
        return linear_f();
    }
    if (name == "product") {
        return product_f(param);
    }
    if (name == "exp") {
        return exp_f();
    }
    fail(ErrorKind::Validation, "unknown built-in f '" + name + "'");
}

// Wraps an arbitrary callable; derivatives by central differences with step eta
// (second derivatives use a step of at least 1e-4 to keep roundoff bounded).
inline Bivariate from_callable(std::function<double(double, double)> fn, double eta = 1e-5)
{
    Bivariate f;
    f.desc.kind = BivariateDescriptor::Kind::Custom;
    f.value = fn;
    f.grad = [fn, eta](double u, double v) {
        return std::array<double, 2>{(fn(u + eta, v) - fn(u - eta, v)) / (2 * eta),
                                     (fn(u, v + eta) - fn(u, v - eta)) / (2 * eta)};
    };
    const double h2 = std::max(eta, 1e-4);
    f.hess = [fn, h2](double u, double v) {
        const double f0 = fn(u, v);
        const double fuu = (fn(u + h2, v) - 2 * f0 + fn(u - h2, v)) / (h2 * h2);
        const double fvv = (fn(u, v + h2) - 2 * f0 + fn(u, v - h2)) / (h2 * h2);
        const double fuv = (fn(u + h2, v + h2) - fn(u + h2, v - h2) - fn(u - h2, v + h2)
                            + fn(u - h2, v - h2))
                           / (4 * h2 * h2);
        return std::array<double, 3>{fuu, fuv, fvv};
    };
    return f;
}

} // namespace saddlejet
