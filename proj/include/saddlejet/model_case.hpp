#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "saddlejet/data_function.hpp"
#include "saddlejet/error.hpp"
#include "saddlejet/hamiltonian.hpp"
#include "saddlejet/parallel.hpp"
#include "saddlejet/phase.hpp"
#include "saddlejet/surface.hpp"

// Closed forms for z_x^2 + z_y^2 = a^2 x^2 + b^2 y^2, i.e. H = (p^2+q^2-a^2x^2-b^2y^2)/2.
// Points are written as w1 v1 + w2 v2 + w3 v3 + w4 v4 (see SaddleBasis); the
// linear flow scales w1..w4 by e^{at}, e^{-bt}, e^{-at}, e^{bt}.

namespace saddlejet {

/// psi = -+(a^2/b^2) phi: the v4 coefficient of the branch curve through the cone.
inline DataFunction psi_model(double a, double b, const DataFunction& phi, Branch branch)
{
    require(a > 0 && b > 0, ErrorKind::Precondition, "psi_model needs a, b > 0");
    if (phi.is_zero()) {
        return phi;
    }
    return phi.scaled(-branch_sign(branch) * (a * a) / (b * b));
}

/// Branch curve gamma(s) = s v1 +- s v2 + phi(s) v3 -+ (a^2/b^2) phi(s) v4.
inline PhasePoint model_branch_curve(double a, double b, const DataFunction& phi, Branch branch, double s)
{
    const double sg = branch_sign(branch);
    const double f = phi(s);
    return SaddleBasis{a, b}.from_w({s, sg * s, f, -sg * (a * a) / (b * b) * f});
}

/// w-coordinates of the saddle surface point with w1 = u, w2 = v.
/// uv > 0 lies on the flow-out of the + branch, uv < 0 on the - branch; the
/// axes carry w3 = w4 = 0.
inline Vec4 model_saddle_w(double a, double b, const DataFunction& phi_plus, const DataFunction& phi_minus,
                           double u, double v)
{
    if (u == 0.0 || v == 0.0) {
        return {u, v, 0.0, 0.0};
    }
    const bool plus = (u > 0) == (v > 0);
    const DataFunction& phi = plus ? phi_plus : phi_minus;
    const double sg = plus ? 1.0 : -1.0;
    const double au = std::abs(u), av = std::abs(v);
    const double ab = a + b;
    // |u| = |s| e^{at}, |v| = |s| e^{-bt}, sign(s) = sign(u)
    const double s = std::copysign(std::pow(au, b / ab) * std::pow(av, a / ab), u);
    const double f = phi(s);
    if (f == 0.0) {
        return {u, v, 0.0, 0.0};
    }
    const double w3 = f * std::pow(av / au, a / ab);
    const double w4 = -sg * (a * a) / (b * b) * f * std::pow(au / av, b / ab);
    return {u, v, w3, w4};
}

inline PhasePoint model_saddle_point(double a, double b, const DataFunction& phi_plus, const DataFunction& phi_minus,
                                     double u, double v)
{
    return SaddleBasis{a, b}.from_w(model_saddle_w(a, b, phi_plus, phi_minus, u, v));
}

/// Exact flow of the model Hamiltonian.
inline PhasePoint model_linear_flow(double a, double b, const PhasePoint& P, double t)
{
    const double ca = std::cosh(a * t), sa = std::sinh(a * t);
    const double cb = std::cosh(b * t), sb = std::sinh(b * t);
    return {P.x * ca + P.p / a * sa, P.y * cb + P.q / b * sb, a * P.x * sa + P.p * ca, b * P.y * sb + P.q * cb};
}

/// n = ceil(min{(l+1)a, (l+1)b}/(a+b)) - 1; +inf for l = +inf.
inline double predicted_regularity(double a, double b, double l)
{
    require(a > 0 && b > 0, ErrorKind::Precondition, "predicted_regularity needs a, b > 0");
    require(l >= 1.0, ErrorKind::Precondition, "predicted_regularity needs l >= 1");
    if (std::isinf(l)) {
        return std::numeric_limits<double>::infinity();
    }
    const double r = (l + 1.0) * std::min(a, b) / (a + b);
    // guard against r landing a hair above an integer
    return std::ceil(r - 1e-12) - 1.0;
}

/// E(u, v) = u^{alpha-1} v^beta phi(u^alpha v^beta) on the open first quadrant, 0 elsewhere.
inline double eval_E(const DataFunction& phi, double alpha, double beta, double u, double v)
{
    if (u <= 0.0 || v <= 0.0) {
        return 0.0;
    }
    const double f = phi(std::pow(u, alpha) * std::pow(v, beta));
    if (f == 0.0) {
        return 0.0;
    }
    return std::pow(u, alpha - 1.0) * std::pow(v, beta) * f;
}

namespace detail {

inline void model_regularity_warnings(JetSurface& surf, double a, double b, const DataFunction& pp,
                                      const DataFunction& pm)
{
    for (const auto* phi : {&pp, &pm}) {
        const double l = phi->vanishing_order();
        if (!std::isinf(l) && l * std::min(a, b) <= std::max(a, b)) {
            std::ostringstream os;
            os << "vanishing order l=" << l << " gives predicted regularity n=" << predicted_regularity(a, b, l)
               << " < 1: the surface is not C^1 along the axes";
            surf.meta.warnings.push_back(os.str());
        }
    }
}

inline JetSurface model_surface_shell(std::string tag, Chart chart, double a, double b, const DataFunction& pp,
                                      const DataFunction& pm, Grid grid)
{
    require(a > 0 && b > 0, ErrorKind::Precondition, "model saddle surface needs a, b > 0");
    grid.validate();
    JetSurface surf(std::move(tag), chart, std::move(grid));
    surf.spec = HamiltonianSpec::model(a, b);
    surf.meta.a = a;
    surf.meta.b = b;
    surf.meta.phi_plus = pp;
    surf.meta.phi_minus = pm;
    model_regularity_warnings(surf, a, b, pp, pm);
    return surf;
}

} // namespace detail

/// The saddle family member N^2(phi+, phi-) sampled on a (u, v) = (w1, w2) grid.
inline JetSurface model_saddle_surface(double a, double b, const DataFunction& phi_plus,
                                       const DataFunction& phi_minus, const Grid& uv)
{
    JetSurface surf = detail::model_surface_shell("model-saddle", Chart::Parameter, a, b, phi_plus, phi_minus, uv);
    parallel_for(surf.points.size(), [&](std::size_t k) {
        const std::size_t i = k / uv.cols(), j = k % uv.cols();
        surf.points[k] = model_saddle_point(a, b, phi_plus, phi_minus, uv.sigma[i], uv.tau[j]);
    });
    surf.update_residual();
    return surf;
}

/// Same surface resampled over a base (x, y) grid: each node solves
/// x = u + w3(u, v), y = v + w4(u, v) for (u, v).
inline JetSurface model_saddle_surface_base(double a, double b, const DataFunction& phi_plus,
                                            const DataFunction& phi_minus, const Grid& xy)
{
    JetSurface surf = detail::model_surface_shell("model-saddle", Chart::Base, a, b, phi_plus, phi_minus, xy);
    surf.sigma_name = "x";
    surf.tau_name = "y";
    std::vector<char> failed(surf.points.size(), 0);
    parallel_for(surf.points.size(), [&](std::size_t k) {
        const double x = xy.sigma[k / xy.cols()], y = xy.tau[k % xy.cols()];
        const double scale = 1.0 + std::abs(x) + std::abs(y);
        double u = x, v = y;
        bool ok = false;
        // the v3, v4 parts are of higher order, so the fixed-point map is a
        // contraction near the origin
        for (int it = 0; it < 400 && !ok; ++it) {
            const Vec4 w = model_saddle_w(a, b, phi_plus, phi_minus, u, v);
            const double un = x - w[2], vn = y - w[3];
            ok = std::abs(un - u) + std::abs(vn - v) <= 1e-15 * scale;
            u = un;
            v = vn;
        }
        const Vec4 w = model_saddle_w(a, b, phi_plus, phi_minus, u, v);
        const double resid = std::abs(w[0] + w[2] - x) + std::abs(w[1] + w[3] - y);
        if (!ok && !(resid <= 1e-13 * scale)) {
            failed[k] = 1;
            surf.valid[k] = 0;
            surf.points[k] = {x, y, std::nan(""), std::nan("")};
            return;
        }
        surf.points[k] = SaddleBasis{a, b}.from_w(w);
    });
    std::size_t holes = 0;
    for (char f : failed) {
        holes += f;
    }
    if (holes > 0) {
        surf.meta.warnings.push_back(std::to_string(holes) + " base nodes could not be inverted and are marked invalid");
    }
    surf.meta.numbers["invalid_nodes"] = static_cast<double>(holes);
    surf.update_residual();
    return surf;
}

} // namespace saddlejet
