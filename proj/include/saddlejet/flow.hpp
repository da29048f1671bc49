#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>
#include <boost/numeric/odeint.hpp>

#include "saddlejet/data_function.hpp"
#include "saddlejet/error.hpp"
#include "saddlejet/hamiltonian.hpp"
#include "saddlejet/model_case.hpp"
#include "saddlejet/parallel.hpp"
#include "saddlejet/phase.hpp"
#include "saddlejet/series.hpp"
#include "saddlejet/surface.hpp"

namespace saddlejet {

// ---------------------------------------------------------------------------
// Characteristic flow

struct FlowOptions {
    double tol = 1e-10;          // absolute and relative error per step
    double max_step = 0.1;
    double radius_bound = 1e8;   // |P| beyond this counts as blow-up
    double min_step = 1e-13;     // relative to max(1, |t|)
};

struct FlowResult {
    PhasePoint end;
    double H_drift = 0.0; // |H(end) - H(start)|
    int steps = 0;
    int rejected = 0;
};

/// Integration failure; carries the state reached before giving up.
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, PhasePoint last, double t_reached)
        : Error(ErrorKind::Integration, what), last_(last), t_reached_(t_reached)
    {
    }

    const PhasePoint& last() const { return last_; }
    double t_reached() const { return t_reached_; }

private:
    PhasePoint last_;
    double t_reached_;
};

/// Phi_t(P) for xi_H by an adaptive Dormand-Prince 5(4) pair.
inline FlowResult integrate_flow_ex(const HamiltonianSpec& spec, const PhasePoint& P, double t,
                                    const FlowOptions& opt = {})
{
    namespace ode = boost::numeric::odeint;
    using State = std::array<double, 4>;
    require(P.finite() && std::isfinite(t), ErrorKind::Precondition, "integrate_flow needs finite inputs");
    require(opt.tol > 0, ErrorKind::Precondition, "integrate_flow needs tol > 0");

    FlowResult res;
    res.end = P;
    const double H0 = eval_H(spec, P);
    if (t == 0.0) {
        return res;
    }
    auto rhs = [&spec](const State& x, State& dxdt, double) { dxdt = characteristic_field(spec, PhasePoint(x)); };
    auto stepper = ode::make_controlled(opt.tol, opt.tol, ode::runge_kutta_dopri5<State>());

    State x = P.vec();
    double tc = 0.0;
    const double dir = t > 0 ? 1.0 : -1.0;
    double dt = dir * std::min(opt.max_step, std::abs(t));
    int failures_in_row = 0;
    while (dir * (t - tc) > 0) {
        if (dir * (tc + dt - t) > 0) {
            dt = t - tc;
        }
        const double t_before = tc;
        const auto r = stepper.try_step(rhs, x, tc, dt);
        if (r == ode::success) {
            ++res.steps;
            failures_in_row = 0;
            if (std::abs(dt) > opt.max_step) {
                dt = dir * opt.max_step;
            }
            if (!PhasePoint(x).finite() || norm(x) > opt.radius_bound) {
                std::ostringstream os;
                os << "trajectory left the radius bound " << opt.radius_bound << " at t=" << tc;
                throw IntegrationError(os.str(), PhasePoint(x), tc);
            }
            // land exactly on the end point
            if (dir * (t - tc) < 1e-15 * std::max(1.0, std::abs(t))) {
                tc = t;
            }
        } else {
            ++res.rejected;
            ++failures_in_row;
            tc = t_before;
            if (std::abs(dt) < opt.min_step * std::max(1.0, std::abs(tc)) || failures_in_row > 200) {
                std::ostringstream os;
                os << "step size underflow at t=" << tc;
                throw IntegrationError(os.str(), PhasePoint(x), tc);
            }
        }
    }
    res.end = PhasePoint(x);
    res.H_drift = std::abs(eval_H(spec, res.end) - H0);
    return res;
}

inline PhasePoint integrate_flow(const HamiltonianSpec& spec, const PhasePoint& P, double t, double tol = 1e-10)
{
    FlowOptions opt;
    opt.tol = tol;
    return integrate_flow_ex(spec, P, t, opt).end;
}

/// Samples of Phi_t(P) at the given times (any order, any sign), reusing segments.
inline std::vector<PhasePoint> flow_samples(const HamiltonianSpec& spec, const PhasePoint& P,
                                            const std::vector<double>& times, const FlowOptions& opt = {})
{
    std::vector<PhasePoint> out(times.size());
    std::vector<std::size_t> order(times.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto i, auto j) { return times[i] < times[j]; });
    // forward from 0 through the non-negative times, backward through the negative ones
    PhasePoint cur = P;
    double tc = 0.0;
    for (auto k : order) {
        if (times[k] >= 0) {
            cur = integrate_flow_ex(spec, cur, times[k] - tc, opt).end;
            tc = times[k];
            out[k] = cur;
        }
    }
    cur = P;
    tc = 0.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (times[*it] < 0) {
            cur = integrate_flow_ex(spec, cur, times[*it] - tc, opt).end;
            tc = times[*it];
            out[*it] = cur;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Noncharacteristic strips

struct CharacteristicStrip {
    double s_min = -1.0;
    double s_max = 1.0;
    std::function<PhasePoint(double)> curve;
    std::function<Vec4(double)> tangent; // c'(s)
    double max_abs_H = 0.0;              // over the recorded samples
    std::string description;

    PhasePoint operator()(double s) const { return curve(s); }
};

/// Strip from an arbitrary curve; the tangent is taken by central differences.
inline CharacteristicStrip make_strip(std::function<PhasePoint(double)> c, double s_min, double s_max,
                                      const HamiltonianSpec& spec, int samples = 201, double tol = 1e-10)
{
    require(s_max > s_min, ErrorKind::Precondition, "strip needs s_min < s_max");
    CharacteristicStrip strip;
    strip.s_min = s_min;
    strip.s_max = s_max;
    strip.curve = c;
    strip.tangent = [c](double s) {
        const double h = 1e-6 * std::max(1.0, std::abs(s));
        return (1.0 / (2 * h)) * (c(s + h).vec() - c(s - h).vec());
    };
    strip.description = "custom";
    for (int k = 0; k < samples; ++k) {
        const double s = s_min + (s_max - s_min) * k / (samples - 1);
        strip.max_abs_H = std::max(strip.max_abs_H, std::abs(eval_H(spec, c(s))));
    }
    if (strip.max_abs_H >= tol) {
        std::ostringstream os;
        os << "curve is not inside {H = 0}: max |H| = " << strip.max_abs_H;
        fail(ErrorKind::Strip, os.str());
    }
    return strip;
}

/// psi(s) such that f(-4a^2 s phi(s), -+4b^2 s psi(s)) = 0 near the model value.
inline double solve_strip_psi(const Bivariate& f, double a, double b, double phi_s, double s, Branch branch)
{
    const double sg = branch_sign(branch);
    if (s == 0.0 || phi_s == 0.0) {
        return 0.0;
    }
    const double U = -4.0 * a * a * s * phi_s;
    auto g = [&](double V) { return f(U, V); };
    const double V0 = -U; // root for f = u + v
    double lo = V0, hi = V0;
    double glo = g(lo), ghi = glo;
    if (glo != 0.0) {
        double delta = 0.5 * std::abs(U);
        const double window = 10.0 * (1.0 + std::abs(U));
        bool bracketed = false;
        while (delta <= window) {
            lo = V0 - delta;
            hi = V0 + delta;
            glo = g(lo);
            ghi = g(hi);
            if (!std::isfinite(glo) || !std::isfinite(ghi)) {
                break;
            }
            if ((glo <= 0) != (ghi <= 0)) {
                bracketed = true;
                break;
            }
            delta *= 2.0;
        }
        if (!bracketed) {
            std::ostringstream os;
            os << "no root of f(u, .) bracketed near the model value at s=" << s
               << "; f may violate the normal-form constraints here";
            fail(ErrorKind::Strip, os.str());
        }
        boost::uintmax_t iters = 200;
        const auto root = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi,
                                                            boost::math::tools::eps_tolerance<double>(52), iters);
        // the bracket ends are adjacent doubles; keep whichever is closer to a root
        const double V = std::abs(g(root.first)) <= std::abs(g(root.second)) ? root.first : root.second;
        return V / (-sg * 4.0 * b * b * s);
    }
    return V0 / (-sg * 4.0 * b * b * s);
}

/// gamma(s) = s v1 +- s v2 + phi(s) v3 + psi(s) v4 inside {H = 0} for a
/// normal-form (or model) Hamiltonian.
inline CharacteristicStrip complete_strip(const HamiltonianSpec& spec, const DataFunction& phi, Branch branch,
                                          double s_min = -0.5, double s_max = 0.5, int samples = 201,
                                          double tol = 1e-10)
{
    const auto rates = spec.normal_form_rates();
    require(rates.has_value(), ErrorKind::Precondition, "complete_strip needs a normal-form or model Hamiltonian");
    require(s_max > s_min, ErrorKind::Precondition, "strip needs s_min < s_max");
    const auto [a, b] = *rates;
    const Bivariate f = spec.normal_form_f();
    const bool linear = spec.is_model();
    const double sg = branch_sign(branch);

    CharacteristicStrip strip;
    strip.s_min = s_min;
    strip.s_max = s_max;
    auto psi = [=](double s) {
        const double ph = phi(s);
        if (linear) {
            return -sg * (a * a) / (b * b) * ph;
        }
        return solve_strip_psi(f, a, b, ph, s, branch);
    };
    const SaddleBasis B{a, b};
    strip.curve = [=](double s) { return B.from_w({s, sg * s, phi(s), psi(s)}); };
    strip.tangent = [=](double s) {
        const double h = 1e-6 * std::max(1.0, std::abs(s));
        const double dpsi = (psi(s + h) - psi(s - h)) / (2 * h);
        const Vec4 dw{1.0, sg, phi.derivative(s), dpsi};
        // from_w is linear
        return B.from_w(dw).vec();
    };
    strip.description = std::string("complete-strip ") + (branch == Branch::Plus ? "+" : "-") + " " + phi.name();
    for (int k = 0; k < samples; ++k) {
        const double s = s_min + (s_max - s_min) * k / (samples - 1);
        strip.max_abs_H = std::max(strip.max_abs_H, std::abs(eval_H(spec, strip.curve(s))));
    }
    if (!(strip.max_abs_H < tol)) {
        std::ostringstream os;
        os << "completed strip misses {H = 0}: max |H| = " << strip.max_abs_H;
        fail(ErrorKind::Strip, os.str());
    }
    return strip;
}

/// F(s, t) = Phi_t(c(s)) on the given (s, t) grid.
inline JetSurface surface_from_strip(const HamiltonianSpec& spec, const CharacteristicStrip& strip, const Grid& st,
                                     double tol = 1e-10)
{
    st.validate();
    require(strip.max_abs_H < tol, ErrorKind::CharacteristicData, "strip is not inside {H = 0} to the tolerance");
    for (double s : st.sigma) {
        require(s >= strip.s_min && s <= strip.s_max, ErrorKind::Precondition, "s grid leaves the strip range");
        const PhasePoint c = strip(s);
        const Vec4 xi = characteristic_field(spec, c);
        if (max_abs(xi) < 1e-12) {
            continue; // critical point on the strip: transversality is waived there
        }
        const Vec4 dc = strip.tangent(s);
        const double det = dc[0] * xi[1] - dc[1] * xi[0];
        if (!(std::abs(det) > tol)) {
            std::ostringstream os;
            os << "strip is characteristic at s=" << s << " (base determinant " << det << ")";
            fail(ErrorKind::CharacteristicData, os.str());
        }
    }
    JetSurface surf("strip-flow", Chart::Parameter, st);
    surf.sigma_name = "s";
    surf.tau_name = "t";
    surf.spec = spec;
    if (auto r = spec.normal_form_rates()) {
        surf.meta.a = r->first;
        surf.meta.b = r->second;
    }
    FlowOptions opt;
    opt.tol = tol;
    const std::size_t nt = st.cols();
    parallel_for(st.rows(), [&](std::size_t i) {
        const auto row = flow_samples(spec, strip(st.sigma[i]), st.tau, opt);
        for (std::size_t j = 0; j < nt; ++j) {
            surf.points[i * nt + j] = row[j];
        }
    });
    surf.update_residual();
    return surf;
}

// ---------------------------------------------------------------------------
// Stable and unstable manifolds

enum class ManifoldKind { Stable, Unstable };

struct ManifoldDiagnostics {
    double seed_radius = 0.0;
    std::size_t targets = 0;
    std::size_t failed = 0;
    int max_newton_iterations = 0;
    double max_shooting_residual = 0.0;
    double max_abs_H = 0.0;
    double max_shrink_factor = 0.0; // worst |Phi_{-h}(P) - P0| / |P - P0| over the horizon
    double shrink_horizon = 0.0;
    std::vector<std::string> notes;
};

struct ManifoldResult {
    JetSurface surface;
    ManifoldKind kind = ManifoldKind::Unstable;
    double seed_radius = 0.0;
    ManifoldDiagnostics diagnostics;
};

struct ManifoldOptions {
    int nodes = 31;            // base grid nodes per side
    double seed_factor = 1e-4; // seed radius = seed_factor * radius
    double tol = 1e-10;
    int max_newton = 25;
    double newton_tol = 1e-11;
};

/// Local stable/unstable manifold of a hyperbolic critical point, sampled as a
/// graph over the square [x0 - r, x0 + r] x [y0 - r, y0 + r] (which covers the disk).
/// Each base node is reached by shooting from a seed at radius eps in the
/// eigenplane, corrected onto {H = H(P0)} along the complementary plane.
inline ManifoldResult invariant_manifold(const HamiltonianSpec& spec, const PhasePoint& P0, ManifoldKind kind,
                                         double radius, const ManifoldOptions& opt = {})
{
    require(radius > 0, ErrorKind::Precondition, "manifold radius must be positive");
    require(opt.nodes >= 2, ErrorKind::Precondition, "manifold grid needs at least 2 nodes per side");
    const Linearization lin = linearize(spec, P0);
    if (lin.spectrum != SpectrumKind::RealHyperbolic) {
        fail(ErrorKind::Classification,
             std::string("manifold needs a real hyperbolic spectrum; got ") + std::string(to_string(lin.spectrum)));
    }
    const double sgn = kind == ManifoldKind::Unstable ? 1.0 : -1.0;
    std::vector<int> own, other;
    for (int i = 0; i < 4; ++i) {
        (sgn * lin.eigenvalues[i].real() > 0 ? own : other).push_back(i);
    }
    require(own.size() == 2 && other.size() == 2, ErrorKind::Classification, "eigenvalues are not split 2 + 2");
    const Vec4 e1 = lin.real_vector(own[0]), e2 = lin.real_vector(own[1]);
    const Vec4 f1 = lin.real_vector(other[0]), f2 = lin.real_vector(other[1]);
    const double l1 = std::abs(lin.eigenvalues[own[0]].real()), l2 = std::abs(lin.eigenvalues[own[1]].real());
    const double pdet = base_det(e1, e2);
    if (!(std::abs(pdet) > 1e-9)) {
        fail(ErrorKind::Classification, "eigenplane does not project onto the base");
    }
    const double H0 = eval_H(spec, P0);
    const double eps = opt.seed_factor * radius;

    ManifoldResult out;
    out.kind = kind;
    out.seed_radius = eps;
    out.diagnostics.seed_radius = eps;
    Grid grid{Grid::linspace(P0.x - radius, P0.x + radius, opt.nodes),
              Grid::linspace(P0.y - radius, P0.y + radius, opt.nodes)};
    // keep the base projection of P0 exactly on the grid when it is the centre node
    if (opt.nodes % 2 == 1) {
        grid.sigma[opt.nodes / 2] = P0.x;
        grid.tau[opt.nodes / 2] = P0.y;
    }
    JetSurface surf(kind == ManifoldKind::Unstable ? "unstable-manifold" : "stable-manifold", Chart::Base, grid);
    surf.sigma_name = "x";
    surf.tau_name = "y";
    surf.spec = spec;
    surf.meta.a = lin.a;
    surf.meta.b = lin.b;

    FlowOptions fopt;
    fopt.tol = opt.tol;

    // seed(c) = P0 + c1 e1 + c2 e2 + kappa d, with kappa putting the seed on {H = H0}
    auto seed_of = [&](double c1, double c2, bool& ok) {
        Vec4 base = P0.vec() + c1 * e1 + c2 * e2;
        const Vec4 gb = spec.gradient(PhasePoint(base));
        Vec4 d = dot(gb, f1) * f1 + dot(gb, f2) * f2;
        ok = true;
        if (max_abs(d) == 0.0) {
            ok = std::abs(eval_H(spec, PhasePoint(base)) - H0) < 1e-14;
            return PhasePoint(base);
        }
        double kappa = 0.0;
        for (int it = 0; it < 30; ++it) {
            const PhasePoint S(base + kappa * d);
            const double r = eval_H(spec, S) - H0;
            if (std::abs(r) < 1e-15) {
                return S;
            }
            const double slope = dot(spec.gradient(S), d);
            if (slope == 0.0) {
                break;
            }
            kappa -= r / slope;
        }
        const PhasePoint S(base + kappa * d);
        ok = std::abs(eval_H(spec, S) - H0) < 1e-13;
        return S;
    };

    std::vector<int> iters(surf.points.size(), 0);
    std::vector<double> resid(surf.points.size(), 0.0);
    std::vector<std::string> notes(surf.points.size());
    parallel_for(surf.points.size(), [&](std::size_t k) {
        const double x = grid.sigma[k / grid.cols()], y = grid.tau[k % grid.cols()];
        const double dx = x - P0.x, dy = y - P0.y;
        // base offset in the projected eigenbasis
        const double al1 = (dx * e2[1] - dy * e2[0]) / pdet;
        const double al2 = (e1[0] * dy - e1[1] * dx) / pdet;
        if (al1 == 0.0 && al2 == 0.0) {
            surf.points[k] = P0;
            return;
        }
        double T = 0.0;
        if (std::abs(al1) > eps) {
            T = std::max(T, std::log(std::abs(al1) / eps) / l1);
        }
        if (std::abs(al2) > eps) {
            T = std::max(T, std::log(std::abs(al2) / eps) / l2);
        }
        double c1 = al1 * std::exp(-l1 * T), c2 = al2 * std::exp(-l2 * T);
        const double t_flow = sgn * T;
        auto shoot = [&](double u1, double u2, PhasePoint& end) {
            bool ok = true;
            const PhasePoint S = seed_of(u1, u2, ok);
            if (!ok) {
                throw Error(ErrorKind::Evaluation, "seed could not be corrected onto the level set");
            }
            end = integrate_flow_ex(spec, S, t_flow, fopt).end;
            return std::array<double, 2>{end.x - x, end.y - y};
        };
        try {
            PhasePoint end;
            auto F = shoot(c1, c2, end);
            double err = std::hypot(F[0], F[1]);
            int it = 0;
            while (err >= opt.newton_tol && it < opt.max_newton) {
                ++it;
                const double h1 = 1e-7 * std::max(std::abs(c1), eps), h2 = 1e-7 * std::max(std::abs(c2), eps);
                PhasePoint tmp;
                const auto Fa = shoot(c1 + h1, c2, tmp);
                const auto Fb = shoot(c1, c2 + h2, tmp);
                const double J11 = (Fa[0] - F[0]) / h1, J21 = (Fa[1] - F[1]) / h1;
                const double J12 = (Fb[0] - F[0]) / h2, J22 = (Fb[1] - F[1]) / h2;
                const double det = J11 * J22 - J12 * J21;
                if (det == 0.0 || !std::isfinite(det)) {
                    break;
                }
                const double d1 = (J22 * F[0] - J12 * F[1]) / det, d2 = (J11 * F[1] - J21 * F[0]) / det;
                double lam = 1.0;
                bool improved = false;
                for (int half = 0; half < 20; ++half) {
                    PhasePoint cand;
                    const auto Fc = shoot(c1 - lam * d1, c2 - lam * d2, cand);
                    const double ec = std::hypot(Fc[0], Fc[1]);
                    if (ec < err) {
                        c1 -= lam * d1;
                        c2 -= lam * d2;
                        F = Fc;
                        err = ec;
                        end = cand;
                        improved = true;
                        break;
                    }
                    lam *= 0.5;
                }
                if (!improved) {
                    break;
                }
            }
            iters[k] = it;
            resid[k] = err;
            if (err >= opt.newton_tol) {
                // a stalled Newton still yields a usable point if it is within the
                // integration noise of the target
                if (err > 1e3 * opt.newton_tol) {
                    surf.valid[k] = 0;
                    notes[k] = "shooting did not converge";
                }
            }
            surf.points[k] = end;
        } catch (const Error& e) {
            surf.valid[k] = 0;
            surf.points[k] = {x, y, std::nan(""), std::nan("")};
            notes[k] = e.what();
        }
    });

    auto& diag = out.diagnostics;
    diag.targets = surf.points.size();
    for (std::size_t k = 0; k < surf.points.size(); ++k) {
        diag.max_newton_iterations = std::max(diag.max_newton_iterations, iters[k]);
        if (surf.valid[k]) {
            diag.max_shooting_residual = std::max(diag.max_shooting_residual, resid[k]);
        } else {
            ++diag.failed;
            std::ostringstream os;
            os << "node (" << grid.sigma[k / grid.cols()] << ", " << grid.tau[k % grid.cols()] << "): " << notes[k];
            diag.notes.push_back(os.str());
        }
    }
    if (diag.failed > 0) {
        surf.meta.warnings.push_back(std::to_string(diag.failed) + " manifold nodes failed and are marked invalid");
    }

    // flowing back over the horizon must bring every point closer to P0
    const double lmin = std::min(l1, l2);
    diag.shrink_horizon = 2.0 * std::log(2.0) / lmin;
    std::vector<double> shrink(surf.points.size(), 0.0);
    parallel_for(surf.points.size(), [&](std::size_t k) {
        const double d0 = norm(surf.points[k].vec() - P0.vec());
        if (!surf.valid[k] || d0 == 0.0) {
            return;
        }
        const auto back = integrate_flow_ex(spec, surf.points[k], -sgn * diag.shrink_horizon, fopt).end;
        shrink[k] = norm(back.vec() - P0.vec()) / d0;
    });
    diag.max_shrink_factor = *std::max_element(shrink.begin(), shrink.end());
    surf.meta.numbers["seed_radius"] = eps;
    surf.meta.numbers["max_shrink_factor"] = diag.max_shrink_factor;
    surf.meta.numbers["shrink_horizon"] = diag.shrink_horizon;
    surf.meta.numbers["max_shooting_residual"] = diag.max_shooting_residual;
    diag.max_abs_H = surf.update_residual();
    out.surface = std::move(surf);
    return out;
}

// ---------------------------------------------------------------------------
// Saddle surfaces for normal-form Hamiltonians

/// Empty when (a, b) shows no resonance m a = n b with 3 <= m+n <= N.
inline std::string detect_resonances_warning(double a, double b, int N = 12, double tol = 1e-9)
{
    const auto r = detect_resonances(a, b, N, tol);
    if (r.empty()) {
        return {};
    }
    std::ostringstream os;
    os << "rates a=" << a << ", b=" << b << " are resonant up to degree " << N << ":";
    for (auto [m, n] : r) {
        os << " (" << m << "," << n << ")";
    }
    return os.str();
}

struct SaddleOptions {
    double tol = 1e-10;             // integrator tolerance
    double axis_threshold = 1e-8;   // cells closer to an axis take the closure value
    int max_newton = 25;
    double newton_tol = 1e-11;      // on |(w1, w2) - (u, v)|
    double strip_tol = 1e-10;
};

/// Saddle surface with prescribed phi+ and phi- for H = f(p^2-a^2x^2, q^2-b^2y^2)/2,
/// sampled on a (u, v) = (w1, w2) grid. Each cell shoots from the completed
/// strip gamma(s) for time t and solves w1 = u, w2 = v for (s, t) by Newton,
/// starting from the model-case values u = s e^{at}, v = +-s e^{-bt}.
inline JetSurface general_saddle_surface(const HamiltonianSpec& spec, const DataFunction& phi_plus,
                                         const DataFunction& phi_minus, const Grid& uv,
                                         const SaddleOptions& opt = {})
{
    const auto rates = spec.normal_form_rates();
    require(rates.has_value(), ErrorKind::Precondition,
            "general_saddle_surface needs a normal-form or model Hamiltonian");
    uv.validate();
    const auto [a, b] = *rates;
    const SaddleBasis B{a, b};

    JetSurface surf("general-saddle", Chart::Parameter, uv);
    surf.spec = spec;
    surf.meta.a = a;
    surf.meta.b = b;
    surf.meta.phi_plus = phi_plus;
    surf.meta.phi_minus = phi_minus;
    detail::model_regularity_warnings(surf, a, b, phi_plus, phi_minus);
    const auto res = detect_resonances_warning(a, b);
    if (!res.empty()) {
        surf.meta.warnings.push_back(res);
    }

    double smax = 0.0;
    for (double u : uv.sigma) {
        for (double v : uv.tau) {
            smax = std::max(smax, std::pow(std::abs(u), b / (a + b)) * std::pow(std::abs(v), a / (a + b)));
        }
    }
    const double srange = std::max(1.25 * smax, 1e-3);
    const CharacteristicStrip plus = complete_strip(spec, phi_plus, Branch::Plus, -srange, srange, 201, opt.strip_tol);
    const CharacteristicStrip minus =
        complete_strip(spec, phi_minus, Branch::Minus, -srange, srange, 201, opt.strip_tol);

    FlowOptions fopt;
    fopt.tol = opt.tol;
    std::vector<int> iters(surf.points.size(), 0);
    parallel_for(surf.points.size(), [&](std::size_t k) {
        const double u = uv.sigma[k / uv.cols()], v = uv.tau[k % uv.cols()];
        if (std::min(std::abs(u), std::abs(v)) < opt.axis_threshold) {
            surf.points[k] = B.from_w({u, v, 0.0, 0.0});
            return;
        }
        const bool is_plus = (u > 0) == (v > 0);
        const CharacteristicStrip& strip = is_plus ? plus : minus;
        double s = std::copysign(std::pow(std::abs(u), b / (a + b)) * std::pow(std::abs(v), a / (a + b)), u);
        double t = std::log(std::abs(u) / std::abs(v)) / (a + b);
        auto eval = [&](double ss, double tt, PhasePoint& end) {
            require(ss >= strip.s_min && ss <= strip.s_max, ErrorKind::Evaluation, "shooting left the strip range");
            end = integrate_flow_ex(spec, strip(ss), tt, fopt).end;
            const Vec4 w = B.to_w(end);
            return std::array<double, 2>{w[0] - u, w[1] - v};
        };
        try {
            PhasePoint end;
            auto F = eval(s, t, end);
            double err = std::hypot(F[0], F[1]);
            int it = 0;
            while (err >= opt.newton_tol && it < opt.max_newton) {
                ++it;
                const double hs = 1e-7 * std::abs(s), ht = 1e-7 * std::max(1.0, std::abs(t));
                PhasePoint tmp;
                const auto Fs = eval(s + hs, t, tmp);
                const auto Ft = eval(s, t + ht, tmp);
                const double J11 = (Fs[0] - F[0]) / hs, J21 = (Fs[1] - F[1]) / hs;
                const double J12 = (Ft[0] - F[0]) / ht, J22 = (Ft[1] - F[1]) / ht;
                const double det = J11 * J22 - J12 * J21;
                if (det == 0.0 || !std::isfinite(det)) {
                    break;
                }
                const double ds = (J22 * F[0] - J12 * F[1]) / det, dt = (J11 * F[1] - J21 * F[0]) / det;
                double lam = 1.0;
                bool improved = false;
                for (int half = 0; half < 30; ++half) {
                    PhasePoint cand;
                    const double sn = s - lam * ds, tn = t - lam * dt;
                    if ((sn > 0) == (s > 0) && sn != 0.0) {
                        const auto Fc = eval(sn, tn, cand);
                        const double ec = std::hypot(Fc[0], Fc[1]);
                        if (ec < err) {
                            s = sn;
                            t = tn;
                            F = Fc;
                            err = ec;
                            end = cand;
                            improved = true;
                            break;
                        }
                    }
                    lam *= 0.5;
                }
                if (!improved) {
                    break;
                }
            }
            iters[k] = it;
            surf.points[k] = end;
            if (err >= opt.newton_tol) {
                surf.valid[k] = 0;
            }
        } catch (const Error&) {
            surf.valid[k] = 0;
            surf.points[k] = B.from_w({u, v, std::nan(""), std::nan("")});
        }
    });
    const std::size_t holes = surf.invalid_count();
    if (holes > 0) {
        surf.meta.warnings.push_back(std::to_string(holes) + " cells did not converge and are marked invalid");
    }
    surf.meta.numbers["invalid_cells"] = static_cast<double>(holes);
    surf.meta.numbers["max_newton_iterations"] = *std::max_element(iters.begin(), iters.end());
    surf.update_residual();
    return surf;
}

} // namespace saddlejet
