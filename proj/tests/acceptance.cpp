// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Reference values are recomputed here from closed forms or naive oracles
// rather than read back from the library.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "saddlejet/flow.hpp"
#include "saddlejet/hamiltonian.hpp"
#include "saddlejet/jet.hpp"
#include "saddlejet/model_case.hpp"
#include "saddlejet/series.hpp"
#include "saddlejet/verify.hpp"

using namespace saddlejet;
namespace orc = saddlejet_oracle;

namespace {

const double sqrt2 = std::numbers::sqrt2;

struct Outcome {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
    void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// omega = dp ^ dx + dq ^ dy on (x, y, p, q)
double omega(const Vec4& u, const Vec4& v) { return u[2] * v[0] - u[0] * v[2] + u[3] * v[1] - u[1] * v[3]; }

// distance of the direction of v from e, after scaling v onto e
double direction_error(const CVec4& v, const Vec4& e)
{
    std::complex<double> ve = 0;
    double ee = 0;
    for (int i = 0; i < 4; ++i) {
        ve += v[i] * e[i];
        ee += e[i] * e[i];
    }
    std::complex<double> vv = 0;
    for (int i = 0; i < 4; ++i) {
        vv += std::conj(v[i]) * v[i];
    }
    if (std::abs(ve) == 0) {
        return INFINITY;
    }
    // v / s with s = (v.e)/(e.e), compared with e
    const std::complex<double> s = ve / ee;
    double m = 0;
    for (int i = 0; i < 4; ++i) {
        m = std::max(m, std::abs(v[i] / s - e[i]));
    }
    return m;
}

// greedy matching of two eigenvalue lists
double multiset_distance(std::vector<std::complex<double>> a, std::vector<std::complex<double>> b)
{
    double worst = 0;
    for (const auto& x : a) {
        auto it = std::min_element(b.begin(), b.end(),
                                   [&](const auto& p, const auto& q) { return std::abs(p - x) < std::abs(q - x); });
        worst = std::max(worst, std::abs(*it - x));
        b.erase(it);
    }
    return worst;
}

// ---------------------------------------------------------------------------

Outcome eigen_structure()
{
    Outcome o;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> pos(0.2, 3.0), off(-1.0, 1.0);
    double worst_val = 0, worst_vec = 0;
    for (int k = 0; k < 100; ++k) {
        // model: eigenpairs in closed form
        const double a = pos(rng), b = pos(rng);
        const auto m = linearize(HamiltonianSpec::model(a, b), {0, 0, 0, 0});
        const std::vector<std::complex<double>> want{a, -b, -a, b};
        worst_val = std::max(worst_val, multiset_distance({m.closed_form_eigenvalues.begin(), m.closed_form_eigenvalues.end()}, want));
        const Vec4 vecs[4] = {{1, 0, a, 0}, {0, 1, 0, -b}, {1, 0, -a, 0}, {0, 1, 0, b}};
        for (int i = 0; i < 4; ++i) {
            // pair each closed-form vector with the eigenvector of the same eigenvalue
            int j = 0;
            for (int c = 1; c < 4; ++c) {
                if (std::abs(m.eigenvalues[c] - want[i]) < std::abs(m.eigenvalues[j] - want[i])) {
                    j = c;
                }
            }
            worst_vec = std::max(worst_vec, direction_error(m.eigenvectors[j], vecs[i]));
        }

        // separated quadratic-plus-cubic: the field's Jacobian at 0 is [[0, F], [G, 0]]
        const double F00 = pos(rng), F11 = pos(rng), G00 = pos(rng) * (off(rng) < 0 ? -1 : 1), G11 = pos(rng);
        const double F01 = 0.5 * off(rng) * std::sqrt(F00 * F11), G01 = off(rng);
        const auto f = polynomial({{2, 0, F00 / 2}, {1, 1, F01}, {0, 2, F11 / 2}, {3, 0, off(rng)}, {1, 2, off(rng)}});
        const auto h = polynomial({{2, 0, G00 / 2}, {1, 1, G01}, {0, 2, G11 / 2}, {2, 1, off(rng)}, {0, 3, off(rng)}});
        const auto s = linearize(HamiltonianSpec::separated(f, h), {0, 0, 0, 0});
        Eigen::Matrix4d L = Eigen::Matrix4d::Zero();
        L(0, 2) = F00;
        L(0, 3) = F01;
        L(1, 2) = F01;
        L(1, 3) = F11;
        L(2, 0) = G00;
        L(2, 1) = G01;
        L(3, 0) = G01;
        L(3, 1) = G11;
        const Eigen::Vector4cd ev = Eigen::EigenSolver<Eigen::Matrix4d>(L).eigenvalues();
        worst_val = std::max(worst_val, multiset_distance({s.closed_form_eigenvalues.begin(), s.closed_form_eigenvalues.end()},
                                                          {ev[0], ev[1], ev[2], ev[3]}));
    }
    o.check(worst_val < 1e-8, "eigenvalue mismatch " + num(worst_val));
    o.check(worst_vec < 1e-10, "eigenvector mismatch " + num(worst_vec));
    o.note("eigenvalues " + num(worst_val) + ", eigenvectors " + num(worst_vec));
    return o;
}

Outcome invariant_planes()
{
    Outcome o;
    const double a = 1.0, b = sqrt2;
    const auto rep = classify_invariant_planes(linearize(HamiltonianSpec::model(a, b), {0, 0, 0, 0}));
    int good = 0;
    for (const auto& p : rep.planes) {
        good += p.lagrangian && p.projectable;
    }
    o.check(rep.planes.size() == 6 && good == 4, std::to_string(good) + " good planes");
    const Vec4 v1{1, 0, a, 0}, v2{0, 1, 0, -b}, v3{1, 0, -a, 0}, v4{0, 1, 0, b};
    const double w13 = rep.plane(0, 2).omega_value, w24 = rep.plane(1, 3).omega_value;
    o.check(std::abs(w13 - 2 * a) < 1e-12 && std::abs(omega(v1, v3) - 2 * a) < 1e-12, "omega(v1,v3)=" + num(w13));
    o.check(std::abs(w24 + 2 * b) < 1e-12 && std::abs(omega(v2, v4) + 2 * b) < 1e-12, "omega(v2,v4)=" + num(w24));
    o.note(std::to_string(good) + "/6 Lagrangian and projectable");
    return o;
}

Outcome series_solver()
{
    Outcome o;
    const double a = 1.0, b = sqrt2;
    const int N = 12;
    BivariateSeries h(N);
    h.set(2, 0, 1.0);
    h.set(0, 2, 2.0);
    h.set(3, 0, 1.0);
    const auto sol = solve_saddle_series(h, a, b, SaddleSign::Plus, N, {});
    o.check(std::abs(sol.z(3, 0) - 1.0 / 6.0) < 1e-12, "z30=" + num(sol.z(3, 0)));

    // residual from naive polynomial arithmetic
    orc::Poly zp, hp{{{2, 0}, 1.0}, {{0, 2}, 2.0}, {{3, 0}, 1.0}};
    for (const auto& [m, n, c] : sol.z.terms()) {
        zp[{m, n}] = c;
    }
    const double res = orc::eikonal_residual(zp, hp, N);
    o.check(res < 1e-9, "residual " + num(res));

    double worst = 0;
    for (int n6 = 3; n6 <= 6; ++n6) {
        const auto s6 = solve_saddle_series(h, a, b, SaddleSign::Plus, n6, {});
        const auto ref = orc::brute_force(hp, a, b, 1.0, n6);
        std::size_t k = 0;
        for (int d = 3; d <= n6; ++d) {
            for (int m = 0; m <= d; ++m, ++k) {
                worst = std::max(worst, std::abs(ref[k] - s6.z(m, d - m)));
            }
        }
    }
    o.check(worst < 1e-9, "dense solve differs by " + num(worst));
    o.note("z30-1/6=" + num(sol.z(3, 0) - 1.0 / 6.0) + ", residual " + num(res) + ", dense " + num(worst));
    return o;
}

Outcome non_existence()
{
    Outcome o;
    double worst = 0;
    for (double c : {1.0, -1.0, 0.1, -0.1}) {
        BivariateSeries h(6);
        h.set(2, 0, 1.0);
        h.set(0, 2, 1.0);
        h.set(2, 2, c);
        const auto sol = solve_saddle_series(h, 1.0, 1.0, SaddleSign::Plus, 6, {});
        // the (2,2) coefficient of z drops out of (z_x^2 + z_y^2)_{2,2} when a = b,
        // so the obstruction is h_22 minus what lower degrees put there
        const auto z3 = orc::brute_force({{{2, 0}, 1.0}, {{0, 2}, 1.0}}, 1.0, 1.0, 1.0, 3);
        orc::Poly zp{{{2, 0}, 0.5}, {{0, 2}, -0.5}};
        for (int m = 0, k = 0; m <= 3; ++m, ++k) {
            zp[{m, 3 - m}] = z3[k];
        }
        const auto zx = orc::poly_d(zp, true), zy = orc::poly_d(zp, false);
        auto sq = orc::poly_mul(zx, zx, 4);
        for (auto& [k, v] : orc::poly_mul(zy, zy, 4)) {
            sq[k] += v;
        }
        const double expected = c - sq[{2, 2}];

        const ResonanceEntry* e22 = nullptr;
        for (const auto& e : sol.resonances.entries) {
            if (e.m == 2 && e.n == 2) {
                e22 = &e;
            }
        }
        if (!e22 || !e22->obstruction) {
            o.check(false, "no (2,2) resonance for c=" + num(c));
            continue;
        }
        worst = std::max({worst, std::abs(*e22->obstruction - c), std::abs(*e22->obstruction - expected)});
        o.check(sol.resonances.nonexistence, "non-existence not flagged for c=" + num(c));
    }
    o.check(worst < 1e-10, "obstruction off by " + num(worst));
    o.note("obstruction error " + num(worst));
    return o;
}

Outcome model_family()
{
    Outcome o;
    struct Cfg {
        double a, b;
        DataFunction pp, pm;
    };
    const std::vector<Cfg> cfgs{
        {1.0, sqrt2, DataFunction::monomial(1, 5), DataFunction::zero()},
        {1.0, sqrt2, DataFunction::zero(), DataFunction::zero()},
        {2.0, 0.5, DataFunction::monomial(0.3, 8), DataFunction::monomial(-0.5, 9)},
        {0.7, 1.3, DataFunction::bump(1.0, 0.3, 0.1), DataFunction::monomial(1, 3)},
        {1.5, 1.5, DataFunction::monomial(-2, 4, Extension::Even), DataFunction::bump(0.5, 0.2, 0.05)},
    };
    double worst_H = 0, worst_z = 0;
    for (const auto& c : cfgs) {
        const Grid g = Grid::square(0.5, 41);
        for (const auto& s : {model_saddle_surface(c.a, c.b, c.pp, c.pm, g), model_saddle_surface_base(c.a, c.b, c.pp, c.pm, g)}) {
            for (std::size_t k = 0; k < s.points.size(); ++k) {
                if (!s.valid[k]) {
                    continue;
                }
                const auto& P = s.points[k];
                const double H = 0.5 * (P.p * P.p + P.q * P.q - c.a * c.a * P.x * P.x - c.b * c.b * P.y * P.y);
                worst_H = std::max(worst_H, std::abs(H));
            }
        }
        const auto sol = reconstruct_z(model_saddle_surface_base(c.a, c.b, DataFunction::zero(), DataFunction::zero(), g));
        for (std::size_t i = 0; i < g.rows(); ++i) {
            for (std::size_t j = 0; j < g.cols(); ++j) {
                const double x = g.sigma[i], y = g.tau[j];
                worst_z = std::max(worst_z, std::abs(sol.z_at(i, j) - 0.5 * (c.a * x * x - c.b * y * y)));
            }
        }
    }
    o.check(worst_H < 1e-10, "max|H| " + num(worst_H));
    o.check(worst_z < 1e-9, "z error " + num(worst_z));
    o.note("max|H| " + num(worst_H) + ", z error " + num(worst_z));
    return o;
}

Outcome regularity_drop()
{
    Outcome o;
    const double a = 1.0, b = sqrt2, l = 5;
    const auto surf = model_saddle_surface(a, b, DataFunction::monomial(1, l), DataFunction::zero(),
                                           dyadic_quadrant_grid(0.5, 0.5, 12));
    const auto d = axis_decay_exponents(surf);
    const double e3 = a * (l + 1) / (a + b), e4 = (a * l - b) / (a + b);
    o.check(std::abs(d.exp_w3_v - e3) < 0.05, "w3 exponent " + num(d.exp_w3_v) + " vs " + num(e3));
    o.check(std::abs(d.exp_w4_v - e4) < 0.05, "w4 exponent " + num(d.exp_w4_v) + " vs " + num(e4));
    const double n = predicted_regularity(a, b, l);
    o.check(n == 2.0, "predicted regularity " + num(n));
    o.note("w3 " + num(d.exp_w3_v) + " (" + num(e3) + "), w4 " + num(d.exp_w4_v) + " (" + num(e4) + "), n=" + num(n));
    return o;
}

Outcome manifolds()
{
    Outcome o;
    const double a = 1.0, b = sqrt2;
    double worst_z = 0, worst_defect = 0;
    for (auto kind : {ManifoldKind::Unstable, ManifoldKind::Stable}) {
        const double sg = kind == ManifoldKind::Unstable ? 1.0 : -1.0;
        const auto m = invariant_manifold(HamiltonianSpec::model(a, b), {0, 0, 0, 0}, kind, 0.3);
        const auto sol = reconstruct_z(m.surface);
        for (std::size_t i = 0; i < sol.grid.rows(); ++i) {
            for (std::size_t j = 0; j < sol.grid.cols(); ++j) {
                const double x = sol.grid.sigma[i], y = sol.grid.tau[j];
                if (x * x + y * y <= 0.09 + 1e-12) {
                    worst_z = std::max(worst_z, std::abs(sol.z_at(i, j) - sg * 0.5 * (x * x + sqrt2 * y * y)));
                }
            }
        }
        worst_defect = std::max(worst_defect, check_lagrangian(m.surface).max_defect);
    }
    o.check(worst_z < 1e-6, "z error " + num(worst_z));
    o.check(worst_defect < 1e-5, "Lagrangian defect " + num(worst_defect));
    o.note("z error " + num(worst_z) + ", defect " + num(worst_defect));
    return o;
}

Outcome general_normal_form()
{
    Outcome o;
    const double a = 1.0, b = sqrt2;
    const auto phi = DataFunction::monomial(1, 5);
    const Grid g = Grid::square(0.3, 41);
    const auto s = general_saddle_surface(HamiltonianSpec::normal_form(product_f(1.0), a, b), phi, DataFunction::zero(), g);
    double worst_H = 0;
    for (std::size_t k = 0; k < s.points.size(); ++k) {
        const auto& P = s.points[k];
        const double U = P.p * P.p - a * a * P.x * P.x, V = P.q * P.q - b * b * P.y * P.y;
        if (s.valid[k]) {
            worst_H = std::max(worst_H, std::abs(0.5 * (U + V + U * V)));
        }
    }
    o.check(s.invalid_count() == 0, std::to_string(s.invalid_count()) + " invalid nodes");
    o.check(worst_H < 1e-7, "max|H| " + num(worst_H));
    const auto rep = check_lagrangian(s);
    o.check(rep.max_defect_off_axes < 1e-5, "Lagrangian defect " + num(rep.max_defect_off_axes));

    const auto lin = general_saddle_surface(HamiltonianSpec::normal_form(linear_f(), a, b), phi, DataFunction::zero(), g);
    const auto model = model_saddle_surface(a, b, phi, DataFunction::zero(), g);
    double worst_d = 0;
    for (std::size_t k = 0; k < model.points.size(); ++k) {
        worst_d = std::max(worst_d, max_abs(model.points[k].vec() - lin.points[k].vec()));
    }
    o.check(worst_d < 1e-8, "linear f differs from model by " + num(worst_d));
    o.note("max|H| " + num(worst_H) + ", defect " + num(rep.max_defect_off_axes) + " (axes " + num(rep.max_defect)
           + "), model match " + num(worst_d));
    return o;
}

Outcome non_uniqueness()
{
    Outcome o;
    const double a = 1.0, b = sqrt2;
    const Grid g = Grid::square(0.6, 121);
    const auto s0 = reconstruct_z(model_saddle_surface_base(a, b, DataFunction::zero(), DataFunction::zero(), g));
    const auto s1 = reconstruct_z(model_saddle_surface_base(a, b, DataFunction::monomial(1, 5), DataFunction::zero(), g));
    const auto prof = compare_solutions(s0, s1, HamiltonianSpec::model(a, b));
    const double diff = max_difference_on_circle(s0, s1, 0.5);
    // residuals from the grids directly
    double r0 = 0, r1 = 0;
    for (std::size_t k = 0; k < s0.z.size(); ++k) {
        r0 = std::max(r0, std::abs(0.5 * (s0.p[k] * s0.p[k] + s0.q[k] * s0.q[k])
                                   - 0.5 * (a * a * std::pow(g.sigma[k / g.cols()], 2) + b * b * std::pow(g.tau[k % g.cols()], 2))));
        r1 = std::max(r1, std::abs(0.5 * (s1.p[k] * s1.p[k] + s1.q[k] * s1.q[k])
                                   - 0.5 * (a * a * std::pow(g.sigma[k / g.cols()], 2) + b * b * std::pow(g.tau[k % g.cols()], 2))));
    }
    o.check(prof.contact_order > 2.5, "contact order " + num(prof.contact_order));
    o.check(diff > 1e-4, "difference at r=0.5 " + num(diff));
    o.check(r0 < 1e-8 && r1 < 1e-8, "residuals " + num(r0) + ", " + num(r1));
    o.check(prof.residual1 && prof.residual2 && prof.residual1->max_abs_H < 1e-8 && prof.residual2->max_abs_H < 1e-8,
            "library residuals too large");
    o.note("contact " + num(prof.contact_order) + ", difference " + num(diff) + ", residuals " + num(std::max(r0, r1)));
    return o;
}

Outcome flow_properties()
{
    Outcome o;
    const double a = 1.0, b = sqrt2, tol = 1e-10;
    const auto spec = HamiltonianSpec::model(a, b);
    auto H = [&](const PhasePoint& P) { return 0.5 * (P.p * P.p + P.q * P.q - a * a * P.x * P.x - b * b * P.y * P.y); };
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> U(-1.0, 1.0), T(-5.0, 5.0);
    double drift = 0, comp_mixed = 0, comp_abs = 0;
    for (int k = 0; k < 100; ++k) {
        const PhasePoint P{U(rng), U(rng), U(rng), U(rng)};
        const double t = T(rng);
        // split t = s + (t - s) with both pieces inside [-5, 5]
        const double s = t * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        const PhasePoint once = integrate_flow(spec, P, t, tol);
        drift = std::max(drift, std::abs(H(once) - H(P)));
        const PhasePoint twice = integrate_flow(spec, integrate_flow(spec, P, s, tol), t - s, tol);
        for (int i = 0; i < 4; ++i) {
            const double d = std::abs(once.vec()[i] - twice.vec()[i]);
            comp_abs = std::max(comp_abs, d);
            comp_mixed = std::max(comp_mixed, d / (1.0 + std::abs(once.vec()[i])));
        }
    }
    o.check(drift < 1e-9, "energy drift " + num(drift));
    o.check(comp_mixed < 1e-9, "composition defect " + num(comp_mixed));
    o.note("drift " + num(drift) + ", composition " + num(comp_mixed) + " relative (" + num(comp_abs) + " absolute)");
    return o;
}

} // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"eigen-structure", eigen_structure},
        {"invariant planes", invariant_planes},
        {"series solver", series_solver},
        {"non-existence", non_existence},
        {"model saddle family", model_family},
        {"regularity drop", regularity_drop},
        {"manifolds", manifolds},
        {"general normal form", general_normal_form},
        {"non-uniqueness witness", non_uniqueness},
        {"flow properties", flow_properties},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %zu (%s): %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    o.detail.c_str(), secs);
        failed += !o.pass;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
