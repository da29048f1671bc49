#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "saddlejet/bivariate.hpp"
#include "saddlejet/error.hpp"
#include "saddlejet/phase.hpp"

namespace saddlejet {

/// H = 1/2 (p^2 + q^2 - a^2 x^2 - b^2 y^2)
struct ModelQuadratic {
    double a = 1.0;
    double b = 1.0;
};

/// H = f(p, q) - h(x, y)
struct SeparatedEikonal {
    Bivariate f;
    Bivariate h;
};

/// H = 1/2 f(p^2 - a^2 x^2, q^2 - b^2 y^2) with f(0,0)=0, f_u(0,0)=f_v(0,0)=1.
struct NormalForm {
    Bivariate f;
    double a = 1.0;
    double b = 1.0;
};

struct GenericHamiltonian {
    std::function<double(const PhasePoint&)> H;
};

enum class DerivativeMode { Analytic, FiniteDifference };

class HamiltonianSpec {
public:
    using Variant = std::variant<ModelQuadratic, SeparatedEikonal, NormalForm, GenericHamiltonian>;

    static constexpr double default_eta = 1e-5;

    static HamiltonianSpec model(double a, double b)
    {
        require(a > 0 && b > 0, ErrorKind::Precondition, "model Hamiltonian needs a, b > 0");
        return HamiltonianSpec(ModelQuadratic{a, b}, DerivativeMode::Analytic);
    }

    static HamiltonianSpec separated(Bivariate f, Bivariate h)
    {
        return HamiltonianSpec(SeparatedEikonal{std::move(f), std::move(h)}, DerivativeMode::Analytic);
    }

    static HamiltonianSpec normal_form(Bivariate f, double a, double b, double tol = 1e-9)
    {
        require(a > 0 && b > 0, ErrorKind::Precondition, "normal form needs a, b > 0");
        const double f0 = f(0.0, 0.0);
        const auto g = f.grad(0.0, 0.0);
        if (std::abs(f0) > tol || std::abs(g[0] - 1.0) > tol || std::abs(g[1] - 1.0) > tol) {
            std::ostringstream os;
            os << "normal form requires f(0,0)=0 and f_u(0,0)=f_v(0,0)=1; got f=" << f0
               << ", f_u=" << g[0] << ", f_v=" << g[1];
            fail(ErrorKind::Precondition, os.str());
        }
        return HamiltonianSpec(NormalForm{std::move(f), a, b}, DerivativeMode::Analytic);
    }

    static HamiltonianSpec generic(std::function<double(const PhasePoint&)> H, double eta = default_eta)
    {
        HamiltonianSpec s(GenericHamiltonian{std::move(H)}, DerivativeMode::FiniteDifference);
        s.eta_ = eta;
        return s;
    }

    /// Same Hamiltonian, derivatives taken by central differences with step eta.
    HamiltonianSpec with_finite_differences(double eta = default_eta) const
    {
        HamiltonianSpec s = *this;
        s.mode_ = DerivativeMode::FiniteDifference;
        s.eta_ = eta;
        return s;
    }

    const Variant& variant() const { return variant_; }
    DerivativeMode mode() const { return mode_; }
    double eta() const { return eta_; }

    bool is_model() const { return std::holds_alternative<ModelQuadratic>(variant_); }
    bool is_normal_form() const { return std::holds_alternative<NormalForm>(variant_); }

    /// Model and normal form share the saddle basis; returns (a, b) for either.
    std::optional<std::pair<double, double>> normal_form_rates() const
    {
        if (const auto* m = std::get_if<ModelQuadratic>(&variant_)) {
            return std::pair{m->a, m->b};
        }
        if (const auto* n = std::get_if<NormalForm>(&variant_)) {
            return std::pair{n->a, n->b};
        }
        return std::nullopt;
    }

    /// The f of a normal form; the model case is the normal form with f = u + v.
    Bivariate normal_form_f() const
    {
        if (is_model()) {
            return linear_f();
        }
        if (const auto* n = std::get_if<NormalForm>(&variant_)) {
            return n->f;
        }
        fail(ErrorKind::Precondition, "Hamiltonian is not in normal form");
    }

    double value(const PhasePoint& P) const
    {
        return std::visit([&](const auto& h) { return value_of(h, P); }, variant_);
    }

    Vec4 gradient(const PhasePoint& P) const
    {
        if (mode_ == DerivativeMode::FiniteDifference) {
            return fd_gradient(P);
        }
        return std::visit([&](const auto& h) { return gradient_of(h, P); }, variant_);
    }

    Mat4 hessian(const PhasePoint& P) const
    {
        if (mode_ == DerivativeMode::FiniteDifference) {
            return fd_hessian(P);
        }
        return std::visit([&](const auto& h) { return hessian_of(h, P); }, variant_);
    }

private:
    HamiltonianSpec(Variant v, DerivativeMode m) : variant_(std::move(v)), mode_(m) {}

    static double value_of(const ModelQuadratic& m, const PhasePoint& P)
    {
        return 0.5 * (P.p * P.p + P.q * P.q - m.a * m.a * P.x * P.x - m.b * m.b * P.y * P.y);
    }
    static double value_of(const SeparatedEikonal& s, const PhasePoint& P)
    {
        return s.f(P.p, P.q) - s.h(P.x, P.y);
    }
    static double value_of(const NormalForm& n, const PhasePoint& P)
    {
        return 0.5 * n.f(P.p * P.p - n.a * n.a * P.x * P.x, P.q * P.q - n.b * n.b * P.y * P.y);
    }
    static double value_of(const GenericHamiltonian& g, const PhasePoint& P) { return g.H(P); }

    static Vec4 gradient_of(const ModelQuadratic& m, const PhasePoint& P)
    {
        return {-m.a * m.a * P.x, -m.b * m.b * P.y, P.p, P.q};
    }
    static Vec4 gradient_of(const SeparatedEikonal& s, const PhasePoint& P)
    {
        const auto gf = s.f.grad(P.p, P.q);
        const auto gh = s.h.grad(P.x, P.y);
        return {-gh[0], -gh[1], gf[0], gf[1]};
    }
    static Vec4 gradient_of(const NormalForm& n, const PhasePoint& P)
    {
        const double a2 = n.a * n.a, b2 = n.b * n.b;
        const auto g = n.f.grad(P.p * P.p - a2 * P.x * P.x, P.q * P.q - b2 * P.y * P.y);
        return {-a2 * g[0] * P.x, -b2 * g[1] * P.y, g[0] * P.p, g[1] * P.q};
    }
    Vec4 gradient_of(const GenericHamiltonian&, const PhasePoint& P) const { return fd_gradient(P); }

    static Mat4 hessian_of(const ModelQuadratic& m, const PhasePoint&)
    {
        Mat4 H{};
        H[0][0] = -m.a * m.a;
        H[1][1] = -m.b * m.b;
        H[2][2] = 1.0;
        H[3][3] = 1.0;
        return H;
    }
    static Mat4 hessian_of(const SeparatedEikonal& s, const PhasePoint& P)
    {
        const auto hf = s.f.hess(P.p, P.q);
        const auto hh = s.h.hess(P.x, P.y);
        Mat4 H{};
        H[0][0] = -hh[0];
        H[0][1] = H[1][0] = -hh[1];
        H[1][1] = -hh[2];
        H[2][2] = hf[0];
        H[2][3] = H[3][2] = hf[1];
        H[3][3] = hf[2];
        return H;
    }
    // H = f(U, V)/2 with U = p^2 - a^2 x^2, V = q^2 - b^2 y^2; chain rule twice.
    static Mat4 hessian_of(const NormalForm& n, const PhasePoint& P)
    {
        const double a2 = n.a * n.a, b2 = n.b * n.b;
        const double U = P.p * P.p - a2 * P.x * P.x;
        const double V = P.q * P.q - b2 * P.y * P.y;
        const auto g = n.f.grad(U, V);
        const auto h = n.f.hess(U, V);
        const Vec4 dU{-2 * a2 * P.x, 0.0, 2 * P.p, 0.0};
        const Vec4 dV{0.0, -2 * b2 * P.y, 0.0, 2 * P.q};
        const Vec4 d2U{-2 * a2, 0.0, 2.0, 0.0};
        const Vec4 d2V{0.0, -2 * b2, 0.0, 2.0};
        Mat4 H{};
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) {
                double s = h[0] * dU[i] * dU[j] + h[1] * (dU[i] * dV[j] + dV[i] * dU[j]) + h[2] * dV[i] * dV[j];
                if (i == j) {
                    s += g[0] * d2U[i] + g[1] * d2V[i];
                }
                H[i][j] = 0.5 * s;
            }
        }
        return H;
    }
    Mat4 hessian_of(const GenericHamiltonian&, const PhasePoint& P) const { return fd_hessian(P); }

    Vec4 fd_gradient(const PhasePoint& P) const
    {
        Vec4 g{};
        const Vec4 x = P.vec();
        for (int i = 0; i < 4; ++i) {
            Vec4 xp = x, xm = x;
            xp[i] += eta_;
            xm[i] -= eta_;
            g[i] = (value(PhasePoint(xp)) - value(PhasePoint(xm))) / (2 * eta_);
        }
        return g;
    }

    Mat4 fd_hessian(const PhasePoint& P) const
    {
        const double h = std::max(eta_, 1e-4);
        const Vec4 x = P.vec();
        auto f = [&](int i, double di, int j, double dj) {
            Vec4 y = x;
            y[i] += di;
            y[j] += dj;
            return value(PhasePoint(y));
        };
        Mat4 H{};
        const double f0 = value(P);
        for (int i = 0; i < 4; ++i) {
            H[i][i] = (f(i, h, i, 0.0) - 2 * f0 + f(i, -h, i, 0.0)) / (h * h);
            for (int j = i + 1; j < 4; ++j) {
                H[i][j] = H[j][i] = (f(i, h, j, h) - f(i, h, j, -h) - f(i, -h, j, h) + f(i, -h, j, -h))
                                    / (4 * h * h);
            }
        }
        return H;
    }

    Variant variant_;
    DerivativeMode mode_ = DerivativeMode::Analytic;
    double eta_ = default_eta;
};

inline double eval_H(const HamiltonianSpec& spec, const PhasePoint& P)
{
    require(P.finite(), ErrorKind::Precondition, "phase point must be finite");
    const double h = spec.value(P);
    require(std::isfinite(h), ErrorKind::Evaluation, "Hamiltonian evaluated to a non-finite value");
    return h;
}

/// Symplectic gradient xi_H = (H_p, H_q, -H_x, -H_y).
inline Vec4 characteristic_field(const HamiltonianSpec& spec, const PhasePoint& P)
{
    const Vec4 g = spec.gradient(P);
    for (double v : g) {
        require(std::isfinite(v), ErrorKind::Evaluation, "derivative evaluation failed (non-finite)");
    }
    return {g[2], g[3], -g[0], -g[1]};
}

// ---------------------------------------------------------------------------
// Linearization at a critical point

enum class SpectrumKind {
    RealHyperbolic, // eigenvalues +-a, +-b with a, b > 0
    Complex,        // c2^2 - 4 det < 0: a complex quadruple
    NonHyperbolic,  // some eigenvalue has zero real part
};

inline std::string_view to_string(SpectrumKind k)
{
    switch (k) {
    case SpectrumKind::RealHyperbolic: return "real-hyperbolic";
    case SpectrumKind::Complex: return "complex";
    case SpectrumKind::NonHyperbolic: return "non-hyperbolic";
    }
    return "unknown";
}

using CVec4 = std::array<std::complex<double>, 4>;

struct Linearization {
    PhasePoint base;
    Mat4 hessian{};
    Mat4 L{};
    double c2 = 0.0;
    double det_hess = 0.0;
    std::array<double, 4> charpoly{}; // coefficients of lambda^3, lambda^2, lambda, 1
    // For a real hyperbolic spectrum the eigenpairs are ordered as v1..v4 with
    // eigenvalues (+a, -b, -a, +b); `a` belongs to the x-dominant unstable direction.
    CVec4 eigenvalues{};
    std::array<CVec4, 4> eigenvectors{};
    CVec4 closed_form_eigenvalues{};
    double crosscheck_error = 0.0;
    bool hyperbolic = false;
    bool degenerate_hessian = false;
    SpectrumKind spectrum = SpectrumKind::NonHyperbolic;
    double a = 0.0;
    double b = 0.0;

    /// Real part of eigenvector i (exact for a real spectrum).
    Vec4 real_vector(int i) const
    {
        return {eigenvectors[i][0].real(), eigenvectors[i][1].real(), eigenvectors[i][2].real(),
                eigenvectors[i][3].real()};
    }
};

namespace detail {

inline Eigen::Matrix4d to_eigen(const Mat4& m)
{
    Eigen::Matrix4d e;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            e(i, j) = m[i][j];
        }
    }
    return e;
}

// Faddeev-LeVerrier for det(lambda I - M) = lambda^4 + k1 lambda^3 + ... + k4.
inline std::array<double, 4> charpoly4(const Eigen::Matrix4d& M)
{
    std::array<double, 4> k{};
    Eigen::Matrix4d Mk = Eigen::Matrix4d::Identity();
    for (int n = 1; n <= 4; ++n) {
        const Eigen::Matrix4d AM = M * Mk;
        k[n - 1] = -AM.trace() / n;
        Mk = AM + k[n - 1] * Eigen::Matrix4d::Identity();
    }
    return k;
}

// Scale so the largest base component is +1, or the largest component if the
// base projection vanishes.
inline CVec4 normalize_eigenvector(CVec4 v)
{
    const double base = std::max(std::abs(v[0]), std::abs(v[1]));
    double full = 0.0;
    for (auto& c : v) {
        full = std::max(full, std::abs(c));
    }
    int pivot = 0;
    if (base > 1e-10 * full) {
        pivot = std::abs(v[0]) >= std::abs(v[1]) ? 0 : 1;
    } else {
        for (int i = 0; i < 4; ++i) {
            if (std::abs(v[i]) == full) {
                pivot = i;
                break;
            }
        }
    }
    const std::complex<double> s = v[pivot];
    for (auto& c : v) {
        c /= s;
    }
    return v;
}

inline double x_alignment(const CVec4& v)
{
    const double bx = std::abs(v[0]), by = std::abs(v[1]);
    return bx / std::max(std::hypot(bx, by), 1e-300);
}

} // namespace detail

inline Linearization linearize(const HamiltonianSpec& spec, const PhasePoint& P0, double crit_tol = 1e-8)
{
    const Vec4 g = spec.gradient(P0);
    if (norm(g) >= crit_tol) {
        std::ostringstream os;
        os << "linearize: point is not critical, |grad H| = " << norm(g);
        fail(ErrorKind::Precondition, os.str());
    }

    Linearization lin;
    lin.base = P0;
    lin.hessian = spec.hessian(P0);
    const Mat4& D = lin.hessian;
    // L = J D^2H with J = [[0, I], [-I, 0]] in (x, y, p, q) ordering.
    for (int j = 0; j < 4; ++j) {
        lin.L[0][j] = D[2][j];
        lin.L[1][j] = D[3][j];
        lin.L[2][j] = -D[0][j];
        lin.L[3][j] = -D[1][j];
    }
    // index map: x=0, y=1, p=2, q=3
    const double Hxx = D[0][0], Hxy = D[0][1], Hxp = D[0][2], Hxq = D[0][3];
    const double Hyy = D[1][1], Hyp = D[1][2], Hyq = D[1][3];
    const double Hpp = D[2][2], Hpq = D[2][3], Hqq = D[3][3];
    lin.c2 = 2 * Hxy * Hpq - 2 * Hxq * Hyp + Hyy * Hqq - Hyq * Hyq + Hxx * Hpp - Hxp * Hxp;

    const Eigen::Matrix4d He = detail::to_eigen(D);
    const Eigen::Matrix4d Le = detail::to_eigen(lin.L);
    lin.det_hess = He.determinant();
    lin.charpoly = detail::charpoly4(Le);
    const double scale = std::max(1.0, He.cwiseAbs().maxCoeff());
    lin.degenerate_hessian = std::abs(lin.det_hess) < 1e-12 * std::pow(scale, 4);

    // closed form: lambda^2 = (-c2 +- sqrt(c2^2 - 4 det)) / 2
    using C = std::complex<double>;
    const C disc = std::sqrt(C(lin.c2 * lin.c2 - 4 * lin.det_hess, 0.0));
    const C mu_plus = (-lin.c2 + disc) / 2.0;
    const C mu_minus = (-lin.c2 - disc) / 2.0;
    const C r1 = std::sqrt(mu_plus), r2 = std::sqrt(mu_minus);
    lin.closed_form_eigenvalues = {r1, -r1, r2, -r2};

    Eigen::EigenSolver<Eigen::Matrix4d> es(Le, true);
    CVec4 evals;
    std::array<CVec4, 4> evecs;
    for (int i = 0; i < 4; ++i) {
        evals[i] = es.eigenvalues()(i);
        for (int k = 0; k < 4; ++k) {
            evecs[i][k] = es.eigenvectors()(k, i);
        }
    }

    // greedy matching of the two eigenvalue routes
    std::array<bool, 4> used{};
    double worst = 0.0;
    double lam_scale = 1.0;
    for (const auto& l : evals) {
        lam_scale = std::max(lam_scale, std::abs(l));
    }
    for (const auto& l : evals) {
        int best = -1;
        double bd = 0.0;
        for (int k = 0; k < 4; ++k) {
            if (!used[k] && (best < 0 || std::abs(l - lin.closed_form_eigenvalues[k]) < bd)) {
                best = k;
                bd = std::abs(l - lin.closed_form_eigenvalues[k]);
            }
        }
        used[best] = true;
        worst = std::max(worst, bd);
    }
    lin.crosscheck_error = worst / lam_scale;

    const double zero_tol = 1e-10 * lam_scale;
    bool any_zero_real = false, any_complex = false;
    for (const auto& l : evals) {
        any_zero_real = any_zero_real || std::abs(l.real()) <= zero_tol;
        any_complex = any_complex || std::abs(l.imag()) > zero_tol;
    }
    lin.hyperbolic = !any_zero_real;
    if (any_zero_real) {
        lin.spectrum = SpectrumKind::NonHyperbolic;
    } else if (any_complex) {
        lin.spectrum = SpectrumKind::Complex;
    } else {
        lin.spectrum = SpectrumKind::RealHyperbolic;
    }

    for (auto& v : evecs) {
        v = detail::normalize_eigenvector(v);
    }

    if (lin.spectrum != SpectrumKind::RealHyperbolic) {
        lin.eigenvalues = evals;
        lin.eigenvectors = evecs;
        return lin;
    }

    // Order as (+a, -b, -a, +b).
    std::vector<int> pos, neg;
    for (int i = 0; i < 4; ++i) {
        (evals[i].real() > 0 ? pos : neg).push_back(i);
    }
    if (pos.size() != 2 || neg.size() != 2) {
        lin.spectrum = SpectrumKind::NonHyperbolic;
        lin.eigenvalues = evals;
        lin.eigenvectors = evecs;
        return lin;
    }
    auto by_alignment = [&](std::vector<int>& idx) {
        if (detail::x_alignment(evecs[idx[1]]) > detail::x_alignment(evecs[idx[0]])) {
            std::swap(idx[0], idx[1]);
        }
    };
    by_alignment(pos);
    const double a = evals[pos[0]].real();
    const double b = evals[pos[1]].real();
    // match negatives to -a / -b by value, falling back to alignment on ties
    if (std::abs(evals[neg[0]].real() + a) > std::abs(evals[neg[1]].real() + a) + 1e-12 * lam_scale) {
        std::swap(neg[0], neg[1]);
    } else if (std::abs(std::abs(evals[neg[0]].real()) - std::abs(evals[neg[1]].real())) <= 1e-12 * lam_scale) {
        by_alignment(neg);
    }
    const std::array<int, 4> order{pos[0], neg[1], neg[0], pos[1]};
    for (int i = 0; i < 4; ++i) {
        lin.eigenvalues[i] = C(evals[order[i]].real(), 0.0);
        lin.eigenvectors[i] = evecs[order[i]];
        for (auto& c : lin.eigenvectors[i]) {
            c = C(c.real(), 0.0);
        }
    }
    lin.a = a;
    lin.b = b;
    return lin;
}

// ---------------------------------------------------------------------------
// Invariant 2-planes spanned by pairs of eigenvectors

enum class PlaneKind { Unstable, Stable, Saddle, NonLagrangian };

inline std::string_view to_string(PlaneKind k)
{
    switch (k) {
    case PlaneKind::Unstable: return "unstable";
    case PlaneKind::Stable: return "stable";
    case PlaneKind::Saddle: return "saddle";
    case PlaneKind::NonLagrangian: return "non-lagrangian";
    }
    return "unknown";
}

struct PlaneRecord {
    int i = 0; // eigenvector indices, 0-based (v1 is 0)
    int j = 0;
    double omega_value = 0.0;
    double projection_det = 0.0;
    bool lagrangian = false;
    bool projectable = false;
    PlaneKind kind = PlaneKind::NonLagrangian;
};

struct PlaneReport {
    std::vector<PlaneRecord> planes;

    const PlaneRecord& plane(int i, int j) const
    {
        for (const auto& p : planes) {
            if ((p.i == i && p.j == j) || (p.i == j && p.j == i)) {
                return p;
            }
        }
        fail(ErrorKind::Precondition, "no such plane");
    }
};

inline PlaneReport classify_invariant_planes(const Linearization& lin, double tol = 1e-9)
{
    if (lin.spectrum == SpectrumKind::Complex) {
        fail(ErrorKind::Classification, "complex spectrum: no real invariant eigen-planes");
    }
    require(lin.spectrum == SpectrumKind::RealHyperbolic, ErrorKind::Classification,
            "spectrum is not real hyperbolic");
    if (std::abs(lin.a - lin.b) <= 1e-8 * std::max(lin.a, lin.b)) {
        fail(ErrorKind::Ambiguity,
             "repeated eigenvalues (a = b): eigen-planes are not unique; use classify_second_order");
    }
    PlaneReport rep;
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            const Vec4 vi = lin.real_vector(i), vj = lin.real_vector(j);
            PlaneRecord r;
            r.i = i;
            r.j = j;
            r.omega_value = omega(vi, vj);
            r.projection_det = base_det(vi, vj);
            r.lagrangian = std::abs(r.omega_value) < tol;
            r.projectable = std::abs(r.projection_det) > tol;
            const double li = lin.eigenvalues[i].real(), lj = lin.eigenvalues[j].real();
            if (!r.lagrangian) {
                r.kind = PlaneKind::NonLagrangian;
            } else if (li > 0 && lj > 0) {
                r.kind = PlaneKind::Unstable;
            } else if (li < 0 && lj < 0) {
                r.kind = PlaneKind::Stable;
            } else {
                r.kind = PlaneKind::Saddle;
            }
            rep.planes.push_back(r);
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Second-order jets z = (A x^2 + 2 B x y + C y^2)/2 of z_x^2 + z_y^2 = a^2 x^2 + b^2 y^2

struct Jet2Candidate {
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;
    double rotation = 0.0; // angle that brings the jet to axis-aligned form
};

struct Jet2Candidates {
    double a = 0.0;
    double b = 0.0;
    std::vector<Jet2Candidate> candidates;
};

/// Residuals of A^2+B^2=a^2, B(A+C)=0, B^2+C^2=b^2.
inline std::array<double, 3> jet2_residuals(const Jet2Candidate& c, double a, double b)
{
    return {c.A * c.A + c.B * c.B - a * a, c.B * (c.A + c.C), c.B * c.B + c.C * c.C - b * b};
}

inline Jet2Candidates classify_second_order(double a, double b, std::optional<double> theta = std::nullopt)
{
    require(a > 0 && b > 0, ErrorKind::Precondition, "classify_second_order needs a, b > 0");
    Jet2Candidates out{a, b, {}};
    for (double sa : {1.0, -1.0}) {
        for (double sb : {1.0, -1.0}) {
            out.candidates.push_back({sa * a, 0.0, sb * b, 0.0});
        }
    }
    if (theta) {
        require(a == b, ErrorKind::Precondition, "rotated second-order jets exist only when a = b");
        const double t = *theta;
        require(t >= -1.0 && t <= 1.0 && t != 0.0, ErrorKind::Precondition,
                "theta must lie in [-1, 1] and be nonzero");
        const double r = std::sqrt(1.0 - t * t);
        const double xi = std::atan(t / (1.0 + r));
        out.candidates.push_back({a * r, a * t, -a * r, xi});
        if (r != 0.0) {
            // the mirrored jet is diagonalized by the opposite rotation
            out.candidates.push_back({-a * r, a * t, a * r, -xi});
        }
    }
    return out;
}

} // namespace saddlejet
