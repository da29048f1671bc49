#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace saddlejet {

using Vec4 = std::array<double, 4>;
using Mat4 = std::array<std::array<double, 4>, 4>;

// A point of phase space R^4 = {(x, y, p, q)}; (p, q) play the role of (z_x, z_y).
struct PhasePoint {
    double x = 0.0;
    double y = 0.0;
    double p = 0.0;
    double q = 0.0;

    constexpr PhasePoint() = default;
    constexpr PhasePoint(double x_, double y_, double p_, double q_)
        : x(x_), y(y_), p(p_), q(q_) {}
    explicit constexpr PhasePoint(const Vec4& v) : x(v[0]), y(v[1]), p(v[2]), q(v[3]) {}

    constexpr Vec4 vec() const { return {x, y, p, q}; }

    bool finite() const
    {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(p) && std::isfinite(q);
    }

    friend constexpr bool operator==(const PhasePoint&, const PhasePoint&) = default;
};

inline Vec4 operator+(const Vec4& a, const Vec4& b)
{
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
}

inline Vec4 operator-(const Vec4& a, const Vec4& b)
{
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]};
}

inline Vec4 operator*(double s, const Vec4& a)
{
    return {s * a[0], s * a[1], s * a[2], s * a[3]};
}

inline double dot(const Vec4& a, const Vec4& b)
{
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

inline double norm(const Vec4& a) { return std::sqrt(dot(a, a)); }

inline double max_abs(const Vec4& a)
{
    double m = 0.0;
    for (double v : a) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

// omega = dp^dx + dq^dy, i.e. omega(V, W) = V_p W_x - W_p V_x + V_q W_y - W_q V_y.
inline double omega(const Vec4& v, const Vec4& w)
{
    return v[2] * w[0] - w[2] * v[0] + v[3] * w[1] - w[3] * v[1];
}

// Determinant of the base projections (x, y) of two tangent vectors.
inline double base_det(const Vec4& v, const Vec4& w)
{
    return v[0] * w[1] - v[1] * w[0];
}

// Basis v1..v4 of the normal-form/model case and the coordinates w1..w4 with
// (x, y, p, q) = w1 v1 + w2 v2 + w3 v3 + w4 v4.
struct SaddleBasis {
    double a = 1.0;
    double b = 1.0;

    Vec4 v1() const { return {1.0, 0.0, a, 0.0}; }
    Vec4 v2() const { return {0.0, 1.0, 0.0, -b}; }
    Vec4 v3() const { return {1.0, 0.0, -a, 0.0}; }
    Vec4 v4() const { return {0.0, 1.0, 0.0, b}; }

    PhasePoint from_w(const Vec4& w) const
    {
        return {w[0] + w[2], w[1] + w[3], a * (w[0] - w[2]), b * (w[3] - w[1])};
    }

    Vec4 to_w(const PhasePoint& P) const
    {
        return {0.5 * (P.x + P.p / a), 0.5 * (P.y - P.q / b), 0.5 * (P.x - P.p / a),
                0.5 * (P.y + P.q / b)};
    }
};

} // namespace saddlejet
