#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <tuple>
#include <utility>
#include <vector>

#include "saddlejet/error.hpp"

namespace saddlejet {

/// Polynomial sum c_{m,n} x^m y^n truncated at total degree N.
/// Coefficients are stored densely by degree; anything above N is zero.
class BivariateSeries {
public:
    BivariateSeries() = default;
    explicit BivariateSeries(int N) : N_(N), c_(size_for(N), 0.0)
    {
        require(N >= 0, ErrorKind::Precondition, "series truncation must be non-negative");
    }

    int order() const { return N_; }

    double operator()(int m, int n) const
    {
        if (m < 0 || n < 0 || m + n > N_) {
            return 0.0;
        }
        return c_[index(m, n)];
    }

    void set(int m, int n, double v)
    {
        require(m >= 0 && n >= 0 && m + n <= N_, ErrorKind::Precondition, "series index out of range");
        require(std::isfinite(v), ErrorKind::Evaluation, "series coefficients must be finite");
        c_[index(m, n)] = v;
    }

    void add(int m, int n, double v) { set(m, n, (*this)(m, n) + v); }

    /// Same coefficients, truncated (or zero-padded) to order M.
    BivariateSeries truncated(int M) const
    {
        BivariateSeries r(M);
        for (int d = 0; d <= std::min(M, N_); ++d) {
            for (int n = 0; n <= d; ++n) {
                r.c_[index(d - n, n)] = (*this)(d - n, n);
            }
        }
        return r;
    }

    BivariateSeries dx() const
    {
        BivariateSeries r(N_);
        for (int d = 1; d <= N_; ++d) {
            for (int n = 0; n < d; ++n) {
                const int m = d - n;
                r.c_[index(m - 1, n)] = m * (*this)(m, n);
            }
        }
        return r;
    }

    BivariateSeries dy() const
    {
        BivariateSeries r(N_);
        for (int d = 1; d <= N_; ++d) {
            for (int n = 1; n <= d; ++n) {
                const int m = d - n;
                r.c_[index(m, n - 1)] = n * (*this)(m, n);
            }
        }
        return r;
    }

    double evaluate(double x, double y) const
    {
        double s = 0.0;
        for (int d = N_; d >= 0; --d) {
            for (int n = 0; n <= d; ++n) {
                s += (*this)(d - n, n) * std::pow(x, d - n) * std::pow(y, n);
            }
        }
        return s;
    }

    /// Nonzero coefficients as (m, n, c), ordered by degree then n.
    std::vector<std::tuple<int, int, double>> terms() const
    {
        std::vector<std::tuple<int, int, double>> out;
        for (int d = 0; d <= N_; ++d) {
            for (int n = 0; n <= d; ++n) {
                const double v = (*this)(d - n, n);
                if (v != 0.0) {
                    out.emplace_back(d - n, n, v);
                }
            }
        }
        return out;
    }

    double max_abs_in_degrees(int lo, int hi) const
    {
        double m = 0.0;
        for (int d = std::max(lo, 0); d <= std::min(hi, N_); ++d) {
            for (int n = 0; n <= d; ++n) {
                m = std::max(m, std::abs((*this)(d - n, n)));
            }
        }
        return m;
    }

    friend BivariateSeries operator+(const BivariateSeries& a, const BivariateSeries& b)
    {
        BivariateSeries r(std::min(a.N_, b.N_));
        for (std::size_t k = 0; k < r.c_.size(); ++k) {
            r.c_[k] = a.c_[k] + b.c_[k];
        }
        return r;
    }

    friend BivariateSeries operator-(const BivariateSeries& a, const BivariateSeries& b)
    {
        BivariateSeries r(std::min(a.N_, b.N_));
        for (std::size_t k = 0; k < r.c_.size(); ++k) {
            r.c_[k] = a.c_[k] - b.c_[k];
        }
        return r;
    }

    friend BivariateSeries operator*(const BivariateSeries& a, const BivariateSeries& b)
    {
        const int N = std::min(a.N_, b.N_);
        BivariateSeries r(N);
        for (int d = 0; d <= N; ++d) {
            for (int n = 0; n <= d; ++n) {
                r.c_[index(d - n, n)] = product_coeff(a, b, d - n, n);
            }
        }
        return r;
    }

    /// Coefficient of x^m y^n in a*b, without forming the whole product.
    static double product_coeff(const BivariateSeries& a, const BivariateSeries& b, int m, int n)
    {
        double s = 0.0;
        for (int i = 0; i <= m; ++i) {
            for (int j = 0; j <= n; ++j) {
                s += a(i, j) * b(m - i, n - j);
            }
        }
        return s;
    }

    friend bool operator==(const BivariateSeries& a, const BivariateSeries& b)
    {
        return a.N_ == b.N_ && a.c_ == b.c_;
    }

private:
    static std::size_t size_for(int N) { return static_cast<std::size_t>((N + 1) * (N + 2) / 2); }
    static std::size_t index(int m, int n)
    {
        const int d = m + n;
        return static_cast<std::size_t>(d * (d + 1) / 2 + n);
    }

    int N_ = 0;
    std::vector<double> c_ = std::vector<double>(1, 0.0);
};

// ---------------------------------------------------------------------------

enum class SaddleSign { Plus, Minus }; // sign of the x^2 term of z

struct ResonanceEntry {
    int m = 0;
    int n = 0;
    double gap = 0.0;                  // 2 (m a - n b)
    std::optional<double> obstruction; // h_{m,n} - (P + Q)_{m,n}; unknown when not solved
    bool free_coefficient = false;
};

struct ResonanceReport {
    std::vector<ResonanceEntry> entries;
    bool nonexistence = false; // some resonant index carries a nonzero obstruction

    const ResonanceEntry* find(int m, int n) const
    {
        for (const auto& e : entries) {
            if (e.m == m && e.n == n) {
                return &e;
            }
        }
        return nullptr;
    }
};

struct SeriesOptions {
    double resonance_tol = 1e-9;  // on |2 (m a - n b)|
    double obstruction_tol = 1e-9;
    double quadratic_tol = 1e-10;
    // Values for coefficients left free by a vanishing obstruction (default 0).
    std::map<std::pair<int, int>, double> free_values;
};

struct SeriesSolution {
    BivariateSeries z;
    ResonanceReport resonances;
};

/// z_x^2 + z_y^2 - h, all truncated at degree N.
inline BivariateSeries series_residual(const BivariateSeries& z, const BivariateSeries& h, int N)
{
    const BivariateSeries zt = z.truncated(N);
    const BivariateSeries zx = zt.dx(), zy = zt.dy();
    return zx * zx + zy * zy - h.truncated(N);
}

/// Resonant indices (m, n), 3 <= m+n <= N, with |m a - n b| < tol.
inline std::vector<std::pair<int, int>> detect_resonances(double a, double b, int N, double tol = 1e-9)
{
    require(a > 0 && b > 0, ErrorKind::Precondition, "detect_resonances needs a, b > 0");
    require(N >= 3, ErrorKind::Precondition, "detect_resonances needs N >= 3");
    std::vector<std::pair<int, int>> out;
    for (int d = 3; d <= N; ++d) {
        for (int n = 0; n <= d; ++n) {
            const int m = d - n;
            if (std::abs(m * a - n * b) < tol) {
                out.emplace_back(m, n);
            }
        }
    }
    return out;
}

/// Degree-by-degree saddle series z = +-(a x^2 - b y^2)/2 + sum z_{m,n} x^m y^n
/// for z_x^2 + z_y^2 = h. The degree-d unknowns enter the degree-d equations only
/// through the cross terms with the quadratic part, giving the divisor
/// +-2 (m a - n b); the remainder is read off the product of the lower-degree part.
inline SeriesSolution solve_saddle_series(const BivariateSeries& h, double a, double b, SaddleSign sign, int N,
                                          const SeriesOptions& opt = {})
{
    require(a > 0 && b > 0, ErrorKind::Precondition, "solve_saddle_series needs a, b > 0");
    require(N >= 2, ErrorKind::Precondition, "solve_saddle_series needs N >= 2");
    const double qt = opt.quadratic_tol;
    for (int d = 0; d < 2; ++d) {
        for (int n = 0; n <= d; ++n) {
            require(std::abs(h(d - n, n)) < qt, ErrorKind::Precondition,
                    "h must vanish to second order at the origin");
        }
    }
    if (std::abs(h(2, 0) - a * a) >= qt || std::abs(h(1, 1)) >= qt || std::abs(h(0, 2) - b * b) >= qt) {
        std::ostringstream os;
        os << "quadratic part of h must be a^2 x^2 + b^2 y^2; got (" << h(2, 0) << ", " << h(1, 1) << ", "
           << h(0, 2) << ")";
        fail(ErrorKind::Precondition, os.str());
    }

    const double s = sign == SaddleSign::Plus ? 1.0 : -1.0;
    SeriesSolution out{BivariateSeries(N), {}};
    BivariateSeries& z = out.z;
    z.set(2, 0, s * a / 2);
    z.set(0, 2, -s * b / 2);

    for (int d = 3; d <= N; ++d) {
        // degree-d part of z is still zero here
        const BivariateSeries zx = z.dx(), zy = z.dy();
        std::vector<double> solved(d + 1, 0.0);
        for (int n = 0; n <= d; ++n) {
            const int m = d - n;
            const double rest = BivariateSeries::product_coeff(zx, zx, m, n)
                                + BivariateSeries::product_coeff(zy, zy, m, n);
            const double rhs = h(m, n) - rest;
            const double gap = 2.0 * (m * a - n * b);
            if (std::abs(gap) < opt.resonance_tol) {
                ResonanceEntry e{m, n, gap, rhs, false};
                if (std::abs(rhs) < opt.obstruction_tol) {
                    e.free_coefficient = true;
                    const auto it = opt.free_values.find({m, n});
                    solved[n] = it != opt.free_values.end() ? it->second : 0.0;
                } else {
                    out.resonances.nonexistence = true;
                }
                out.resonances.entries.push_back(e);
            } else {
                solved[n] = rhs / (s * gap);
            }
        }
        for (int n = 0; n <= d; ++n) {
            z.set(d - n, n, solved[n]);
        }
    }
    return out;
}

} // namespace saddlejet
