#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <math.h> // pchip.hpp calls isnan unqualified

#include <boost/math/interpolators/pchip.hpp>

#include "saddlejet/error.hpp"

namespace saddlejet {

// How a data function defined for s >= 0 continues to s < 0.
enum class Extension { Odd, Even };

namespace data {

struct Zero {};

/// c s^l for s >= 0.
struct Monomial {
    double c = 1.0;
    double l = 1.0;
};

/// c exp(-1/(1 - ((s - center)/width)^2)) on |s - center| < width, 0 elsewhere.
/// With center > width it vanishes identically near 0.
struct SmoothBump {
    double c = 1.0;
    double center = 0.5;
    double width = 0.25;
};

/// Samples (s_k, phi_k) with s_0 = 0, phi_0 = 0, interpolated by monotone
/// piecewise-cubic Hermite; l must be declared since it cannot be read off samples.
struct Table {
    std::vector<double> s;
    std::vector<double> values;
    double declared_order = 1.0;
};

} // namespace data

/// One-variable data function phi with phi(0) = 0 and a vanishing order l at 0.
class DataFunction {
public:
    using Variant = std::variant<data::Zero, data::Monomial, data::SmoothBump, data::Table>;

    DataFunction() = default;

    static DataFunction zero() { return DataFunction(data::Zero{}, Extension::Odd); }

    static DataFunction monomial(double c, double l, Extension ext = Extension::Odd)
    {
        require(std::isfinite(c), ErrorKind::Validation, "monomial coefficient must be finite");
        require(l >= 1.0 && std::isfinite(l), ErrorKind::Validation, "monomial order l must be finite and >= 1");
        return DataFunction(data::Monomial{c, l}, ext);
    }

    static DataFunction bump(double c, double center, double width, Extension ext = Extension::Odd)
    {
        require(std::isfinite(c), ErrorKind::Validation, "bump amplitude must be finite");
        require(width > 0 && center > width, ErrorKind::Validation,
                "bump needs width > 0 and center > width so that it vanishes near 0");
        return DataFunction(data::SmoothBump{c, center, width}, ext);
    }

    static DataFunction table(std::vector<double> s, std::vector<double> values, double declared_order,
                              Extension ext = Extension::Odd)
    {
        require(s.size() == values.size(), ErrorKind::Validation, "table needs as many values as nodes");
        require(s.size() >= 4, ErrorKind::Validation, "table needs at least 4 samples");
        require(s.front() == 0.0 && values.front() == 0.0, ErrorKind::Validation,
                "table must start at s = 0 with phi(0) = 0");
        for (std::size_t k = 1; k < s.size(); ++k) {
            require(s[k] > s[k - 1], ErrorKind::Validation, "table nodes must be strictly increasing");
        }
        for (double v : values) {
            require(std::isfinite(v), ErrorKind::Validation, "table values must be finite");
        }
        require(declared_order >= 1.0, ErrorKind::Validation, "declared vanishing order must be >= 1");
        DataFunction f(data::Table{s, values, declared_order}, ext);
        f.spline_ = std::make_shared<Spline>(std::move(s), std::move(values));
        return f;
    }

    const Variant& variant() const { return v_; }
    Extension extension() const { return ext_; }
    bool is_zero() const { return std::holds_alternative<data::Zero>(v_); }

    std::string name() const
    {
        switch (v_.index()) {
        case 0: return "zero";
        case 1: return "monomial";
        case 2: return "bump";
        default: return "table";
        }
    }

    /// l, or +inf for functions vanishing to infinite order.
    double vanishing_order() const
    {
        if (const auto* m = std::get_if<data::Monomial>(&v_)) {
            return m->l;
        }
        if (const auto* t = std::get_if<data::Table>(&v_)) {
            return t->declared_order;
        }
        return std::numeric_limits<double>::infinity();
    }

    double operator()(double s) const { return value(s); }

    double value(double s) const
    {
        if (s < 0) {
            const double v = positive_value(-s);
            return ext_ == Extension::Odd ? -v : v;
        }
        return positive_value(s);
    }

    double derivative(double s) const
    {
        if (s < 0) {
            const double d = positive_derivative(-s);
            return ext_ == Extension::Odd ? d : -d;
        }
        return positive_derivative(s);
    }

    /// k * phi, same vanishing order.
    DataFunction scaled(double k) const
    {
        DataFunction out = *this;
        std::visit(
            [k](auto& d) {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, data::Monomial> || std::is_same_v<T, data::SmoothBump>) {
                    d.c *= k;
                } else if constexpr (std::is_same_v<T, data::Table>) {
                    for (double& v : d.values) {
                        v *= k;
                    }
                }
            },
            out.v_);
        if (const auto* t = std::get_if<data::Table>(&out.v_)) {
            out.spline_ = std::make_shared<Spline>(std::vector<double>(t->s), std::vector<double>(t->values));
        }
        if (k == 0.0) {
            return zero();
        }
        return out;
    }

private:
    using Spline = boost::math::interpolators::pchip<std::vector<double>>;

    DataFunction(Variant v, Extension ext) : v_(std::move(v)), ext_(ext) {}

    double positive_value(double s) const
    {
        switch (v_.index()) {
        case 0: return 0.0;
        case 1: {
            const auto& m = std::get<data::Monomial>(v_);
            return m.c * std::pow(s, m.l);
        }
        case 2: {
            const auto& b = std::get<data::SmoothBump>(v_);
            const double r = (s - b.center) / b.width;
            return std::abs(r) < 1.0 ? b.c * std::exp(-1.0 / (1.0 - r * r)) : 0.0;
        }
        default: {
            const auto& t = std::get<data::Table>(v_);
            require(s <= t.s.back(), ErrorKind::Evaluation, "table data function evaluated outside its range");
            return (*spline_)(s);
        }
        }
    }

    double positive_derivative(double s) const
    {
        switch (v_.index()) {
        case 0: return 0.0;
        case 1: {
            const auto& m = std::get<data::Monomial>(v_);
            return s == 0.0 ? (m.l == 1.0 ? m.c : 0.0) : m.c * m.l * std::pow(s, m.l - 1.0);
        }
        case 2: {
            const auto& b = std::get<data::SmoothBump>(v_);
            const double r = (s - b.center) / b.width;
            if (std::abs(r) >= 1.0) {
                return 0.0;
            }
            const double g = 1.0 - r * r;
            return b.c * std::exp(-1.0 / g) * (-2.0 * r / (g * g)) / b.width;
        }
        default: {
            const auto& t = std::get<data::Table>(v_);
            require(s <= t.s.back(), ErrorKind::Evaluation, "table data function evaluated outside its range");
            return spline_->prime(s);
        }
        }
    }

    Variant v_ = data::Zero{};
    Extension ext_ = Extension::Odd;
    std::shared_ptr<const Spline> spline_;
};

enum class Branch { Plus, Minus };

inline double branch_sign(Branch b) { return b == Branch::Plus ? 1.0 : -1.0; }

} // namespace saddlejet
