#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "saddlejet/data_function.hpp"
#include "saddlejet/error.hpp"
#include "saddlejet/flow.hpp"
#include "saddlejet/hamiltonian.hpp"
#include "saddlejet/jet.hpp"
#include "saddlejet/series.hpp"
#include "saddlejet/surface.hpp"
#include "saddlejet/verify.hpp"

namespace saddlejet::io {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Scalars and files

/// %.17g, which round-trips every double; non-finite values print as nan/inf/-inf.
inline std::string fmt(double x)
{
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// JSON has no infinities: non-finite numbers are written as the strings of fmt().
inline json jnum(double x) { return std::isfinite(x) ? json(x) : json(fmt(x)); }

inline double jdouble(const json& j)
{
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        if (s == "inf") {
            return std::numeric_limits<double>::infinity();
        }
        if (s == "-inf") {
            return -std::numeric_limits<double>::infinity();
        }
        if (s == "nan") {
            return std::nan("");
        }
        fail(ErrorKind::Validation, "expected a number, got \"" + s + "\"");
    }
    if (!j.is_number()) {
        fail(ErrorKind::Validation, "expected a number");
    }
    return j.get<double>();
}

inline std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorKind::Io, "cannot open '" + path + "' for reading");
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        fail(ErrorKind::Io, "cannot open '" + path + "' for writing");
    }
    out << text;
    if (!out) {
        fail(ErrorKind::Io, "failed writing '" + path + "'");
    }
}

inline json read_json(const std::string& path)
{
    try {
        return json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        fail(ErrorKind::Validation, "'" + path + "' is not valid JSON: " + e.what());
    }
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

/// Comma-separated rows; the first row is the header.
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        if (line.back() == ',') {
            cells.emplace_back();
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

inline double parse_double(const std::string& s)
{
    const char* b = s.c_str();
    char* e = nullptr;
    const double v = std::strtod(b, &e);
    if (e == b) {
        fail(ErrorKind::Validation, "'" + s + "' is not a number");
    }
    while (*e == ' ' || *e == '\t') {
        ++e;
    }
    if (*e != '\0') {
        fail(ErrorKind::Validation, "'" + s + "' is not a number");
    }
    return v;
}

// ---------------------------------------------------------------------------
// Hamiltonians and data functions

inline json to_json(const Bivariate& f)
{
    switch (f.desc.kind) {
    case BivariateDescriptor::Kind::Builtin: {
        json j{{"builtin", f.desc.name}};
        if (f.desc.name == "product") {
            j["param"] = f.desc.param;
        }
        return j;
    }
    case BivariateDescriptor::Kind::Polynomial: {
        json terms = json::array();
        for (const auto& t : f.desc.terms) {
            terms.push_back({t.i, t.j, t.c});
        }
        return json{{"poly", terms}};
    }
    default: fail(ErrorKind::Io, "callable-backed functions cannot be serialized");
    }
}

inline Bivariate bivariate_from_json(const json& j)
{
    if (j.contains("builtin")) {
        return builtin_f(j.at("builtin").get<std::string>(), j.value("param", 1.0));
    }
    if (j.contains("poly")) {
        std::vector<PolyTerm> terms;
        for (const auto& t : j.at("poly")) {
            if (!t.is_array() || t.size() != 3) {
                fail(ErrorKind::Validation, "polynomial terms are [i, j, c] triples");
            }
            terms.push_back({t[0].get<int>(), t[1].get<int>(), jdouble(t[2])});
        }
        return polynomial(std::move(terms));
    }
    fail(ErrorKind::Validation, "function needs either \"builtin\" or \"poly\"");
}

inline json to_json(const HamiltonianSpec& spec)
{
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, ModelQuadratic>) {
                return {{"type", "model"}, {"a", v.a}, {"b", v.b}};
            } else if constexpr (std::is_same_v<T, NormalForm>) {
                return {{"type", "normal_form"}, {"a", v.a}, {"b", v.b}, {"f", to_json(v.f)}};
            } else if constexpr (std::is_same_v<T, SeparatedEikonal>) {
                return {{"type", "separated"}, {"f", to_json(v.f)}, {"h", to_json(v.h)}};
            } else {
                fail(ErrorKind::Io, "generic Hamiltonians cannot be serialized");
            }
        },
        spec.variant());
}

inline HamiltonianSpec hamiltonian_from_json(const json& j)
{
    const std::string type = j.at("type").get<std::string>();
    if (type == "model") {
        return HamiltonianSpec::model(jdouble(j.at("a")), jdouble(j.at("b")));
    }
    if (type == "normal_form") {
        return HamiltonianSpec::normal_form(bivariate_from_json(j.at("f")), jdouble(j.at("a")), jdouble(j.at("b")));
    }
    if (type == "separated") {
        return HamiltonianSpec::separated(bivariate_from_json(j.at("f")), bivariate_from_json(j.at("h")));
    }
    fail(ErrorKind::Validation, "unknown hamiltonian type '" + type + "'");
}

inline json to_json(const DataFunction& phi)
{
    const char* ext = phi.extension() == Extension::Odd ? "odd" : "even";
    return std::visit(
        [ext](const auto& d) -> json {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, data::Zero>) {
                return {{"type", "zero"}};
            } else if constexpr (std::is_same_v<T, data::Monomial>) {
                return {{"type", "monomial"}, {"c", d.c}, {"l", d.l}, {"extension", ext}};
            } else if constexpr (std::is_same_v<T, data::SmoothBump>) {
                return {{"type", "bump"}, {"c", d.c}, {"center", d.center}, {"width", d.width}, {"extension", ext}};
            } else {
                return {{"type", "table"}, {"s", d.s}, {"values", d.values}, {"order", d.declared_order},
                        {"extension", ext}};
            }
        },
        phi.variant());
}

inline DataFunction data_function_from_json(const json& j)
{
    const std::string type = j.at("type").get<std::string>();
    const std::string e = j.value("extension", std::string("odd"));
    if (e != "odd" && e != "even") {
        fail(ErrorKind::Validation, "extension must be \"odd\" or \"even\"");
    }
    const Extension ext = e == "odd" ? Extension::Odd : Extension::Even;
    if (type == "zero") {
        return DataFunction::zero();
    }
    if (type == "monomial") {
        return DataFunction::monomial(j.value("c", 1.0), jdouble(j.at("l")), ext);
    }
    if (type == "bump") {
        return DataFunction::bump(j.value("c", 1.0), j.value("center", 0.5), j.value("width", 0.25), ext);
    }
    if (type == "table") {
        return DataFunction::table(j.at("s").get<std::vector<double>>(), j.at("values").get<std::vector<double>>(),
                                   jdouble(j.at("order")), ext);
    }
    fail(ErrorKind::Validation, "unknown data function type '" + type + "'");
}

// ---------------------------------------------------------------------------
// Series

inline json to_json(const BivariateSeries& z)
{
    json coeffs = json::array();
    for (const auto& [m, n, c] : z.terms()) {
        coeffs.push_back({m, n, c});
    }
    return {{"N", z.order()}, {"coeffs", coeffs}};
}

inline BivariateSeries series_from_json(const json& j)
{
    BivariateSeries z(j.at("N").get<int>());
    for (const auto& t : j.at("coeffs")) {
        if (!t.is_array() || t.size() != 3) {
            fail(ErrorKind::Validation, "series coefficients are [m, n, c] triples");
        }
        z.set(t[0].get<int>(), t[1].get<int>(), jdouble(t[2]));
    }
    return z;
}

inline std::string series_csv(const BivariateSeries& z)
{
    std::string out = "m,n,c\n";
    for (const auto& [m, n, c] : z.terms()) {
        out += std::to_string(m) + "," + std::to_string(n) + "," + fmt(c) + "\n";
    }
    return out;
}

/// The order is not stored in CSV; pass it, or it is taken as the largest degree present.
inline BivariateSeries series_from_csv(const std::string& text, int N = -1)
{
    const auto rows = parse_csv(text);
    if (rows.empty() || rows[0] != std::vector<std::string>{"m", "n", "c"}) {
        fail(ErrorKind::Validation, "series CSV needs the header m,n,c");
    }
    std::vector<std::tuple<int, int, double>> t;
    int deg = 0;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != 3) {
            fail(ErrorKind::Validation, "series CSV row " + std::to_string(r) + " needs 3 cells");
        }
        const int m = static_cast<int>(parse_double(rows[r][0])), n = static_cast<int>(parse_double(rows[r][1]));
        t.emplace_back(m, n, parse_double(rows[r][2]));
        deg = std::max(deg, m + n);
    }
    BivariateSeries z(N >= 0 ? N : deg);
    for (const auto& [m, n, c] : t) {
        z.set(m, n, c);
    }
    return z;
}

inline json to_json(const ResonanceReport& r)
{
    json entries = json::array();
    for (const auto& e : r.entries) {
        json je{{"m", e.m}, {"n", e.n}, {"gap", e.gap}};
        if (e.obstruction) {
            je["obstruction"] = *e.obstruction;
        }
        je["free_coefficient"] = e.free_coefficient;
        entries.push_back(je);
    }
    return {{"nonexistence", r.nonexistence}, {"entries", entries}};
}

// ---------------------------------------------------------------------------
// Surfaces

inline const char* chart_name(Chart c) { return c == Chart::Base ? "base" : "parameter"; }

inline json surface_meta_json(const JetSurface& s)
{
    json j{{"construction", s.construction},
           {"chart", chart_name(s.chart)},
           {"sigma_name", s.sigma_name},
           {"tau_name", s.tau_name},
           {"rows", s.grid.rows()},
           {"cols", s.grid.cols()},
           {"invalid", s.invalid_count()},
           {"a", s.meta.a},
           {"b", s.meta.b},
           {"max_abs_H", jnum(s.meta.max_abs_H)}};
    if (s.meta.phi_plus) {
        j["phi_plus"] = to_json(*s.meta.phi_plus);
    }
    if (s.meta.phi_minus) {
        j["phi_minus"] = to_json(*s.meta.phi_minus);
    }
    if (s.spec) {
        try {
            j["hamiltonian"] = to_json(*s.spec);
        } catch (const Error&) {
            j["hamiltonian"] = nullptr;
        }
    }
    json numbers = json::object();
    for (const auto& [k, v] : s.meta.numbers) {
        numbers[k] = jnum(v);
    }
    j["numbers"] = numbers;
    j["warnings"] = s.meta.warnings;
    return j;
}

/// Rows (sigma, tau, x, y, p, q), sigma-major; invalid nodes carry nan in x, y, p, q.
inline std::string surface_csv(const JetSurface& s)
{
    std::string out = s.sigma_name + "," + s.tau_name + ",x,y,p,q\n";
    for (std::size_t i = 0; i < s.grid.rows(); ++i) {
        for (std::size_t j = 0; j < s.grid.cols(); ++j) {
            const auto& P = s.at(i, j);
            const bool ok = s.is_valid(i, j);
            const double nan = std::nan("");
            out += fmt(s.grid.sigma[i]) + "," + fmt(s.grid.tau[j]) + "," + fmt(ok ? P.x : nan) + ","
                   + fmt(ok ? P.y : nan) + "," + fmt(ok ? P.p : nan) + "," + fmt(ok ? P.q : nan) + "\n";
        }
    }
    return out;
}

/// Writes <stem>.csv and <stem>.json.
inline void write_surface(const std::string& stem, const JetSurface& s)
{
    write_text(stem + ".csv", surface_csv(s));
    write_json(stem + ".json", surface_meta_json(s));
}

inline JetSurface surface_from_csv(const std::string& csv, const json& meta)
{
    const auto rows = parse_csv(csv);
    if (rows.empty() || rows[0].size() != 6) {
        fail(ErrorKind::Validation, "surface CSV needs 6 columns");
    }
    const std::size_t nr = meta.at("rows").get<std::size_t>(), nc = meta.at("cols").get<std::size_t>();
    if (rows.size() != nr * nc + 1) {
        fail(ErrorKind::Validation, "surface CSV row count does not match rows x cols");
    }
    Grid g;
    g.sigma.resize(nr);
    g.tau.resize(nc);
    std::vector<std::array<double, 6>> vals(nr * nc);
    for (std::size_t k = 0; k < nr * nc; ++k) {
        if (rows[k + 1].size() != 6) {
            fail(ErrorKind::Validation, "surface CSV row " + std::to_string(k + 1) + " needs 6 cells");
        }
        for (int c = 0; c < 6; ++c) {
            vals[k][c] = parse_double(rows[k + 1][c]);
        }
        g.sigma[k / nc] = vals[k][0];
        g.tau[k % nc] = vals[k][1];
    }
    g.validate();
    const Chart chart = meta.at("chart").get<std::string>() == "base" ? Chart::Base : Chart::Parameter;
    JetSurface s(meta.at("construction").get<std::string>(), chart, g);
    s.sigma_name = rows[0][0];
    s.tau_name = rows[0][1];
    for (std::size_t k = 0; k < nr * nc; ++k) {
        s.points[k] = {vals[k][2], vals[k][3], vals[k][4], vals[k][5]};
        s.valid[k] = s.points[k].finite() ? 1 : 0;
    }
    s.meta.a = meta.value("a", 0.0);
    s.meta.b = meta.value("b", 0.0);
    if (meta.contains("phi_plus")) {
        s.meta.phi_plus = data_function_from_json(meta["phi_plus"]);
    }
    if (meta.contains("phi_minus")) {
        s.meta.phi_minus = data_function_from_json(meta["phi_minus"]);
    }
    if (meta.contains("hamiltonian") && !meta["hamiltonian"].is_null()) {
        s.spec = hamiltonian_from_json(meta["hamiltonian"]);
    }
    s.meta.max_abs_H = jdouble(meta.at("max_abs_H"));
    const json numbers = meta.value("numbers", json::object());
    for (const auto& [k, v] : numbers.items()) {
        s.meta.numbers[k] = jdouble(v);
    }
    s.meta.warnings = meta.value("warnings", std::vector<std::string>{});
    return s;
}

inline JetSurface read_surface(const std::string& stem)
{
    return surface_from_csv(read_text(stem + ".csv"), read_json(stem + ".json"));
}

// ---------------------------------------------------------------------------
// Solutions and reports

inline std::string solution_csv(const SolutionGrid& s)
{
    std::string out = "x,y,z,p,q\n";
    for (std::size_t i = 0; i < s.grid.rows(); ++i) {
        for (std::size_t j = 0; j < s.grid.cols(); ++j) {
            const std::size_t k = s.index(i, j);
            const bool ok = s.valid[k];
            out += fmt(s.grid.sigma[i]) + "," + fmt(s.grid.tau[j]) + "," + fmt(ok ? s.z[k] : std::nan("")) + ","
                   + fmt(s.p[k]) + "," + fmt(s.q[k]) + "\n";
        }
    }
    return out;
}

inline json to_json(const DefectReport& r)
{
    return {{"max_defect", jnum(r.max_defect)},
            {"mean_defect", jnum(r.mean_defect)},
            {"max_defect_off_axes", jnum(r.max_defect_off_axes)},
            {"max_abs_H", jnum(r.max_abs_H)},
            {"loop_defect", jnum(r.loop_defect)},
            {"max_zx_error", jnum(r.max_zx_error)},
            {"max_zy_error", jnum(r.max_zy_error)},
            {"projectable", r.projectable},
            {"lagrangian", r.lagrangian},
            {"nodes", r.nodes},
            {"fd_scheme", r.fd_scheme},
            {"warnings", r.warnings}};
}

inline json to_json(const DivergenceProfile& p)
{
    json j{{"radii", p.radii},
           {"max_diff", p.max_diff},
           {"contact_order", jnum(p.contact_order)},
           {"order_is_bound", p.order_is_bound},
           {"fitted", p.fitted}};
    if (p.residual1) {
        j["residual1"] = to_json(*p.residual1);
    }
    if (p.residual2) {
        j["residual2"] = to_json(*p.residual2);
    }
    return j;
}

inline std::string profile_csv(const DivergenceProfile& p)
{
    std::string out = "radius,difference\n";
    for (std::size_t k = 0; k < p.radii.size(); ++k) {
        out += fmt(p.radii[k]) + "," + fmt(p.max_diff[k]) + "\n";
    }
    return out;
}

inline json to_json(const AxisDecay& d)
{
    return {{"exp_w3_u", jnum(d.exp_w3_u)},
            {"exp_w3_v", jnum(d.exp_w3_v)},
            {"exp_w4_u", jnum(d.exp_w4_u)},
            {"exp_w4_v", jnum(d.exp_w4_v)},
            {"tail_w3_u", jnum(d.tail_w3_u)},
            {"tail_w3_v", jnum(d.tail_w3_v)},
            {"tail_w4_u", jnum(d.tail_w4_u)},
            {"tail_w4_v", jnum(d.tail_w4_v)},
            {"predicted_pair", {jnum(d.predicted_first), jnum(d.predicted_second)}},
            {"model_exponents",
             {{"w3_u", jnum(d.model_w3_u)}, {"w3_v", jnum(d.model_w3_v)}, {"w4_u", jnum(d.model_w4_u)},
              {"w4_v", jnum(d.model_w4_v)}}},
            {"decades_u", d.decades_u},
            {"decades_v", d.decades_v},
            {"low_confidence", d.low_confidence}};
}

inline json to_json(const ManifoldDiagnostics& d)
{
    return {{"seed_radius", d.seed_radius},
            {"targets", d.targets},
            {"failed", d.failed},
            {"max_newton_iterations", d.max_newton_iterations},
            {"max_shooting_residual", jnum(d.max_shooting_residual)},
            {"max_abs_H", jnum(d.max_abs_H)},
            {"max_shrink_factor", jnum(d.max_shrink_factor)},
            {"shrink_horizon", d.shrink_horizon},
            {"notes", d.notes}};
}

inline json to_json(const Linearization& lin)
{
    json ev = json::array(), cf = json::array(), vecs = json::array();
    for (const auto& e : lin.eigenvalues) {
        ev.push_back({e.real(), e.imag()});
    }
    for (const auto& e : lin.closed_form_eigenvalues) {
        cf.push_back({e.real(), e.imag()});
    }
    if (lin.spectrum == SpectrumKind::RealHyperbolic) {
        for (int i = 0; i < 4; ++i) {
            const Vec4 v = lin.real_vector(i);
            vecs.push_back({v[0], v[1], v[2], v[3]});
        }
    }
    json L = json::array();
    for (int r = 0; r < 4; ++r) {
        L.push_back({lin.L[r][0], lin.L[r][1], lin.L[r][2], lin.L[r][3]});
    }
    return {{"base", {lin.base.x, lin.base.y, lin.base.p, lin.base.q}},
            {"L", L},
            {"c2", lin.c2},
            {"det_hessian", lin.det_hess},
            {"charpoly", {lin.charpoly[0], lin.charpoly[1], lin.charpoly[2], lin.charpoly[3]}},
            {"eigenvalues", ev},
            {"closed_form_eigenvalues", cf},
            {"crosscheck_error", jnum(lin.crosscheck_error)},
            {"spectrum", std::string(to_string(lin.spectrum))},
            {"hyperbolic", lin.hyperbolic},
            {"degenerate_hessian", lin.degenerate_hessian},
            {"a", lin.a},
            {"b", lin.b},
            {"eigenvectors", vecs}};
}

inline json to_json(const PlaneReport& rep)
{
    json planes = json::array();
    for (const auto& p : rep.planes) {
        // 1-based labels v1..v4
        planes.push_back({{"span", {p.i + 1, p.j + 1}},
                          {"omega", p.omega_value},
                          {"projection_det", p.projection_det},
                          {"lagrangian", p.lagrangian},
                          {"projectable", p.projectable},
                          {"kind", std::string(to_string(p.kind))}});
    }
    return {{"planes", planes}};
}

inline json to_json(const Jet2Candidates& c)
{
    json out = json::array();
    for (const auto& k : c.candidates) {
        const auto r = jet2_residuals(k, c.a, c.b);
        out.push_back({{"A", k.A}, {"B", k.B}, {"C", k.C}, {"rotation", k.rotation}, {"residuals", r}});
    }
    return {{"a", c.a}, {"b", c.b}, {"candidates", out}};
}

// ---------------------------------------------------------------------------
// Shape from shading

struct IntensityGrid {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values; // row-major, in (0, 1]
};

struct HGrid {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> h;
    std::vector<std::string> warnings;
};

/// Plain-text (P2) PGM; samples are divided by maxval.
inline IntensityGrid read_pgm(const std::string& text)
{
    std::istringstream in(text);
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.resize(hash);
        }
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) {
            tokens.push_back(tok);
        }
    }
    if (tokens.size() < 4 || tokens[0] != "P2") {
        fail(ErrorKind::Ingestion, "not a plain-text (P2) PGM image");
    }
    auto num = [&](std::size_t k) {
        try {
            return std::stod(tokens.at(k));
        } catch (const std::exception&) {
            fail(ErrorKind::Ingestion, "malformed PGM token #" + std::to_string(k));
        }
    };
    IntensityGrid g;
    g.cols = static_cast<std::size_t>(num(1));
    g.rows = static_cast<std::size_t>(num(2));
    const double maxval = num(3);
    if (g.rows == 0 || g.cols == 0 || maxval <= 0) {
        fail(ErrorKind::Ingestion, "PGM header needs positive width, height and maxval");
    }
    if (tokens.size() != 4 + g.rows * g.cols) {
        fail(ErrorKind::Ingestion, "PGM pixel count does not match its header");
    }
    g.values.resize(g.rows * g.cols);
    for (std::size_t k = 0; k < g.values.size(); ++k) {
        g.values[k] = num(4 + k) / maxval;
    }
    return g;
}

/// Rectangular CSV of intensities without a header.
inline IntensityGrid read_intensity_csv(const std::string& text)
{
    const auto rows = parse_csv(text);
    if (rows.empty()) {
        fail(ErrorKind::Ingestion, "empty intensity CSV");
    }
    IntensityGrid g;
    g.rows = rows.size();
    g.cols = rows[0].size();
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != g.cols) {
            fail(ErrorKind::Ingestion, "intensity CSV row " + std::to_string(r) + " has a different length");
        }
        for (const auto& c : rows[r]) {
            try {
                g.values.push_back(parse_double(c));
            } catch (const Error&) {
                fail(ErrorKind::Ingestion, "intensity CSV cell '" + c + "' is not a number");
            }
        }
    }
    return g;
}

/// h = 1/I^2 - 1. I <= 0 is rejected; I > 1 is clipped to h = 0 with a warning.
inline HGrid intensity_to_h(const IntensityGrid& I)
{
    HGrid out;
    out.rows = I.rows;
    out.cols = I.cols;
    out.h.resize(I.values.size());
    std::size_t clipped = 0;
    for (std::size_t k = 0; k < I.values.size(); ++k) {
        const double v = I.values[k];
        if (!(v > 0) || !std::isfinite(v)) {
            std::ostringstream os;
            os << "intensity " << v << " at pixel (row " << k / I.cols << ", col " << k % I.cols
               << ") must be positive and finite";
            fail(ErrorKind::Ingestion, os.str());
        }
        if (v > 1) {
            ++clipped;
            out.h[k] = 0.0;
            continue;
        }
        out.h[k] = 1.0 / (v * v) - 1.0;
    }
    if (clipped > 0) {
        out.warnings.push_back(std::to_string(clipped) + " pixels with intensity > 1 clipped to h = 0");
    }
    return out;
}

inline std::string h_csv(const HGrid& g)
{
    std::string out;
    for (std::size_t r = 0; r < g.rows; ++r) {
        for (std::size_t c = 0; c < g.cols; ++c) {
            out += fmt(g.h[r * g.cols + c]);
            out += c + 1 < g.cols ? "," : "\n";
        }
    }
    return out;
}

} // namespace saddlejet::io
