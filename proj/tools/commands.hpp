#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "config.hpp"
#include "saddlejet/flow.hpp"
#include "saddlejet/hamiltonian.hpp"
#include "saddlejet/io.hpp"
#include "saddlejet/jet.hpp"
#include "saddlejet/model_case.hpp"
#include "saddlejet/series.hpp"
#include "saddlejet/verify.hpp"

namespace saddlejet::cli {

/// What a command wrote, for the summary line on stdout.
struct RunResult {
    std::vector<std::string> outputs;
    std::vector<std::string> warnings;
    json summary = json::object();
};

class Runner {
public:
    Runner(json cfg, std::filesystem::path out) : cfg_(std::move(cfg)), out_(std::move(out)) {}

    RunResult run(const std::string& command)
    {
        static const std::map<std::string, void (Runner::*)()> table{
            {"linearize", &Runner::linearize_cmd},        {"classify", &Runner::classify_cmd},
            {"series", &Runner::series_cmd},              {"resonance", &Runner::resonance_cmd},
            {"model-saddle", &Runner::model_saddle_cmd},  {"flow-surface", &Runner::flow_surface_cmd},
            {"manifold", &Runner::manifold_cmd},          {"reconstruct", &Runner::reconstruct_cmd},
            {"verify-nonunique", &Runner::verify_cmd},    {"exponents", &Runner::exponents_cmd},
            {"sfs-ingest", &Runner::sfs_cmd},
        };
        const auto it = table.find(command);
        if (it == table.end()) {
            fail(ErrorKind::Validation, "unknown command '" + command + "'");
        }
        std::error_code ec;
        std::filesystem::create_directories(out_, ec);
        if (ec) {
            fail(ErrorKind::Io, "cannot create output directory '" + out_.string() + "': " + ec.message());
        }
        json effective = cfg_;
        effective["command"] = command;
        write_json("run.json", effective);
        (this->*(it->second))();
        return result_;
    }

private:
    // ---- helpers ---------------------------------------------------------

    std::string path(const std::string& name) const { return (out_ / name).string(); }

    void write_json(const std::string& name, const json& j)
    {
        io::write_json(path(name), j);
        result_.outputs.push_back(name);
    }

    void write_text(const std::string& name, const std::string& text)
    {
        io::write_text(path(name), text);
        result_.outputs.push_back(name);
    }

    void write_surface(const std::string& stem, const JetSurface& s)
    {
        io::write_surface(path(stem), s);
        result_.outputs.push_back(stem + ".csv");
        result_.outputs.push_back(stem + ".json");
        for (const auto& w : s.meta.warnings) {
            result_.warnings.push_back(w);
        }
    }

    double tol(const char* key) const { return cfg_["tolerances"][key].get<double>(); }

    HamiltonianSpec spec() const { return io::hamiltonian_from_json(cfg_["hamiltonian"]); }
    DataFunction phi(const char* key) const { return io::data_function_from_json(cfg_[key]); }

    PhasePoint point() const
    {
        const auto& p = cfg_["point"];
        return {p[0].get<double>(), p[1].get<double>(), p[2].get<double>(), p[3].get<double>()};
    }

    Grid grid() const
    {
        const auto& g = cfg_["grid"];
        return Grid::square(g["half_width"].get<double>(), g["nodes"].get<int>());
    }

    bool base_chart() const { return cfg_["grid"]["chart"].get<std::string>() == "base"; }

    std::pair<double, double> model_rates() const
    {
        const auto s = spec();
        if (!s.is_model()) {
            fail(ErrorKind::Validation, "this command needs a model hamiltonian (type \"model\")");
        }
        return *s.normal_form_rates();
    }

    void defect(const JetSurface& s)
    {
        const auto rep = check_lagrangian(s, tol("lagrangian"));
        write_json("defect.json", io::to_json(rep));
        result_.summary["max_abs_H"] = io::jnum(rep.max_abs_H);
        result_.summary["max_defect"] = io::jnum(rep.max_defect);
    }

    // ---- commands --------------------------------------------------------

    void linearize_cmd()
    {
        const auto lin = linearize(spec(), point(), tol("critical"));
        write_json("linearization.json", io::to_json(lin));
        result_.summary["spectrum"] = std::string(to_string(lin.spectrum));
        result_.summary["crosscheck_error"] = io::jnum(lin.crosscheck_error);

        const int count = cfg_["sweep"]["count"].get<int>();
        if (count == 0) {
            return;
        }
        // random cross-check of closed-form against general eigenvalues
        std::mt19937_64 rng(cfg_["seed"].get<std::uint64_t>());
        std::uniform_real_distribution<double> rate(0.2, 3.0), coef(-1.0, 1.0);
        std::string csv = "k,kind,crosscheck_error\n";
        double worst = 0;
        for (int k = 0; k < count; ++k) {
            HamiltonianSpec s = HamiltonianSpec::model(rate(rng), rate(rng));
            const char* kind = "model";
            if (k % 2 == 1) {
                // f = (alpha p^2 + gamma q^2)/2, h = (A x^2 + 2 B x y + C y^2)/2, both positive definite
                const double alpha = rate(rng), gamma = rate(rng), A = rate(rng), C = rate(rng);
                const double B = 0.9 * coef(rng) * std::sqrt(A * C);
                s = HamiltonianSpec::separated(polynomial({{2, 0, alpha / 2}, {0, 2, gamma / 2}}),
                                               polynomial({{2, 0, A / 2}, {1, 1, B}, {0, 2, C / 2}}));
                kind = "separated";
            }
            const auto l = linearize(s, {0, 0, 0, 0}, tol("critical"));
            worst = std::max(worst, l.crosscheck_error);
            csv += std::to_string(k) + "," + kind + "," + io::fmt(l.crosscheck_error) + "\n";
        }
        write_text("sweep.csv", csv);
        result_.summary["sweep_worst_crosscheck"] = io::jnum(worst);
    }

    void classify_cmd()
    {
        const auto lin = linearize(spec(), point(), tol("critical"));
        try {
            write_json("planes.json", io::to_json(classify_invariant_planes(lin, tol("plane"))));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Ambiguity) {
                throw;
            }
            // a = b: eigen-planes are not unique, report the second-order jets instead
            json j = io::to_json(classify_second_order(lin.a, lin.b));
            j["note"] = e.what();
            write_json("second_order.json", j);
            result_.warnings.push_back(e.what());
        }
    }

    void series_cmd()
    {
        const auto& sc = cfg_["series"];
        const int N = sc["N"].get<int>();
        const Bivariate hf = io::bivariate_from_json(sc["h"]);
        require(hf.desc.kind == BivariateDescriptor::Kind::Polynomial, ErrorKind::Validation,
                "series.h must be given as a polynomial (\"poly\")");
        BivariateSeries h(N);
        for (const auto& t : hf.desc.terms) {
            if (t.i + t.j <= N) {
                h.add(t.i, t.j, t.c);
            } else {
                result_.warnings.push_back("term of degree " + std::to_string(t.i + t.j) + " beyond N ignored");
            }
        }
        SeriesOptions opt;
        opt.resonance_tol = tol("resonance");
        opt.obstruction_tol = tol("obstruction");
        for (const auto& fv : sc["free_values"]) {
            opt.free_values[{fv[0].get<int>(), fv[1].get<int>()}] = fv[2].get<double>();
        }
        const SaddleSign sign = sc["sign"].get<std::string>() == "plus" ? SaddleSign::Plus : SaddleSign::Minus;
        const auto sol = solve_saddle_series(h, sc["a"].get<double>(), sc["b"].get<double>(), sign, N, opt);
        write_json("series.json", io::to_json(sol.z));
        write_text("series.csv", io::series_csv(sol.z));
        write_json("resonances.json", io::to_json(sol.resonances));
        const auto r = series_residual(sol.z, h, N);
        result_.summary["residual_max"] = io::jnum(r.max_abs_in_degrees(0, N));
        result_.summary["nonexistence"] = sol.resonances.nonexistence;
        if (sol.resonances.nonexistence) {
            result_.warnings.push_back("a resonant coefficient has a nonzero obstruction: no formal solution");
        }
    }

    void resonance_cmd()
    {
        const auto& sc = cfg_["series"];
        const double a = sc["a"].get<double>(), b = sc["b"].get<double>();
        const int N = sc["N"].get<int>();
        json pairs = json::array();
        for (const auto& [m, n] : detect_resonances(a, b, N, tol("resonance"))) {
            pairs.push_back({{"m", m}, {"n", n}, {"gap", 2 * (m * a - n * b)}});
        }
        write_json("resonance.json", {{"a", a}, {"b", b}, {"N", N}, {"resonances", pairs}});
        result_.summary["count"] = pairs.size();
    }

    void model_saddle_cmd()
    {
        const auto [a, b] = model_rates();
        const auto s = base_chart() ? model_saddle_surface_base(a, b, phi("phi_plus"), phi("phi_minus"), grid())
                                    : model_saddle_surface(a, b, phi("phi_plus"), phi("phi_minus"), grid());
        write_surface("surface", s);
        defect(s);
    }

    void flow_surface_cmd()
    {
        const auto& st = cfg_["strip"];
        const auto sp = spec();
        JetSurface s("", Chart::Parameter, Grid{{0.0}, {0.0}});
        if (st["mode"].get<std::string>() == "saddle") {
            SaddleOptions opt;
            opt.tol = tol("flow");
            opt.newton_tol = tol("newton");
            s = general_saddle_surface(sp, phi("phi_plus"), phi("phi_minus"), grid(), opt);
        } else {
            const Branch br = st["branch"].get<std::string>() == "plus" ? Branch::Plus : Branch::Minus;
            const double s0 = st["s_min"].get<double>(), s1 = st["s_max"].get<double>();
            const auto strip = complete_strip(sp, phi(br == Branch::Plus ? "phi_plus" : "phi_minus"), br, s0, s1);
            const Grid g{Grid::linspace(s0, s1, st["ns"].get<int>()),
                         Grid::linspace(st["t_min"].get<double>(), st["t_max"].get<double>(), st["nt"].get<int>())};
            s = surface_from_strip(sp, strip, g, tol("flow"));
        }
        write_surface("surface", s);
        defect(s);
    }

    ManifoldResult manifold() const
    {
        const auto& mc = cfg_["manifold"];
        ManifoldOptions opt;
        opt.nodes = mc["nodes"].get<int>();
        opt.seed_factor = mc["seed_factor"].get<double>();
        opt.tol = tol("flow");
        opt.newton_tol = tol("newton");
        const ManifoldKind kind = mc["kind"].get<std::string>() == "unstable" ? ManifoldKind::Unstable : ManifoldKind::Stable;
        return invariant_manifold(spec(), point(), kind, mc["radius"].get<double>(), opt);
    }

    void manifold_cmd()
    {
        const auto m = manifold();
        write_surface("surface", m.surface);
        write_json("manifold.json", io::to_json(m.diagnostics));
        defect(m.surface);
    }

    JetSurface base_surface(const DataFunction& pp, const DataFunction& pm) const
    {
        const auto [a, b] = model_rates();
        return model_saddle_surface_base(a, b, pp, pm, grid());
    }

    void reconstruct_cmd()
    {
        const auto& rc = cfg_["reconstruct"];
        const JetSurface s = rc["source"].get<std::string>() == "manifold" ? manifold().surface
                                                                          : base_surface(phi("phi_plus"), phi("phi_minus"));
        const PathOrder order =
            rc["order"].get<std::string>() == "horizontal-first" ? PathOrder::HorizontalFirst : PathOrder::VerticalFirst;
        const auto sol = reconstruct_z(s, rc["base"][0].get<double>(), rc["base"][1].get<double>(), order);
        write_text("solution.csv", io::solution_csv(sol));
        const auto rep = residual_grid(*s.spec, sol);
        write_json("residual.json", io::to_json(rep));
        result_.warnings.insert(result_.warnings.end(), sol.warnings.begin(), sol.warnings.end());
        result_.summary["max_abs_H"] = io::jnum(rep.max_abs_H);
        result_.summary["loop_defect"] = io::jnum(sol.loop_defect);
    }

    void verify_cmd()
    {
        const auto& vc = cfg_["verify"];
        const auto zero = DataFunction::zero();
        const auto s0 = reconstruct_z(base_surface(zero, zero));
        const auto s1 = reconstruct_z(base_surface(phi("phi_plus"), phi("phi_minus")));
        const auto prof = compare_solutions(s0, s1, spec(), vc["radii"].get<std::size_t>());
        json j = io::to_json(prof);
        const double r = vc["radius"].get<double>();
        j["radius"] = r;
        j["difference_at_radius"] = max_difference_on_circle(s0, s1, r);
        write_json("profile.json", j);
        write_text("profile.csv", io::profile_csv(prof));
        result_.summary["contact_order"] = io::jnum(prof.contact_order);
        result_.summary["difference_at_radius"] = j["difference_at_radius"];
    }

    void exponents_cmd()
    {
        const auto& ec = cfg_["exponents"];
        const double u0 = ec["u0"].get<double>();
        const Grid g = dyadic_quadrant_grid(u0, u0, ec["levels"].get<int>());
        const auto sp = spec();
        JetSurface s("", Chart::Parameter, Grid{{0.0}, {0.0}});
        if (ec["construction"].get<std::string>() == "general") {
            SaddleOptions opt;
            opt.tol = tol("flow");
            opt.newton_tol = tol("newton");
            s = general_saddle_surface(sp, phi("phi_plus"), phi("phi_minus"), g, opt);
        } else {
            const auto [a, b] = model_rates();
            s = model_saddle_surface(a, b, phi("phi_plus"), phi("phi_minus"), g);
        }
        const auto d = axis_decay_exponents(s);
        json j = io::to_json(d);
        j["predicted_regularity"] = io::jnum(predicted_regularity(s.meta.a, s.meta.b, s.meta.phi_plus->vanishing_order()));
        write_json("exponents.json", j);
        if (d.low_confidence) {
            result_.warnings.push_back("offsets span fewer than 2 decades: exponents are low confidence");
        }
        result_.summary["predicted_pair"] = j["predicted_pair"];
    }

    void sfs_cmd()
    {
        const auto& sc = cfg_["sfs"];
        const std::string input = sc["input"].get<std::string>();
        require(!input.empty(), ErrorKind::Validation, "sfs.input must name a PGM or CSV intensity file");
        std::string format = sc["format"].get<std::string>();
        if (format == "auto") {
            const auto ext = std::filesystem::path(input).extension().string();
            format = ext == ".pgm" ? "pgm" : "csv";
        }
        const std::string text = io::read_text(input);
        const auto I = format == "pgm" ? io::read_pgm(text) : io::read_intensity_csv(text);
        const auto h = io::intensity_to_h(I);
        write_text("h.csv", io::h_csv(h));
        double hmax = 0;
        for (double v : h.h) {
            hmax = std::max(hmax, v);
        }
        write_json("sfs.json", {{"rows", h.rows}, {"cols", h.cols}, {"max_h", hmax}, {"warnings", h.warnings}});
        result_.warnings.insert(result_.warnings.end(), h.warnings.begin(), h.warnings.end());
    }

    json cfg_;
    std::filesystem::path out_;
    RunResult result_;
};

} // namespace saddlejet::cli
