#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"

namespace {

const std::vector<std::pair<std::string, std::string>> kCommands{
    {"linearize", "eigen-structure of the linearized characteristic field at a critical point"},
    {"classify", "invariant eigen-planes (or second-order jets when a = b)"},
    {"series", "formal power series of a saddle solution"},
    {"resonance", "resonant index pairs m a = n b up to degree N"},
    {"model-saddle", "closed-form saddle surface with prescribed data"},
    {"flow-surface", "surface flowed out of a completed strip, or a general saddle surface"},
    {"manifold", "stable or unstable manifold as a jet surface"},
    {"reconstruct", "integrate a base-chart jet to z(x, y)"},
    {"verify-nonunique", "divergence profile of two solutions with the same quadratic part"},
    {"exponents", "decay exponents of the v3, v4 components towards the axes"},
    {"sfs-ingest", "convert a shading image to h = 1/I^2 - 1"},
};

} // namespace

int main(int argc, char** argv)
{
    using namespace saddlejet;
    CLI::App app{"saddlejet: saddle-point solutions of first-order Hamilton-Jacobi equations"};
    std::string config_path, out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    app.add_option("--config", config_path, "experiment config (JSON, see schema/experiment.schema.json)");
    app.add_option("--out", out_dir, "output directory (created if missing)");
    app.add_option("--seed", seed, "random seed for randomized sweeps (overrides the config)");
    app.add_option("--tol", tol, "integrator tolerance (overrides tolerances.flow)");
    app.require_subcommand(1);
    for (const auto& [name, help] : kCommands) {
        app.add_subcommand(name, help)->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);
        }
        std::cerr << cli::error_json("validation", e.what()) << "\n";
        return 2;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        cli::json cfg = config_path.empty() ? cli::default_config() : cli::load_config_file(config_path);
        if (cfg.contains("command") && cfg["command"].get<std::string>() != command) {
            fail(ErrorKind::Validation, "config is for command '" + cfg["command"].get<std::string>()
                                            + "' but '" + command + "' was requested");
        }
        if (seed) {
            cfg["seed"] = *seed;
        }
        if (tol) {
            require(*tol > 0, ErrorKind::Validation, "--tol must be positive");
            cfg["tolerances"]["flow"] = *tol;
        }
        cli::Runner runner(cfg, out_dir);
        const auto res = runner.run(command);
        for (const auto& w : res.warnings) {
            std::cerr << cli::json{{"warning", w}}.dump() << "\n";
        }
        std::cout << cli::json{{"command", command}, {"outputs", res.outputs}, {"summary", res.summary}}.dump() << "\n";
        return 0;
    } catch (const Error& e) {
        std::cerr << cli::error_json(to_string(e.kind()), e.what()) << "\n";
        return cli::exit_code(e.kind());
    } catch (const std::exception& e) {
        // json type errors and the like come from malformed input
        std::cerr << cli::error_json("validation", e.what()) << "\n";
        return 2;
    }
}
