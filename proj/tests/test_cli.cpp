#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "config.hpp"
#include "saddlejet/io.hpp"

using namespace saddlejet;
using io::json;
namespace fs = std::filesystem;

namespace {

struct Run {
    int status = -1;
    std::string out;
    std::string err;
};

fs::path workdir(const std::string& name)
{
    const auto d = fs::temp_directory_path() / "saddlejet_test_cli" / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

/// Runs the saddlejet binary with `args`; stdout and stderr go through files in `dir`.
Run run_cli(const fs::path& dir, const std::string& args)
{
    const auto o = dir / "stdout.txt", e = dir / "stderr.txt";
    const std::string cmd =
        std::string("'") + SADDLEJET_CLI_PATH + "' " + args + " >'" + o.string() + "' 2>'" + e.string() + "'";
    const int raw = std::system(cmd.c_str());
    Run r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = io::read_text(o.string());
    r.err = io::read_text(e.string());
    return r;
}

fs::path write_config(const fs::path& dir, const json& cfg)
{
    const auto p = dir / "config.json";
    io::write_text(p.string(), cfg.dump());
    return p;
}

Run run_config(const fs::path& dir, const std::string& command, const json& cfg, const std::string& extra = "")
{
    const auto p = write_config(dir, cfg);
    return run_cli(dir, "--config '" + p.string() + "' --out '" + (dir / "out").string() + "' " + extra + " " + command);
}

json error_of(const Run& r)
{
    const auto nl = r.err.find('\n');
    return json::parse(r.err.substr(0, nl));
}

} // namespace

TEST(Cli, SeriesExampleCoefficient)
{
    const auto d = workdir("series");
    const json cfg{{"series", {{"h", {{"poly", {{2, 0, 1.0}, {0, 2, 2.0}, {3, 0, 1.0}}}}}, {"a", 1.0},
                               {"b", std::sqrt(2.0)}, {"N", 10}}}};
    const auto r = run_config(d, "series", cfg);
    ASSERT_EQ(r.status, 0) << r.err;
    const auto s = io::series_from_json(io::read_json((d / "out" / "series.json").string()));
    EXPECT_NEAR(s(3, 0), 1.0 / 6.0, 1e-12);
    EXPECT_NEAR(s(2, 0), 0.5, 1e-15);
    EXPECT_NEAR(s(0, 2), -std::sqrt(2.0) / 2.0, 1e-15);
    const auto csv = io::series_from_csv(io::read_text((d / "out" / "series.csv").string()), 10);
    EXPECT_TRUE(csv == s);
    const auto summary = json::parse(r.out);
    EXPECT_LT(summary["summary"]["residual_max"].get<double>(), 1e-12);
}

TEST(Cli, ResonanceListsDiagonalPairs)
{
    const auto d = workdir("resonance");
    const auto r = run_config(d, "resonance", {{"series", {{"a", 1.0}, {"b", 1.0}, {"N", 6}}}});
    ASSERT_EQ(r.status, 0) << r.err;
    const auto j = io::read_json((d / "out" / "resonance.json").string());
    std::vector<std::pair<int, int>> pairs;
    for (const auto& e : j["resonances"]) {
        pairs.emplace_back(e["m"].get<int>(), e["n"].get<int>());
        EXPECT_EQ(e["gap"].get<double>(), 0.0);
    }
    EXPECT_EQ(pairs, (std::vector<std::pair<int, int>>{{2, 2}, {3, 3}}));
}

TEST(Cli, ObstructedSeriesReportsNonexistence)
{
    const auto d = workdir("obstructed");
    const json cfg{{"series",
                    {{"h", {{"poly", {{2, 0, 1.0}, {0, 2, 1.0}, {2, 2, 0.1}}}}}, {"a", 1.0}, {"b", 1.0}, {"N", 6}}}};
    const auto r = run_config(d, "series", cfg);
    ASSERT_EQ(r.status, 0) << r.err;
    const auto j = io::read_json((d / "out" / "resonances.json").string());
    EXPECT_TRUE(j["nonexistence"].get<bool>());
    EXPECT_NE(r.err.find("warning"), std::string::npos);
}

TEST(Cli, UnstableManifoldSurfaceAndDefect)
{
    const auto d = workdir("manifold");
    const auto r = run_config(d, "manifold", {{"manifold", {{"kind", "unstable"}}}});
    ASSERT_EQ(r.status, 0) << r.err;
    const auto def = io::read_json((d / "out" / "defect.json").string());
    EXPECT_LT(io::jdouble(def["max_abs_H"]), 1e-7);
    auto s = io::read_surface((d / "out" / "surface").string());
    EXPECT_GT(s.points.size(), 100u);
    EXPECT_LT(s.update_residual(), 1e-7);
}

TEST(Cli, EveryCommandRunsOnDefaults)
{
    for (const char* c : {"linearize", "classify", "model-saddle", "flow-surface", "reconstruct", "verify-nonunique",
                          "exponents"}) {
        const auto d = workdir(std::string("defaults_") + c);
        const auto r = run_cli(d, std::string("--out '") + (d / "out").string() + "' " + c);
        EXPECT_EQ(r.status, 0) << c << ": " << r.err;
        EXPECT_TRUE(fs::exists(d / "out" / "run.json")) << c;
        EXPECT_EQ(json::parse(r.out)["command"], c);
    }
}

TEST(Cli, ClassifyEqualRatesFallsBackToSecondOrder)
{
    const auto d = workdir("classify_equal");
    const auto r = run_config(d, "classify", {{"hamiltonian", {{"type", "model"}, {"a", 1.0}, {"b", 1.0}}}});
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_TRUE(fs::exists(d / "out" / "second_order.json"));
    EXPECT_FALSE(fs::exists(d / "out" / "planes.json"));
}

TEST(Cli, LinearizeSweepIsSeeded)
{
    const auto d1 = workdir("sweep1"), d2 = workdir("sweep2");
    const json cfg{{"sweep", {{"count", 20}}}, {"seed", 5}};
    ASSERT_EQ(run_config(d1, "linearize", cfg).status, 0);
    ASSERT_EQ(run_config(d2, "linearize", cfg).status, 0);
    const auto s1 = io::read_text((d1 / "out" / "sweep.csv").string());
    EXPECT_EQ(s1, io::read_text((d2 / "out" / "sweep.csv").string()));
    const auto rows = io::parse_csv(s1);
    ASSERT_EQ(rows.size(), 21u);
    for (std::size_t k = 1; k < rows.size(); ++k) {
        EXPECT_LT(io::parse_double(rows[k][2]), 1e-8);
    }
    const auto d3 = workdir("sweep3");
    ASSERT_EQ(run_config(d3, "linearize", cfg, "--seed 6").status, 0);
    EXPECT_NE(s1, io::read_text((d3 / "out" / "sweep.csv").string()));
}

TEST(Cli, ByteIdenticalOutputs)
{
    const json cfg{{"phi_plus", {{"type", "monomial"}, {"c", 1.0}, {"l", 5}}},
                   {"hamiltonian", {{"type", "normal_form"}, {"a", 1.0}, {"b", std::sqrt(2.0)}, {"f", {{"builtin", "product"}}}}},
                   {"strip", {{"mode", "saddle"}}},
                   {"grid", {{"half_width", 0.3}, {"nodes", 15}}}};
    const auto d1 = workdir("det1"), d2 = workdir("det2");
    ASSERT_EQ(run_config(d1, "flow-surface", cfg).status, 0);
    ASSERT_EQ(run_config(d2, "flow-surface", cfg).status, 0);
    for (const char* f : {"surface.csv", "surface.json", "defect.json"}) {
        EXPECT_EQ(io::read_text((d1 / "out" / f).string()), io::read_text((d2 / "out" / f).string())) << f;
    }
}

TEST(Cli, ShadingIngestion)
{
    const auto d = workdir("sfs");
    io::write_text((d / "img.pgm").string(), "P2\n2 2\n100\n100 50\n200 50\n");
    const auto r = run_config(d, "sfs-ingest", {{"sfs", {{"input", (d / "img.pgm").string()}}}});
    ASSERT_EQ(r.status, 0) << r.err;
    const auto rows = io::parse_csv(io::read_text((d / "out" / "h.csv").string()));
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(io::parse_double(rows[0][0]), 0.0);
    EXPECT_NEAR(io::parse_double(rows[0][1]), 3.0, 1e-14);
    EXPECT_EQ(io::parse_double(rows[1][0]), 0.0); // clipped
    EXPECT_NE(r.err.find("clipped"), std::string::npos);

    io::write_text((d / "bad.csv").string(), "0.5,0.5\n0.5,-0.1\n");
    const auto bad = run_config(d, "sfs-ingest", {{"sfs", {{"input", (d / "bad.csv").string()}}}});
    EXPECT_EQ(bad.status, 2);
    const auto e = error_of(bad);
    EXPECT_EQ(e["error"]["kind"], "ingestion");
    EXPECT_NE(e["error"]["message"].get<std::string>().find("row 1, col 1"), std::string::npos);
}

TEST(Cli, UnknownKeyIsValidationError)
{
    const auto d = workdir("unknown_key");
    const auto r = run_config(d, "series", {{"series", {{"N", 6}, {"bogus", 1}}}});
    EXPECT_EQ(r.status, 2);
    const auto e = error_of(r);
    EXPECT_EQ(e["error"]["kind"], "validation");
    EXPECT_NE(e["error"]["message"].get<std::string>().find("/series"), std::string::npos);
    EXPECT_FALSE(fs::exists(d / "out" / "series.json"));
}

TEST(Cli, BadInputsExitTwo)
{
    const auto d = workdir("bad_inputs");
    EXPECT_EQ(run_cli(d, "--out '" + d.string() + "' no-such-command").status, 2);
    EXPECT_EQ(run_cli(d, "").status, 2);
    EXPECT_EQ(run_cli(d, "--tol -1 --out '" + d.string() + "' resonance").status, 2);
    EXPECT_EQ(run_config(d, "series", {{"series", {{"N", "ten"}}}}).status, 2);
    EXPECT_EQ(run_config(d, "series", {{"command", "resonance"}}).status, 2);
    EXPECT_EQ(run_cli(d, "--config /nonexistent.json series").status, 2);
    io::write_text((d / "broken.json").string(), "{\"seed\": ");
    EXPECT_EQ(run_cli(d, "--config '" + (d / "broken.json").string() + "' series").status, 2);
    // model-only command on a normal form
    EXPECT_EQ(run_config(d, "model-saddle",
                         {{"hamiltonian", {{"type", "normal_form"}, {"a", 1.0}, {"b", 2.0}, {"f", {{"builtin", "linear"}}}}}})
                  .status,
              2);
}

TEST(Cli, NumericalFailureExitsThree)
{
    const auto d = workdir("numerical");
    // complex spectrum: no stable/unstable manifold
    const json cfg{{"hamiltonian",
                    {{"type", "separated"}, {"f", {{"poly", {{2, 0, 0.5}, {0, 2, 0.5}}}}}, {"h", {{"poly", {{2, 0, -0.5}, {0, 2, -0.5}}}}}}}};
    const auto r = run_config(d, "manifold", cfg);
    EXPECT_EQ(r.status, 3) << r.err;
    EXPECT_EQ(error_of(r)["error"]["kind"], "classification");
}

TEST(Cli, TolFlagOverridesConfig)
{
    const auto d = workdir("tol");
    const auto r = run_config(d, "resonance", json::object(), "--tol 1e-7");
    ASSERT_EQ(r.status, 0) << r.err;
    const auto run = io::read_json((d / "out" / "run.json").string());
    EXPECT_EQ(run["tolerances"]["flow"].get<double>(), 1e-7);
    EXPECT_EQ(run["tolerances"]["lagrangian"].get<double>(), 1e-6);
    EXPECT_EQ(run["command"], "resonance");
}

TEST(Config, DefaultsFilledFromSchema)
{
    const auto cfg = cli::default_config();
    EXPECT_EQ(cfg["grid"]["nodes"].get<int>(), 41);
    EXPECT_EQ(cfg["tolerances"]["resonance"].get<double>(), 1e-9);
    EXPECT_EQ(cfg["hamiltonian"]["type"], "model");
    const auto partial = cli::load_config_text(R"({"grid": {"nodes": 11}})");
    EXPECT_EQ(partial["grid"]["nodes"].get<int>(), 11);
    EXPECT_EQ(partial["grid"]["half_width"].get<double>(), 0.5);
}

TEST(Config, SchemaRejections)
{
    for (const char* bad : {R"({"grid": {"nodes": 1}})", R"({"hamiltonian": {"type": "model", "a": -1}})",
                            R"({"phi_plus": {"type": "monomial", "l": 0.5}})", R"({"extra": true})",
                            R"({"series": {"N": 100}})", R"([1, 2])"}) {
        try {
            cli::validate_config_text(bad);
            ADD_FAILURE() << "accepted " << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::Validation);
        }
    }
}

TEST(Config, ExitCodes)
{
    EXPECT_EQ(cli::exit_code(ErrorKind::Validation), 2);
    EXPECT_EQ(cli::exit_code(ErrorKind::Ingestion), 2);
    EXPECT_EQ(cli::exit_code(ErrorKind::Integration), 3);
    EXPECT_EQ(cli::exit_code(ErrorKind::Classification), 3);
    EXPECT_EQ(cli::exit_code(ErrorKind::Reconstruction), 3);
}
