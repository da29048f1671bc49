#include <cmath>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "saddlejet/flow.hpp"
#include "saddlejet/io.hpp"
#include "saddlejet/model_case.hpp"
#include "saddlejet/series.hpp"

using namespace saddlejet;
using io::json;

namespace {

std::filesystem::path scratch(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / "saddlejet_test_io";
    std::filesystem::create_directories(dir);
    return dir / name;
}

void expect_same_surface(const JetSurface& a, const JetSurface& b)
{
    ASSERT_EQ(a.grid.rows(), b.grid.rows());
    ASSERT_EQ(a.grid.cols(), b.grid.cols());
    EXPECT_EQ(a.chart, b.chart);
    EXPECT_EQ(a.construction, b.construction);
    EXPECT_EQ(a.sigma_name, b.sigma_name);
    for (std::size_t i = 0; i < a.grid.rows(); ++i) {
        EXPECT_NEAR(a.grid.sigma[i], b.grid.sigma[i], 1e-12);
    }
    for (std::size_t j = 0; j < a.grid.cols(); ++j) {
        EXPECT_NEAR(a.grid.tau[j], b.grid.tau[j], 1e-12);
    }
    for (std::size_t k = 0; k < a.points.size(); ++k) {
        ASSERT_EQ(a.valid[k], b.valid[k]) << "node " << k;
        if (!a.valid[k]) {
            continue;
        }
        EXPECT_NEAR(a.points[k].x, b.points[k].x, 1e-12);
        EXPECT_NEAR(a.points[k].y, b.points[k].y, 1e-12);
        EXPECT_NEAR(a.points[k].p, b.points[k].p, 1e-12);
        EXPECT_NEAR(a.points[k].q, b.points[k].q, 1e-12);
    }
}

} // namespace

TEST(Format, ShortestRoundTrip)
{
    for (double v : {0.1, 1.0 / 3.0, -1e-300, 6.02214076e23, std::sqrt(2.0)}) {
        EXPECT_EQ(io::parse_double(io::fmt(v)), v);
    }
    EXPECT_TRUE(std::isnan(io::parse_double(io::fmt(std::nan("")))));
    EXPECT_EQ(io::parse_double(io::fmt(-INFINITY)), -INFINITY);
    EXPECT_EQ(io::jdouble(io::jnum(INFINITY)), INFINITY);
}

TEST(Format, ParseDoubleRejectsJunk)
{
    EXPECT_THROW(io::parse_double("1.5x"), Error);
    EXPECT_THROW(io::parse_double(""), Error);
}

TEST(RoundTrip, SeriesJsonAndCsv)
{
    BivariateSeries h(10);
    h.set(2, 0, 1.0);
    h.set(0, 2, 2.0);
    h.set(3, 0, 1.0);
    const auto sol = solve_saddle_series(h, 1.0, std::sqrt(2.0), SaddleSign::Plus, 10, {});
    const auto from_json = io::series_from_json(json::parse(io::to_json(sol.z).dump()));
    const auto from_csv = io::series_from_csv(io::series_csv(sol.z), 10);
    ASSERT_EQ(from_json.order(), 10);
    ASSERT_EQ(from_csv.order(), 10);
    for (int d = 0; d <= 10; ++d) {
        for (int n = 0; n <= d; ++n) {
            EXPECT_NEAR(from_json(d - n, n), sol.z(d - n, n), 1e-12);
            EXPECT_NEAR(from_csv(d - n, n), sol.z(d - n, n), 1e-12);
        }
    }
    // %.17g is exact, so the comparison is in fact bitwise
    EXPECT_TRUE(from_json == sol.z);
    EXPECT_TRUE(from_csv == sol.z);
}

TEST(RoundTrip, SeriesCsvInfersOrder)
{
    BivariateSeries z(4);
    z.set(4, 0, 0.25);
    z.set(1, 1, -1.0);
    EXPECT_EQ(io::series_from_csv(io::series_csv(z)).order(), 4);
}

TEST(RoundTrip, ModelSurfaceThroughFiles)
{
    const double a = 1.0, b = std::sqrt(2.0);
    const auto s = model_saddle_surface(a, b, DataFunction::monomial(0.7, 5.0), DataFunction::monomial(-0.3, 4.0),
                                        Grid::square(0.5, 17));
    const auto stem = scratch("model").string();
    io::write_surface(stem, s);
    const auto r = io::read_surface(stem);
    expect_same_surface(s, r);
    EXPECT_EQ(r.meta.a, a);
    EXPECT_EQ(r.meta.b, b);
    ASSERT_TRUE(r.spec.has_value());
    EXPECT_TRUE(r.spec->is_model());
    ASSERT_TRUE(r.meta.phi_plus.has_value());
    EXPECT_EQ(r.meta.phi_plus->vanishing_order(), 5.0);
    EXPECT_NEAR((*r.meta.phi_plus)(0.4), (DataFunction::monomial(0.7, 5.0))(0.4), 1e-15);
}

TEST(RoundTrip, InvalidNodesSurviveAsNan)
{
    auto s = model_saddle_surface_base(1.0, 2.0, DataFunction::zero(), DataFunction::zero(), Grid::square(0.5, 5));
    s.valid[7] = 0;
    const auto r = io::surface_from_csv(io::surface_csv(s), io::surface_meta_json(s));
    EXPECT_EQ(r.invalid_count(), 1u);
    EXPECT_FALSE(r.valid[7]);
    expect_same_surface(s, r);
}

TEST(RoundTrip, FlowSurface)
{
    const auto spec = HamiltonianSpec::normal_form(product_f(1.0), 1.0, std::sqrt(2.0));
    SaddleOptions opt;
    const auto s = general_saddle_surface(spec, DataFunction::monomial(1.0, 5.0), DataFunction::zero(),
                                          Grid::square(0.3, 9), opt);
    const auto r = io::surface_from_csv(io::surface_csv(s), json::parse(io::surface_meta_json(s).dump()));
    expect_same_surface(s, r);
    ASSERT_TRUE(r.spec.has_value());
    const auto& nf = std::get<NormalForm>(r.spec->variant());
    EXPECT_EQ(nf.f.desc.name, "product");
    EXPECT_NEAR(nf.f(0.3, -0.2), 0.3 - 0.2 - 0.06, 1e-15);
}

TEST(RoundTrip, HamiltonianAndDataDescriptors)
{
    const auto sep = HamiltonianSpec::separated(polynomial({{2, 0, 1.0}, {0, 2, 1.0}}),
                                                polynomial({{2, 0, 1.0}, {1, 1, 0.25}, {0, 2, 2.0}}));
    const auto back = io::hamiltonian_from_json(io::to_json(sep));
    for (const PhasePoint& P : {PhasePoint{0.1, 0.2, 0.3, 0.4}, PhasePoint{-1.0, 0.5, 2.0, -0.7}}) {
        EXPECT_NEAR(back.value(P), sep.value(P), 1e-14);
    }
    const auto tab = DataFunction::table({0.0, 0.25, 0.5, 1.0}, {0.0, 0.01, 0.08, 0.9}, 3.0, Extension::Even);
    const auto t2 = io::data_function_from_json(io::to_json(tab));
    EXPECT_EQ(t2.extension(), Extension::Even);
    for (double s : {-0.7, -0.1, 0.2, 0.6}) {
        EXPECT_NEAR(t2(s), tab(s), 1e-15);
    }
    const auto bump = DataFunction::bump(0.5, 0.4, 0.2, Extension::Odd);
    EXPECT_NEAR(io::data_function_from_json(io::to_json(bump))(0.45), bump(0.45), 1e-15);
}

TEST(Intensity, WorkedValues)
{
    io::IntensityGrid I{1, 4, {1.0, 1.0 / std::sqrt(2.0), 0.5, 0.25}};
    const auto h = io::intensity_to_h(I);
    ASSERT_EQ(h.h.size(), 4u);
    EXPECT_NEAR(h.h[0], 0.0, 1e-15);
    EXPECT_NEAR(h.h[1], 1.0, 1e-14);
    EXPECT_NEAR(h.h[2], 3.0, 1e-14);
    EXPECT_NEAR(h.h[3], 15.0, 1e-13);
    EXPECT_TRUE(h.warnings.empty());
}

TEST(Intensity, NonPositivePixelIsNamed)
{
    io::IntensityGrid I{2, 3, {0.5, 0.5, 0.5, 0.5, 0.0, 0.5}};
    try {
        io::intensity_to_h(I);
        FAIL() << "expected an ingestion error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Ingestion);
        EXPECT_NE(std::string(e.what()).find("row 1, col 1"), std::string::npos) << e.what();
    }
    I.values[4] = -0.2;
    EXPECT_THROW(io::intensity_to_h(I), Error);
    I.values[4] = std::nan("");
    EXPECT_THROW(io::intensity_to_h(I), Error);
}

TEST(Intensity, SuperUnitClippedWithWarning)
{
    const auto h = io::intensity_to_h({1, 3, {1.2, 0.5, 3.0}});
    EXPECT_EQ(h.h[0], 0.0);
    EXPECT_EQ(h.h[2], 0.0);
    EXPECT_NEAR(h.h[1], 3.0, 1e-14);
    ASSERT_EQ(h.warnings.size(), 1u);
    EXPECT_NE(h.warnings[0].find("2 pixels"), std::string::npos);
}

TEST(Intensity, NonNegativeOnRandomInput)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(1e-3, 1.5);
    io::IntensityGrid I{20, 20, {}};
    for (int k = 0; k < 400; ++k) {
        I.values.push_back(u(rng));
    }
    for (double v : io::intensity_to_h(I).h) {
        EXPECT_GE(v, 0.0);
    }
}

TEST(Pgm, PlainTextWithComments)
{
    const std::string pgm = "P2\n# made by hand\n3 2\n# maxval next\n200\n200 100 50\n# mid\n200 200 100\n";
    const auto I = io::read_pgm(pgm);
    ASSERT_EQ(I.rows, 2u);
    ASSERT_EQ(I.cols, 3u);
    EXPECT_DOUBLE_EQ(I.values[1], 0.5);
    EXPECT_DOUBLE_EQ(I.values[2], 0.25);
    const auto h = io::intensity_to_h(I);
    EXPECT_NEAR(h.h[1], 3.0, 1e-14);
    EXPECT_NEAR(h.h[5], 3.0, 1e-14);
    EXPECT_EQ(io::h_csv(h).substr(0, 7), "0,3,15\n");
}

TEST(Pgm, Rejections)
{
    EXPECT_THROW(io::read_pgm("P5\n1 1\n255\n0\n"), Error);
    EXPECT_THROW(io::read_pgm("P2\n2 2\n255\n1 2 3\n"), Error);
    EXPECT_THROW(io::read_pgm("P2\n2 1\n0\n1 2\n"), Error);
    EXPECT_THROW(io::read_pgm("P2\n2 1\n255\n1 x\n"), Error);
}

TEST(IntensityCsv, ReadsRectangularGrid)
{
    const auto I = io::read_intensity_csv("1,0.5\n0.25,1\n");
    ASSERT_EQ(I.rows, 2u);
    ASSERT_EQ(I.cols, 2u);
    EXPECT_EQ(I.values[2], 0.25);
    EXPECT_THROW(io::read_intensity_csv("1,0.5\n0.25\n"), Error);
    EXPECT_THROW(io::read_intensity_csv("1,abc\n"), Error);
    EXPECT_THROW(io::read_intensity_csv(""), Error);
}

TEST(Files, MissingFileIsIoError)
{
    try {
        io::read_text("/nonexistent/dir/file.csv");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Io);
    }
}
