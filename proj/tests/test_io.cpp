#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "prabhakar/io.hpp"

using namespace prabhakar;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({"version": 1})";

std::string with(const std::string& body) { return "{\"version\": 1, " + body + "}"; }

}  // namespace

TEST(Config, DefaultsFillMissingSections) {
    const io::RunConfig cfg = io::parse_config(kMinimal);
    EXPECT_EQ(cfg.problem.params.alpha, 1.0);
    EXPECT_EQ(cfg.problem.params.beta, 0.5);
    EXPECT_EQ(cfg.problem.coeffs.a, -1.0);
    EXPECT_EQ(cfg.problem.domain.q, 1.0);
    EXPECT_EQ(cfg.solve.n_t, 65);
    EXPECT_EQ(cfg.solve.mode, Mode::strict);
    EXPECT_EQ(cfg.output.u_csv, fs::path("u.csv"));
    EXPECT_FALSE(cfg.output.svg.has_value());
    EXPECT_EQ(cfg.problem.M(0.3, 0.0), 1.0);
}

TEST(Config, ReadsEverySection) {
    const io::RunConfig cfg = io::parse_config(
        with(R"js("params": {"alpha": 1, "beta": 0.7, "gamma": 0.7, "delta": -2},
                "coeffs": {"a": -0.5, "b": -2}, "domain": {"q": 2, "p": 0.5},
                "data": {"phi": "1 + t", "psi": "x", "M": "exp(-t)", "f": "t*x", "eps1": 0.2, "eps2": 0.1},
                "grid": {"n_t": 9, "n_x": 5}, "series": {"rel_tol": 1e-12}, "quad": {"n_points": 32},
                "solver": {"mode": "relaxed", "arg_cap": 20},
                "output": {"u_csv": "a/u.csv", "tau_csv": "a/tau.csv", "svg": "a/p.svg"})js"),
        "/base");
    EXPECT_EQ(cfg.problem.params.beta, 0.7);
    EXPECT_EQ(cfg.problem.coeffs.b, -2.0);
    EXPECT_EQ(cfg.problem.domain.p, 0.5);
    EXPECT_EQ(cfg.problem.eps1, 0.2);
    EXPECT_EQ(cfg.solve.n_x, 5);
    EXPECT_EQ(cfg.solve.series.rel_tol, 1e-12);
    EXPECT_EQ(cfg.solve.quad.n_points, 32);
    EXPECT_EQ(cfg.solve.mode, Mode::relaxed);
    EXPECT_EQ(cfg.solve.arg_cap, 20.0);
    EXPECT_EQ(cfg.output.u_csv, fs::path("/base/a/u.csv"));
    ASSERT_TRUE(cfg.output.svg.has_value());
    EXPECT_EQ(*cfg.output.svg, fs::path("/base/a/p.svg"));
    EXPECT_DOUBLE_EQ(cfg.problem.f_smooth(2.0, 3.0), 6.0);
}

TEST(Config, RejectsUnknownKeysAndBadVersions) {
    EXPECT_THROW(io::parse_config(with(R"("extra": 1)")), InvalidData);
    EXPECT_THROW(io::parse_config(with(R"("params": {"alpah": 1})")), InvalidData);
    EXPECT_THROW(io::parse_config(R"({"version": 2})"), InvalidData);
    EXPECT_THROW(io::parse_config(R"({"params": {}})"), InvalidData);
    EXPECT_THROW(io::parse_config("{not json"), InvalidData);
}

TEST(Config, RejectsInvalidValues) {
    EXPECT_THROW(io::parse_config(with(R"("params": {"beta": "half"})")), InvalidData);
    EXPECT_THROW(io::parse_config(with(R"("grid": {"n_t": 2})")), InvalidData);
    EXPECT_THROW(io::parse_config(with(R"("solver": {"mode": "lenient"})")), InvalidData);
    EXPECT_THROW(io::parse_config(with(R"("data": {"phi": "1 +"})")), InvalidData);
    EXPECT_THROW(io::parse_config(with(R"("data": {"phi": "x"})")), InvalidData);
    EXPECT_THROW(io::parse_config(with(R"("domain": {"q": 0})")), InvalidData);
    EXPECT_THROW(io::load_config("/nonexistent/config.json"), InvalidData);
}

TEST(Csv, NumbersRoundTrip) {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
        EXPECT_EQ(std::stod(io::format_number(v)), v);
    }
    EXPECT_EQ(io::format_number(0.5), "0.5");
}

TEST(Csv, SolutionRoundTrip) {
    const std::vector<double> t{0.0, 0.5, 1.0}, x{0.0, 1.0};
    const std::vector<double> u{1.0, 2.0, 1.0 / 3.0, -4.0, 5e-17, 6.0};
    const io::GridCsv g = io::read_solution_csv(io::solution_csv(t, x, u));
    EXPECT_EQ(g.t, t);
    EXPECT_EQ(g.x, x);
    EXPECT_EQ(g.u, u);
}

TEST(Csv, MalformedFilesAreRejected) {
    EXPECT_THROW(io::read_solution_csv(""), InvalidData);
    EXPECT_THROW(io::read_solution_csv("0,0,1\n"), InvalidData);
    EXPECT_THROW(io::read_solution_csv("t,x,u\n"), InvalidData);
    EXPECT_THROW(io::read_solution_csv("t,x,u\n0,0,abc\n"), InvalidData);
    EXPECT_THROW(io::read_solution_csv("t,x,u\n0,0\n"), InvalidData);
    EXPECT_THROW(io::read_solution_csv("t,x,u\n0,0,1\n0,1,1\n1,0,1\n"), InvalidData);
    EXPECT_THROW(io::read_solution_csv("t,x,u\n0,0,1\n0,1,1\n1,0,1\n1,2,1\n"), InvalidData);
}

TEST(Csv, GridMustMatchConfig) {
    io::RunConfig cfg = io::parse_config(with(R"("grid": {"n_t": 3, "n_x": 3})"));
    const std::vector<double> t{0.0, 0.5, 1.0};
    const std::vector<double> u(9, 1.0);
    EXPECT_NO_THROW(io::check_grid_matches(io::read_solution_csv(io::solution_csv(t, t, u)), cfg));
    cfg.solve.n_x = 4;
    EXPECT_THROW(io::check_grid_matches(io::read_solution_csv(io::solution_csv(t, t, u)), cfg), InvalidData);
    cfg.solve.n_x = 3;
    cfg.problem.domain.p = 2.0;
    EXPECT_THROW(io::check_grid_matches(io::read_solution_csv(io::solution_csv(t, t, u)), cfg), InvalidData);
}

TEST(Csv, AtomicWriteReplacesContent) {
    const fs::path dir = fs::temp_directory_path() / ("prabhakar-io-" + std::to_string(::getpid()));
    const fs::path file = dir / "nested" / "out.csv";
    io::write_atomic(file, "first\n");
    io::write_atomic(file, "second\n");
    std::ifstream in(file);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "second");
    std::size_t entries = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(file.parent_path())) ++entries;
    EXPECT_EQ(entries, 1u);
    fs::remove_all(dir);
}

TEST(Svg, ChartIsWellFormed) {
    const std::string svg = io::line_chart_svg({{"tau", {0.0, 0.5, 1.0}, {1.0, 0.8, 0.7}}}, "trace", "x");
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    EXPECT_NE(svg.find("tau"), std::string::npos);
    EXPECT_NE(svg.find("<polyline"), std::string::npos);
}
