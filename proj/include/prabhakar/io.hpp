#pragma once

// Run configuration (versioned JSON), CSV output and input, and SVG plots.
//
// Config schema, version 1 (every key optional unless noted, unknown keys are errors):
//   {
//     "version": 1,                                        required
//     "params":  {"alpha", "beta", "gamma", "delta"},
//     "coeffs":  {"a", "b"},
//     "domain":  {"q", "p"},
//     "data":    {"phi", "psi", "M", "f", "eps1", "eps2"},  expressions in t and x
//     "grid":    {"n_t", "n_x"},
//     "series":  {"rel_tol", "max_terms_per_index", "consecutive_small"},
//     "quad":    {"n_points", "grading", "tol"},
//     "solver":  {"mode": "strict" | "relaxed", "arg_cap", "A_tol"},
//     "output":  {"u_csv", "tau_csv", "svg"}
//   }
// Relative output paths are resolved against the directory of the config file.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <unistd.h>

#include "json.hpp"
#include "prabhakar/errors.hpp"
#include "prabhakar/expr.hpp"
#include "prabhakar/problem.hpp"

namespace prabhakar::io {

inline constexpr int kConfigVersion = 1;

struct OutputPaths {
    std::filesystem::path u_csv = "u.csv";
    std::filesystem::path tau_csv = "tau.csv";
    std::optional<std::filesystem::path> svg;
};

struct RunConfig {
    ProblemN problem;
    SolveOptions solve;
    OutputPaths output;
    // Expression sources as written, kept for reporting.
    std::string phi_text = "1", psi_text = "0", M_text = "1", f_text = "0";
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw InvalidData("config: '" + where + "' must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; })) {
            throw InvalidData("config: unknown key '" + where + "." + it.key() + "'");
        }
    }
}

inline void read_number(const json& obj, const char* key, const std::string& where, double& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number()) throw InvalidData("config: '" + where + "." + key + "' must be a number");
    out = v.get<double>();
}

inline void read_int(const json& obj, const char* key, const std::string& where, int& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) throw InvalidData("config: '" + where + "." + key + "' must be an integer");
    out = v.get<int>();
}

inline void read_string(const json& obj, const char* key, const std::string& where, std::string& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_string()) throw InvalidData("config: '" + where + "." + key + "' must be a string");
    out = v.get<std::string>();
}

inline expr::Expr parse_field(const std::string& text, const char* name) {
    try {
        return expr::Expr::parse(text);
    } catch (const ParseError& e) {
        throw InvalidData(std::string("config: data.") + name + ": " + e.what());
    }
}

}  // namespace detail

inline Mode parse_mode(const std::string& s) {
    if (s == "strict") return Mode::strict;
    if (s == "relaxed") return Mode::relaxed;
    throw InvalidData("mode must be 'strict' or 'relaxed', got '" + s + "'");
}

/// Builds the expression fields of `cfg.problem` from the stored sources.
inline void compile_expressions(RunConfig& cfg) {
    cfg.problem.phi = detail::parse_field(cfg.phi_text, "phi");
    cfg.problem.psi = detail::parse_field(cfg.psi_text, "psi");
    cfg.problem.M = detail::parse_field(cfg.M_text, "M");
    cfg.problem.f_smooth = detail::parse_field(cfg.f_text, "f");
}

/// Invariants checked at load time and again after flag overrides.
inline void validate_config(const RunConfig& cfg) {
    try {
        cfg.problem.validate();
        cfg.solve.series.validate();
        cfg.solve.quad.validate();
    } catch (const Error& e) {
        throw InvalidData(std::string("config: ") + e.what());
    }
    if (cfg.solve.n_t < 3 || cfg.solve.n_x < 3) throw InvalidData("config: grid.n_t and grid.n_x must be >= 3");
    if (!(cfg.solve.arg_cap > 0) || !(cfg.solve.A_tol > 0)) {
        throw InvalidData("config: solver.arg_cap and solver.A_tol must be positive");
    }
}

/// Parses a config document. `base_dir` anchors relative output paths.
inline RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {}) {
    using detail::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidData(std::string("config: malformed JSON: ") + e.what());
    }
    detail::reject_unknown(doc, "<root>",
                           {"version", "params", "coeffs", "domain", "data", "grid", "series", "quad", "solver", "output"});
    if (!doc.contains("version")) throw InvalidData("config: missing 'version'");
    if (!doc["version"].is_number_integer() || doc["version"].get<int>() != kConfigVersion) {
        throw InvalidData("config: unsupported version (expected " + std::to_string(kConfigVersion) + ")");
    }
    RunConfig cfg;
    ProblemN& pb = cfg.problem;
    pb.params = PrabhakarParams{1.0, 0.5, 0.5, -1.0};
    pb.coeffs = TelegraphCoeffs{-1.0, -1.0};
    pb.domain = Domain2D{1.0, 1.0};

    if (doc.contains("params")) {
        const json& o = doc["params"];
        detail::reject_unknown(o, "params", {"alpha", "beta", "gamma", "delta"});
        detail::read_number(o, "alpha", "params", pb.params.alpha);
        detail::read_number(o, "beta", "params", pb.params.beta);
        detail::read_number(o, "gamma", "params", pb.params.gamma);
        detail::read_number(o, "delta", "params", pb.params.delta);
    }
    if (doc.contains("coeffs")) {
        const json& o = doc["coeffs"];
        detail::reject_unknown(o, "coeffs", {"a", "b"});
        detail::read_number(o, "a", "coeffs", pb.coeffs.a);
        detail::read_number(o, "b", "coeffs", pb.coeffs.b);
    }
    if (doc.contains("domain")) {
        const json& o = doc["domain"];
        detail::reject_unknown(o, "domain", {"q", "p"});
        detail::read_number(o, "q", "domain", pb.domain.q);
        detail::read_number(o, "p", "domain", pb.domain.p);
    }
    if (doc.contains("data")) {
        const json& o = doc["data"];
        detail::reject_unknown(o, "data", {"phi", "psi", "M", "f", "eps1", "eps2"});
        detail::read_string(o, "phi", "data", cfg.phi_text);
        detail::read_string(o, "psi", "data", cfg.psi_text);
        detail::read_string(o, "M", "data", cfg.M_text);
        detail::read_string(o, "f", "data", cfg.f_text);
        detail::read_number(o, "eps1", "data", pb.eps1);
        detail::read_number(o, "eps2", "data", pb.eps2);
    }
    if (doc.contains("grid")) {
        const json& o = doc["grid"];
        detail::reject_unknown(o, "grid", {"n_t", "n_x"});
        detail::read_int(o, "n_t", "grid", cfg.solve.n_t);
        detail::read_int(o, "n_x", "grid", cfg.solve.n_x);
    }
    if (doc.contains("series")) {
        const json& o = doc["series"];
        detail::reject_unknown(o, "series", {"rel_tol", "max_terms_per_index", "consecutive_small"});
        detail::read_number(o, "rel_tol", "series", cfg.solve.series.rel_tol);
        detail::read_int(o, "max_terms_per_index", "series", cfg.solve.series.max_terms_per_index);
        detail::read_int(o, "consecutive_small", "series", cfg.solve.series.consecutive_small);
    }
    if (doc.contains("quad")) {
        const json& o = doc["quad"];
        detail::reject_unknown(o, "quad", {"n_points", "grading", "tol"});
        detail::read_int(o, "n_points", "quad", cfg.solve.quad.n_points);
        detail::read_number(o, "grading", "quad", cfg.solve.quad.grading);
        detail::read_number(o, "tol", "quad", cfg.solve.quad.tol);
    }
    if (doc.contains("solver")) {
        const json& o = doc["solver"];
        detail::reject_unknown(o, "solver", {"mode", "arg_cap", "A_tol"});
        std::string mode = "strict";
        detail::read_string(o, "mode", "solver", mode);
        cfg.solve.mode = parse_mode(mode);
        detail::read_number(o, "arg_cap", "solver", cfg.solve.arg_cap);
        detail::read_number(o, "A_tol", "solver", cfg.solve.A_tol);
    }
    if (doc.contains("output")) {
        const json& o = doc["output"];
        detail::reject_unknown(o, "output", {"u_csv", "tau_csv", "svg"});
        std::string u = cfg.output.u_csv.string(), tau = cfg.output.tau_csv.string(), svg;
        detail::read_string(o, "u_csv", "output", u);
        detail::read_string(o, "tau_csv", "output", tau);
        detail::read_string(o, "svg", "output", svg);
        cfg.output.u_csv = u;
        cfg.output.tau_csv = tau;
        if (!svg.empty()) cfg.output.svg = svg;
    }
    auto anchor = [&](std::filesystem::path& p) {
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    };
    anchor(cfg.output.u_csv);
    anchor(cfg.output.tau_csv);
    if (cfg.output.svg) anchor(*cfg.output.svg);

    compile_expressions(cfg);
    validate_config(cfg);
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidData("cannot open config '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Shortest representation that reads back to the same double, independent of the C locale.
inline std::string format_number(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

/// Writes `content` to a temporary sibling and renames it over `path`.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InvalidData("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw InvalidData("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw InvalidData("cannot move output into place at '" + path.string() + "': " + ec.message());
    }
}

inline std::string solution_csv(const std::vector<double>& t, const std::vector<double>& x,
                                const std::vector<double>& u) {
    std::string s = "t,x,u\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
        for (std::size_t l = 0; l < x.size(); ++l) {
            s += format_number(t[i]);
            s += ',';
            s += format_number(x[l]);
            s += ',';
            s += format_number(u[i * x.size() + l]);
            s += '\n';
        }
    }
    return s;
}

inline std::string trace_csv(const TraceSolution& tau) {
    std::string s = "x,tau\n";
    for (std::size_t l = 0; l < tau.x.size(); ++l) {
        s += format_number(tau.x[l]);
        s += ',';
        s += format_number(tau.tau[l]);
        s += '\n';
    }
    return s;
}

struct GridCsv {
    std::vector<double> t, x, u;
};

namespace detail {

inline double parse_cell(std::string_view cell, std::size_t line) {
    double v = 0.0;
    const auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (r.ec != std::errc() || r.ptr != cell.data() + cell.size()) {
        throw InvalidData("csv line " + std::to_string(line) + ": bad number '" + std::string(cell) + "'");
    }
    return v;
}

}  // namespace detail

/// Reads a "t,x,u" file written row-major in t and checks that it forms a full grid.
inline GridCsv read_solution_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw InvalidData("csv: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t,x,u") throw InvalidData("csv: expected header 't,x,u', got '" + line + "'");
    std::vector<std::array<double, 3>> rows;
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::array<double, 3> row{};
        std::string_view rest(line);
        for (int c = 0; c < 3; ++c) {
            const std::size_t comma = rest.find(',');
            if ((c < 2) != (comma != std::string_view::npos)) {
                throw InvalidData("csv line " + std::to_string(number) + ": expected 3 columns");
            }
            row[c] = detail::parse_cell(rest.substr(0, comma), number);
            if (c < 2) rest.remove_prefix(comma + 1);
        }
        rows.push_back(row);
    }
    if (rows.empty()) throw InvalidData("csv: no data rows");
    GridCsv g;
    for (const auto& r : rows) {
        if (r[0] != rows.front()[0]) break;
        g.x.push_back(r[1]);
    }
    const std::size_t nx = g.x.size();
    if (rows.size() % nx != 0) throw InvalidData("csv: row count is not a multiple of the x-grid size");
    const std::size_t nt = rows.size() / nx;
    g.u.resize(rows.size());
    for (std::size_t i = 0; i < nt; ++i) {
        g.t.push_back(rows[i * nx][0]);
        for (std::size_t l = 0; l < nx; ++l) {
            const auto& r = rows[i * nx + l];
            if (r[0] != g.t[i] || r[1] != g.x[l]) {
                throw InvalidData("csv line " + std::to_string(i * nx + l + 2) + ": not a row-major t,x grid");
            }
            g.u[i * nx + l] = r[2];
        }
    }
    return g;
}

inline GridCsv load_solution_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidData("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return read_solution_csv(ss.str());
}

/// Checks that a CSV grid is the uniform grid the config describes.
inline void check_grid_matches(const GridCsv& g, const RunConfig& cfg) {
    const auto nt = static_cast<std::size_t>(cfg.solve.n_t), nx = static_cast<std::size_t>(cfg.solve.n_x);
    if (g.t.size() != nt || g.x.size() != nx) {
        throw InvalidData("csv grid is " + std::to_string(g.t.size()) + "x" + std::to_string(g.x.size()) +
                          " but the config asks for " + std::to_string(nt) + "x" + std::to_string(nx));
    }
    const double q = cfg.problem.domain.q, p = cfg.problem.domain.p;
    for (std::size_t i = 0; i < nt; ++i) {
        if (std::abs(g.t[i] - q * static_cast<double>(i) / (nt - 1)) > 1e-12 * q) {
            throw InvalidData("csv t-grid does not match the config domain");
        }
    }
    for (std::size_t l = 0; l < nx; ++l) {
        if (std::abs(g.x[l] - p * static_cast<double>(l) / (nx - 1)) > 1e-12 * p) {
            throw InvalidData("csv x-grid does not match the config domain");
        }
    }
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

struct Series {
    std::string label;
    std::vector<double> x, y;
};

/// Static line chart with axes, tick labels and a legend.
inline std::string line_chart_svg(const std::vector<Series>& series, const std::string& title,
                                  const std::string& x_label) {
    const double W = 720, H = 440, left = 70, right = 170, top = 40, bottom = 50;
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& s : series) {
        for (double v : s.x) xmin = std::min(xmin, v), xmax = std::max(xmax, v);
        for (double v : s.y) ymin = std::min(ymin, v), ymax = std::max(ymax, v);
    }
    if (!(xmax > xmin)) xmax = xmin + 1;
    if (!(ymax > ymin)) {
        ymin -= 0.5;
        ymax += 0.5;
    }
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    const double pw = W - left - right, ph = H - top - bottom;
    auto X = [&](double v) { return left + (v - xmin) / (xmax - xmin) * pw; };
    auto Y = [&](double v) { return top + (ymax - v) / (ymax - ymin) * ph; };
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4g", v);
        return std::string(buf);
    };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
    o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 5; ++k) {
        const double xv = xmin + (xmax - xmin) * k / 5, yv = ymin + (ymax - ymin) * k / 5;
        o << "<line x1=\"" << X(xv) << "\" y1=\"" << top + ph << "\" x2=\"" << X(xv) << "\" y2=\"" << top + ph + 5
          << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << X(xv) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << num(xv)
          << "</text>\n";
        o << "<line x1=\"" << left - 5 << "\" y1=\"" << Y(yv) << "\" x2=\"" << left << "\" y2=\"" << Y(yv)
          << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << left - 8 << "\" y=\"" << Y(yv) + 4 << "\" text-anchor=\"end\">" << num(yv) << "</text>\n";
    }
    o << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">" << x_label
      << "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* c = colors[s % (sizeof colors / sizeof *colors)];
        o << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t k = 0; k < series[s].x.size(); ++k) {
            o << X(series[s].x[k]) << ',' << Y(series[s].y[k]) << ' ';
        }
        o << "\"/>\n";
        const double ly = top + 14 + 18.0 * static_cast<double>(s);
        o << "<line x1=\"" << W - right + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - right + 36 << "\" y2=\""
          << ly - 4 << "\" stroke=\"" << c << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << W - right + 42 << "\" y=\"" << ly << "\">" << series[s].label << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

/// tau(x) together with u(t, .) at a few time levels.
inline std::string solution_svg(const GridSolution& sol) {
    std::vector<Series> series;
    series.push_back({"tau(x)", sol.tau.x, sol.tau.tau});
    const std::size_t nt = sol.t.size(), nx = sol.x.size();
    for (std::size_t i : {nt / 4, nt / 2, nt - 1}) {
        if (i == 0) continue;
        Series s;
        s.label = "u(" + format_number(std::round(sol.t[i] * 1e4) / 1e4) + ", x)";
        s.x = sol.x;
        for (std::size_t l = 0; l < nx; ++l) s.y.push_back(sol.at(i, l));
        series.push_back(std::move(s));
    }
    return line_chart_svg(series, "Trace and solution sections", "x");
}

}  // namespace prabhakar::io
