// Command-line front end.
//
// Exit codes: 0 ok, 1 failed check (selftest or verify thresholds), 2 input
// error, 3 non-convergence, 4 regime violation, 5 degenerate nonlocal condition.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "prabhakar/fracops.hpp"
#include "prabhakar/goursat.hpp"
#include "prabhakar/io.hpp"
#include "prabhakar/problem.hpp"
#include "prabhakar/selftest.hpp"
#include "prabhakar/specfun.hpp"

#ifndef PRABHAKAR_FIXTURES
#define PRABHAKAR_FIXTURES "tests/data/oracle_fixtures.json"
#endif

namespace {

using namespace prabhakar;
namespace fs = std::filesystem;

enum Exit { kOk = 0, kCheckFailed = 1, kInput = 2, kNonConvergence = 3, kRegime = 4, kDegenerate = 5 };

std::string g15(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

void print(const std::string& key, double v) { std::cout << key << " = " << g15(v) << "\n"; }

struct SeriesFlags {
    double rel_tol = SeriesPolicy{}.rel_tol;
    int max_terms = SeriesPolicy{}.max_terms_per_index;

    void add(CLI::App* app) {
        app->add_option("--rel-tol", rel_tol, "Relative truncation tolerance")->capture_default_str();
        app->add_option("--max-terms", max_terms, "Terms allowed per summation index")->capture_default_str();
    }
    SeriesPolicy policy() const {
        SeriesPolicy p;
        p.rel_tol = rel_tol;
        p.max_terms_per_index = max_terms;
        p.validate();
        return p;
    }
};

// Flags that override values read from a config file.
struct Overrides {
    std::optional<double> alpha, beta, gamma, delta, a, b, q, p, eps1, eps2, arg_cap;
    std::optional<int> n_t, n_x;
    std::optional<std::string> phi, psi, M, f, mode, u_csv, tau_csv;

    void add(CLI::App* app) {
        app->add_option("--alpha", alpha);
        app->add_option("--beta", beta);
        app->add_option("--gamma", gamma);
        app->add_option("--delta", delta);
        app->add_option("--a", a, "Coefficient of u_x");
        app->add_option("--b", b, "Coefficient of the fractional derivative");
        app->add_option("--q", q, "Extent in t");
        app->add_option("--p", p, "Extent in x");
        app->add_option("--eps1", eps1);
        app->add_option("--eps2", eps2);
        app->add_option("--arg-cap", arg_cap);
        app->add_option("--n-t", n_t, "Nodes in t");
        app->add_option("--n-x", n_x, "Nodes in x");
        app->add_option("--phi", phi, "Boundary data phi(t)");
        app->add_option("--psi", psi, "Nonlocal data psi(x)");
        app->add_option("--M", M, "Weight M(t)");
        app->add_option("--f", f, "Smooth factor of the forcing");
        app->add_option("--mode", mode, "strict or relaxed");
        app->add_option("--u-csv", u_csv, "Output path for u");
        app->add_option("--tau-csv", tau_csv, "Output path for the trace");
    }

    void apply(io::RunConfig& cfg) const {
        ProblemN& pb = cfg.problem;
        auto set = [](const auto& src, auto& dst) {
            if (src) dst = *src;
        };
        set(alpha, pb.params.alpha);
        set(beta, pb.params.beta);
        set(gamma, pb.params.gamma);
        set(delta, pb.params.delta);
        set(a, pb.coeffs.a);
        set(b, pb.coeffs.b);
        set(q, pb.domain.q);
        set(p, pb.domain.p);
        set(eps1, pb.eps1);
        set(eps2, pb.eps2);
        set(arg_cap, cfg.solve.arg_cap);
        set(n_t, cfg.solve.n_t);
        set(n_x, cfg.solve.n_x);
        set(phi, cfg.phi_text);
        set(psi, cfg.psi_text);
        set(M, cfg.M_text);
        set(f, cfg.f_text);
        if (mode) cfg.solve.mode = io::parse_mode(*mode);
        if (u_csv) cfg.output.u_csv = *u_csv;
        if (tau_csv) cfg.output.tau_csv = *tau_csv;
        io::compile_expressions(cfg);
        io::validate_config(cfg);
    }
};

void print_report(const ResidualReport& r, const ResidualThresholds& th = {}) {
    print("residual.boundary", r.boundary);
    print("residual.nonlocal", r.nonlocal);
    print("residual.pde", r.pde);
    std::cout << "residual.status = " << (r.pass(th) ? "pass" : "fail") << "\n";
}

int cmd_ml(double alpha, double beta, double gamma, double z, const SeriesFlags& sf) {
    print("value", ml_prabhakar(alpha, beta, gamma, z, sf.policy()));
    return kOk;
}

int cmd_ml2(const ML2Params& p, bool tele, const PrabhakarParams& pp, double x, double y, const SeriesFlags& sf) {
    const ML2Params params = tele ? ml2_tele(pp) : p;
    const auto [d1, d2] = discriminants2(params);
    print("Delta1", d1);
    print("Delta2", d2);
    print("value", ml2(params, x, y, sf.policy()));
    return kOk;
}

int cmd_ml3(const ML3Params& p, const std::string& variant, const PrabhakarParams& pp, double x, double y, double z,
            const SeriesFlags& sf) {
    const ML3Params params = variant.empty() ? p : ml3_tele_variant(parse_variant(variant), pp);
    const auto d = discriminants3(params);
    print("Delta1", d[0]);
    print("Delta2", d[1]);
    print("Delta3", d[2]);
    print("value", ml3(params, x, y, z, sf.policy()));
    return kOk;
}

int cmd_integral(const PrabhakarParams& pp, const std::string& y, double t, bool derivative, const SeriesFlags& sf) {
    const expr::Expr e = expr::parse(y);
    if (e.depends_on(expr::Var::x)) throw InvalidData("y must depend on t only");
    const QuadPolicy quad;
    double v = 0.0;
    if (derivative) {
        const expr::Expr dy = e.differentiate(expr::Var::t);
        v = caputo_prabhakar_deriv(pp, [&](double s) { return dy(s); }, t, quad, sf.policy());
    } else {
        v = prabhakar_integral(pp, [&](double s) { return e(s); }, t, quad, sf.policy());
    }
    print("value", v);
    return kOk;
}

int cmd_solve(const std::string& path, const Overrides& ov, const std::optional<std::string>& plot) {
    io::RunConfig cfg = io::load_config(path);
    ov.apply(cfg);
    GridSolution sol = solve(cfg.problem, cfg.solve);
    const ResidualReport rep = verify(cfg.problem, sol, cfg.solve.series);
    io::write_atomic(cfg.output.u_csv, io::solution_csv(sol.t, sol.x, sol.u));
    io::write_atomic(cfg.output.tau_csv, io::trace_csv(sol.tau));
    std::optional<fs::path> svg = cfg.output.svg;
    if (plot) svg = fs::path(*plot);
    if (svg) io::write_atomic(*svg, io::solution_svg(sol));

    std::cout << "grid = " << sol.t.size() << " x " << sol.x.size() << "\n";
    print("A", sol.A);
    print("A_system", sol.A_system);
    print("integral_M", sol.integral_M);
    print("compatibility_defect", sol.compatibility_defect);
    print("G0", sol.G0);
    print("volterra_residual", sol.volterra_residual);
    print_report(rep);
    for (const auto& w : sol.warnings) std::cout << "warning: " << w << "\n";
    std::cout << "u_csv = " << cfg.output.u_csv.string() << "\n";
    std::cout << "tau_csv = " << cfg.output.tau_csv.string() << "\n";
    if (svg) std::cout << "svg = " << svg->string() << "\n";
    return kOk;
}

int cmd_verify(const std::string& config, const std::string& csv, const Overrides& ov) {
    io::RunConfig cfg = io::load_config(config);
    ov.apply(cfg);
    const io::GridCsv g = io::load_solution_csv(csv);
    io::check_grid_matches(g, cfg);
    const ResidualReport rep = verify(cfg.problem, g.t, g.x, g.u, cfg.solve.series);
    print_report(rep);
    return rep.pass() ? kOk : kCheckFailed;
}

int cmd_selftest(const std::string& filter, bool regen, const std::string& fixtures, const std::string& work_dir) {
    if (regen) {
        std::cerr << "regenerating oracle fixtures (about a minute)\n";
        selftest::write_fixtures(fixtures, selftest::generate_fixtures(std::cerr));
        std::cout << "fixtures written to " << fixtures << "\n";
        return kOk;
    }
    selftest::Options opt;
    opt.filter = filter;
    opt.log = &std::cerr;
    opt.work_dir = work_dir;
    std::error_code ec;
    opt.cli = fs::read_symlink("/proc/self/exe", ec);
    const auto results = selftest::run(opt);
    if (results.empty()) throw InvalidParams("no check matches filter '" + filter + "'");
    std::cout << selftest::format_table(results);
    return selftest::all_pass(results) ? kOk : kCheckFailed;
}

int report(const std::exception& e, int code) {
    std::cerr << "error: " << e.what() << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Prabhakar telegraph toolkit: special functions, fractional operators and the nonlocal problem"};
    app.require_subcommand(1);
    int code = kOk;

    SeriesFlags sf;
    double alpha = 1, beta = 1, gamma = 1, delta = 0, x = 0, y = 0, z = 0, t = 1;

    CLI::App* ml = app.add_subcommand("ml", "Three-parameter Mittag-Leffler function");
    ml->add_option("--alpha", alpha)->required();
    ml->add_option("--beta", beta)->required();
    ml->add_option("--gamma", gamma)->capture_default_str();
    ml->add_option("--z", z)->required();
    sf.add(ml);

    ML2Params p2;
    bool tele = false;
    CLI::App* ml2c = app.add_subcommand("ml2", "Bivariate series E2");
    for (auto [name, ref] : std::initializer_list<std::pair<const char*, double*>>{
             {"--a1", &p2.a1}, {"--b1", &p2.b1}, {"--g1", &p2.g1}, {"--a2", &p2.a2}, {"--g2", &p2.g2}, {"--a3", &p2.a3},
             {"--b2", &p2.b2}, {"--d1", &p2.d1}, {"--a4", &p2.a4}, {"--d2", &p2.d2}, {"--b3", &p2.b3}, {"--d3", &p2.d3}}) {
        ml2c->add_option(name, *ref)->capture_default_str();
    }
    ml2c->add_flag("--telegraph", tele, "Use the telegraph instance built from --alpha --beta --gamma");
    ml2c->add_option("--alpha", alpha);
    ml2c->add_option("--beta", beta);
    ml2c->add_option("--gamma", gamma);
    ml2c->add_option("--x", x);
    ml2c->add_option("--y", y);
    sf.add(ml2c);

    ML3Params p3;
    std::string variant;
    CLI::App* ml3c = app.add_subcommand("ml3", "Trivariate series F3");
    for (auto [name, ref] : std::initializer_list<std::pair<const char*, double*>>{
             {"--a1", &p3.a1}, {"--b1", &p3.b1}, {"--d1", &p3.d1}, {"--a2", &p3.a2}, {"--g1", &p3.g1},
             {"--d2", &p3.d2}, {"--a3", &p3.a3}, {"--b2", &p3.b2}, {"--d3", &p3.d3}, {"--a4", &p3.a4},
             {"--d4", &p3.d4}, {"--a5", &p3.a5}, {"--d5", &p3.d5}, {"--b3", &p3.b3}, {"--d6", &p3.d6},
             {"--g2", &p3.g2}, {"--d7", &p3.d7}, {"--g3", &p3.g3}, {"--d8", &p3.d8}}) {
        ml3c->add_option(name, *ref)->capture_default_str();
    }
    ml3c->add_option("--variant", variant, "Telegraph variant V1..V4 built from --alpha --beta --gamma");
    ml3c->add_option("--alpha", alpha);
    ml3c->add_option("--beta", beta);
    ml3c->add_option("--gamma", gamma);
    ml3c->add_option("--x", x);
    ml3c->add_option("--y", y);
    ml3c->add_option("--z", z);
    sf.add(ml3c);

    std::string yexpr = "1";
    CLI::App* integ = app.add_subcommand("integral", "Prabhakar integral of y(t) at t");
    CLI::App* deriv = app.add_subcommand("deriv", "Caputo-Prabhakar derivative of y(t) at t");
    for (CLI::App* c : {integ, deriv}) {
        c->add_option("--alpha", alpha)->capture_default_str();
        c->add_option("--beta", beta)->required();
        c->add_option("--gamma", gamma)->capture_default_str();
        c->add_option("--delta", delta)->capture_default_str();
        c->add_option("--t", t)->capture_default_str();
        c->add_option("--y", yexpr, "Expression in t")->capture_default_str();
        sf.add(c);
    }

    std::string config, csv;
    Overrides ov;
    std::optional<std::string> plot;
    CLI::App* solvec = app.add_subcommand("solve", "Solve the nonlocal problem described by a config file");
    solvec->add_option("config", config)->required();
    solvec->add_option("--plot", plot, "Write an SVG of the trace and u(t, .) sections");
    ov.add(solvec);

    CLI::App* verifyc = app.add_subcommand("verify", "Recompute the residuals of a stored solution");
    verifyc->add_option("config", config)->required();
    verifyc->add_option("u_csv", csv)->required();
    ov.add(verifyc);

    std::string filter, fixtures = PRABHAKAR_FIXTURES, work_dir;
    bool regen = false;
    CLI::App* self = app.add_subcommand("selftest", "Run the acceptance checks");
    self->add_option("--filter", filter, "Run only checks whose group or title contains this text");
    self->add_flag("--regen-fixtures", regen, "Recompute the oracle fixtures instead of running checks");
    self->add_option("--fixtures", fixtures, "Fixture file written by --regen-fixtures")->capture_default_str();
    self->add_option("--work-dir", work_dir, "Keep command-line check artefacts here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kInput;
    }

    try {
        if (*ml) code = cmd_ml(alpha, beta, gamma, z, sf);
        if (*ml2c) code = cmd_ml2(p2, tele, {alpha, beta, gamma, 0.0}, x, y, sf);
        if (*ml3c) code = cmd_ml3(p3, variant, {alpha, beta, gamma, 0.0}, x, y, z, sf);
        if (*integ) code = cmd_integral({alpha, beta, gamma, delta}, yexpr, t, false, sf);
        if (*deriv) code = cmd_integral({alpha, beta, gamma, delta}, yexpr, t, true, sf);
        if (*solvec) code = cmd_solve(config, ov, plot);
        if (*verifyc) code = cmd_verify(config, csv, ov);
        if (*self) code = cmd_selftest(filter, regen, fixtures, work_dir);
    } catch (const RegimeViolation& e) {
        return report(e, kRegime);
    } catch (const DegenerateNonlocal& e) {
        return report(e, kDegenerate);
    } catch (const NonConvergence& e) {
        return report(e, kNonConvergence);
    } catch (const QuadratureFailure& e) {
        return report(e, kNonConvergence);
    } catch (const MaxIterExceeded& e) {
        return report(e, kNonConvergence);
    } catch (const SingularStep& e) {
        return report(e, kNonConvergence);
    } catch (const Error& e) {
        return report(e, kInput);
    } catch (const fs::filesystem_error& e) {
        return report(e, kInput);
    } catch (const std::exception& e) {
        return report(e, kInput);
    }
    std::cout.flush();
    return code;
}
