#pragma once

// Acceptance suite and oracle fixture generation.
//
// run() executes the numbered checks and returns one result per check; the
// CLI prints them as a table and the acceptance test binary prints one line
// each. generate_fixtures() recomputes every reference value with the
// multiprecision oracle; the output is what tests/data/oracle_fixtures.json holds.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iterator>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "json.hpp"
#include "prabhakar/errors.hpp"
#include "prabhakar/fracops.hpp"
#include "prabhakar/goursat.hpp"
#include "prabhakar/io.hpp"
#include "prabhakar/oracle.hpp"
#include "prabhakar/problem.hpp"
#include "prabhakar/specfun.hpp"
#include "prabhakar/volterra.hpp"

namespace prabhakar::selftest {

inline constexpr int kFixtureVersion = 1;
inline constexpr const char* kFixtureCommand = "prabhakar selftest --regen-fixtures";

// ---------------------------------------------------------------------------
// Shared test problems
// ---------------------------------------------------------------------------

inline ProblemN make_problem(const PrabhakarParams& pp, const TelegraphCoeffs& c, const Domain2D& d,
                             const std::string& phi, const std::string& psi, const std::string& M,
                             const std::string& f) {
    ProblemN pb;
    pb.params = pp;
    pb.coeffs = c;
    pb.domain = d;
    pb.phi = expr::parse(phi);
    pb.psi = expr::parse(psi);
    pb.M = expr::parse(M);
    pb.f_smooth = expr::parse(f);
    return pb;
}

/// phi = 1, M = 1, f = 0, psi = 1 - q: the solution is u = 1.
inline ProblemN constant_problem() {
    return make_problem({1.0, 0.5, 0.5, -1.0}, {-1.0, -1.0}, {1.0, 1.0}, "1", "0", "1", "0");
}

/// Smooth strict-regime data with phi(0) = G(0).
inline ProblemN smooth_problem() {
    return make_problem({1.0, 0.5, 0.5, -1.0}, {-1.0, -1.0}, {1.0, 1.0}, "1 + t", "-0.5 + x^2", "1", "cos(x) + t");
}

/// Trace equation tau - int_0^x e^{-(x - xi)} tau(xi) dxi = G with exact solution 1 + x^2 on [0, 1].
inline VolterraSystem manufactured_system(int n) {
    return convolution_system(
        1.0, [](double r) { return std::exp(-r); },
        [](double x) { return (1.0 + x * x) - (x * x - 2.0 * x + 3.0 - 3.0 * std::exp(-x)); }, 1.0, n);
}

inline double manufactured_error(const VolterraSolution& s) {
    double err = 0.0;
    for (std::size_t l = 0; l < s.trace.x.size(); ++l) {
        const double x = s.trace.x[l];
        err = std::max(err, std::abs(s.trace.tau[l] - (1.0 + x * x)));
    }
    return err;
}

// ---------------------------------------------------------------------------
// Deterministic sample sets for the oracle comparison
// ---------------------------------------------------------------------------

struct Sample2 {
    ML2Params p;
    double x = 0, y = 0;
};

struct Sample3 {
    ML3Params p;
    double x = 0, y = 0, z = 0;
};

namespace detail {

class Draw {
public:
    explicit Draw(std::uint64_t seed) : rng_(seed) {}
    double operator()(double lo, double hi) { return lo + (hi - lo) * std::generate_canonical<double, 53>(rng_); }

private:
    std::mt19937_64 rng_;
};

// Parameters drawn where both series converge in a few hundred terms for
// arguments in [-3, 1]; smaller beta makes 3^m / Gamma(beta m) decay too slowly.
inline PrabhakarParams draw_params(Draw& u) { return {u(0.5, 1.5), u(0.5, 0.95), u(0.3, 1.2), 0.0}; }

}  // namespace detail

/// 100 argument pairs: 80 on bivariate telegraph instances, 20 on generic parameter sets.
inline std::vector<Sample2> ml2_samples() {
    detail::Draw u(0x5eed0002);
    std::vector<Sample2> out;
    for (int s = 0; s < 80; ++s) {
        Sample2 r;
        r.p = ml2_tele(detail::draw_params(u));
        r.x = u(-3, 1);
        r.y = u(-3, 1);
        out.push_back(r);
    }
    for (int s = 0; s < 20; ++s) {
        Sample2 r;
        ML2Params& p = r.p;
        p.a1 = u(0.3, 0.8), p.b1 = u(0.5, 1.0), p.g1 = u(0.5, 2.0);
        p.a2 = u(0.1, 0.4), p.g2 = u(0.5, 2.0);
        p.a3 = u(0.8, 1.5), p.b2 = u(0.8, 1.5), p.d1 = u(0.5, 2.0);
        p.a4 = u(0.6, 1.2), p.d2 = u(0.5, 2.0);
        p.b3 = u(0.6, 1.2), p.d3 = u(0.5, 2.0);
        r.x = u(-3, 1);
        r.y = u(-3, 1);
        out.push_back(r);
    }
    return out;
}

/// 100 argument triples on the four trivariate telegraph variants.
inline std::vector<Sample3> ml3_samples() {
    detail::Draw u(0x5eed0003);
    std::vector<Sample3> out;
    for (int s = 0; s < 100; ++s) {
        Sample3 r;
        r.p = ml3_tele_variant(static_cast<Variant>(s % 4), detail::draw_params(u));
        r.x = u(-3, 1);
        r.y = u(-3, 1);
        r.z = u(-3, 1);
        out.push_back(r);
    }
    return out;
}

inline std::vector<double> to_vector(const ML2Params& p) {
    return {p.a1, p.b1, p.g1, p.a2, p.g2, p.a3, p.b2, p.d1, p.a4, p.d2, p.b3, p.d3};
}

inline std::vector<double> to_vector(const ML3Params& p) {
    return {p.a1, p.b1, p.d1, p.a2, p.g1, p.d2, p.a3, p.b2, p.d3, p.a4,
            p.d4, p.a5, p.d5, p.b3, p.d6, p.g2, p.d7, p.g3, p.d8};
}

inline ML2Params ml2_from_vector(const std::vector<double>& v) {
    if (v.size() != 12) throw InvalidData("E2 parameter vector needs 12 entries");
    ML2Params p;
    p.a1 = v[0], p.b1 = v[1], p.g1 = v[2], p.a2 = v[3], p.g2 = v[4], p.a3 = v[5];
    p.b2 = v[6], p.d1 = v[7], p.a4 = v[8], p.d2 = v[9], p.b3 = v[10], p.d3 = v[11];
    return p;
}

inline ML3Params ml3_from_vector(const std::vector<double>& v) {
    if (v.size() != 19) throw InvalidData("F3 parameter vector needs 19 entries");
    ML3Params p;
    p.a1 = v[0], p.b1 = v[1], p.d1 = v[2], p.a2 = v[3], p.g1 = v[4], p.d2 = v[5], p.a3 = v[6];
    p.b2 = v[7], p.d3 = v[8], p.a4 = v[9], p.d4 = v[10], p.a5 = v[11], p.d5 = v[12], p.b3 = v[13];
    p.d6 = v[14], p.g2 = v[15], p.d7 = v[16], p.g3 = v[17], p.d8 = v[18];
    return p;
}

// ---------------------------------------------------------------------------
// Fixtures
// ---------------------------------------------------------------------------

namespace detail {

template <class T>
std::string digits(const T& v) {
    return v.str(30, std::ios_base::scientific);
}

inline double as_double(const nlohmann::json& v) {
    return v.is_string() ? std::stod(v.get<std::string>()) : v.get<double>();
}

}  // namespace detail

/// Every oracle reference value used by the tests. Takes about a minute.
inline nlohmann::json generate_fixtures(std::ostream& log) {
    using nlohmann::json;
    using oracle::BigReal;
    json doc;
    doc["version"] = kFixtureVersion;
    doc["command"] = kFixtureCommand;
    doc["digits"] = 60;
    json& named = doc["constants"];

    {
        const PrabhakarParams pp{1.0, 0.5, 0.5, -1.0};
        const double t = 0.5, a = -1.0;
        const double x = a * std::pow(t, pp.beta), y = pp.delta * std::pow(t, pp.alpha);
        named["ml2_telegraph"] = {{"params", to_vector(ml2_tele(pp))}, {"x", x}, {"y", y},
                                  {"value", detail::digits(oracle::hp_ml2(ml2_tele(pp), x, y))}};
        const double x3 = -1.0 * std::pow(0.5, pp.beta), y3 = -1.0 * 0.25, z3 = pp.delta * 0.5;
        const ML3Params p3 = ml3_tele_variant(Variant::V1, pp);
        named["ml3_v1"] = {{"params", to_vector(p3)}, {"x", x3}, {"y", y3}, {"z", z3},
                           {"value", detail::digits(oracle::hp_ml3(p3, x3, y3, z3))}};
        log << "  named series values done\n";
    }
    {
        // int_0^t s^{b-1} E^g_{a,b}(d s^a) ds by quadrature, and the closed form t^b E^g_{a,b+1}(d t^a).
        json list = json::array();
        const std::vector<std::array<double, 5>> cases = {
            {1.0, 0.5, 0.5, -1.0, 0.5}, {0.8, 0.6, 1.3, -0.9, 0.7}, {1.5, 1.2, 0.7, 0.4, 1.1}};
        for (const auto& c : cases) {
            const double al = c[0], be = c[1], ga = c[2], de = c[3], t = c[4];
            const BigReal quad = oracle::adaptive_quad<60>(
                [&](double s) { return oracle::hp_ml_prabhakar<60>(al, be, ga, de * std::pow(s, al)).convert_to<double>(); },
                0.0, t, be - 1.0, 1e-16);
            const BigReal closed =
                pow(BigReal(t), BigReal(be)) * oracle::hp_ml_prabhakar<60>(al, be + 1.0, ga, de * std::pow(t, al));
            list.push_back({{"alpha", al}, {"beta", be}, {"gamma", ga}, {"delta", de}, {"t", t},
                            {"quadrature", detail::digits(quad)}, {"value", detail::digits(closed)}});
        }
        named["prabhakar_integral_of_one"] = list;
        log << "  Prabhakar integrals done\n";
    }
    {
        // A for (alpha, beta, gamma, delta, a) = (1, 0.5, 0.5, -1, -1), M = 1, q = 1, with t = s^2.
        oracle::HpMl2<60> e2(ml2_tele({1.0, 0.5, 0.5, -1.0}));
        const double gg = std::tgamma(0.5);
        const BigReal A = oracle::adaptive_quad<60>(
            [&](double s) {
                const double inner = 1.0 + gg * s * e2(-s, -s * s).convert_to<double>();
                return 2.0 * s * inner;
            },
            0.0, 1.0, 0.0, 1e-15);
        named["compute_A"] = {{"alpha", 1.0}, {"beta", 0.5}, {"gamma", 0.5}, {"delta", -1.0}, {"a", -1.0},
                              {"M", "1"}, {"q", 1.0}, {"value", detail::digits(A)}};
        log << "  A done\n";
    }
    {
        // M1(0, 0.5) = int_0^1 t^b F_V2(a t^b, b 0.5, d t) dt with the same parameters and b = -1.
        oracle::HpMl3<60> v2(ml3_tele_variant(Variant::V2, {1.0, 0.5, 0.5, -1.0}));
        const BigReal M1 = oracle::adaptive_quad<60>(
            [&](double s) { return 2.0 * s * s * v2(-s, -0.5, -s * s).convert_to<double>(); }, 0.0, 1.0, 0.0, 1e-15);
        named["kernel_M1"] = {{"alpha", 1.0}, {"beta", 0.5}, {"gamma", 0.5}, {"delta", -1.0}, {"a", -1.0},
                              {"b", -1.0}, {"M", "1"}, {"q", 1.0}, {"xi", 0.0}, {"x", 0.5},
                              {"value", detail::digits(M1)}};
        log << "  M1 done\n";
    }
    {
        const BigReal integral = oracle::adaptive_quad<60>(
            [](double t) { return std::exp(-t) * (1.0 + t); }, 0.0, 1.0, 0.0, 1e-16);
        named["compatibility_defect"] = {{"phi", "1 + t"}, {"M", "exp(-t)"}, {"psi", "0.3 + x"}, {"q", 1.0},
                                         {"value", detail::digits(abs(BigReal(1) - integral - BigReal(0.3)))}};
    }

    json s2 = json::array();
    for (const Sample2& s : ml2_samples()) {
        s2.push_back({{"params", to_vector(s.p)}, {"x", s.x}, {"y", s.y},
                      {"value", detail::digits(oracle::hp_ml2(s.p, s.x, s.y))}});
    }
    doc["ml2_samples"] = s2;
    log << "  " << s2.size() << " bivariate samples done\n";
    json s3 = json::array();
    for (const Sample3& s : ml3_samples()) {
        s3.push_back({{"params", to_vector(s.p)}, {"x", s.x}, {"y", s.y}, {"z", s.z},
                      {"value", detail::digits(oracle::hp_ml3(s.p, s.x, s.y, s.z))}});
    }
    doc["ml3_samples"] = s3;
    log << "  " << s3.size() << " trivariate samples done\n";
    return doc;
}

inline void write_fixtures(const std::filesystem::path& path, const nlohmann::json& doc) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    io::write_atomic(path, doc.dump(2) + "\n");
}

inline nlohmann::json load_fixtures(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidData("cannot open fixtures file " + path.string());
    nlohmann::json doc = nlohmann::json::parse(in);
    if (doc.value("version", 0) != kFixtureVersion) throw InvalidData("fixtures file has an unsupported version");
    return doc;
}

inline double fixture_value(const nlohmann::json& entry) { return detail::as_double(entry.at("value")); }

// ---------------------------------------------------------------------------
// Checks
// ---------------------------------------------------------------------------

struct CheckResult {
    int id = 0;
    std::string group;
    std::string title;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct Options {
    std::string filter;                    // substring of group or title; empty runs everything
    std::filesystem::path cli;             // CLI executable for the command-line contract
    std::filesystem::path work_dir;        // scratch space; a temporary directory when empty
    std::ostream* log = nullptr;           // progress messages
};

namespace detail {

inline CheckResult make_result(int id, const std::string& group, const std::string& title) {
    CheckResult r;
    r.id = id;
    r.group = group;
    r.title = title;
    return r;
}

inline std::string sci(double v) {
    std::ostringstream os;
    os << std::setprecision(3) << std::scientific << v;
    return os.str();
}

inline double rel_err(double v, double ref) { return std::abs(v - ref) / std::abs(ref); }

// --- 1 -------------------------------------------------------------------
inline CheckResult special_reductions() {
    CheckResult r = make_result(1, "specfun", "special-function reductions");
    double e_exp = 0.0, e_cosh = 0.0, e_zero = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double z = -20.0 + 25.0 * i / 49.0;
        e_exp = std::max(e_exp, rel_err(ml_prabhakar(1, 1, 1, z), std::exp(z)));
        const double ref = z >= 0 ? std::cosh(std::sqrt(z)) : std::cos(std::sqrt(-z));
        e_cosh = std::max(e_cosh, rel_err(ml_prabhakar(2, 1, 1, z), ref));
    }
    Draw u(0x5eed0001);
    for (int i = 0; i < 100; ++i) {
        const double al = u(0.1, 3.0), be = u(0.1, 5.0), ga = u(-2.0, 3.0);
        e_zero = std::max(e_zero, std::abs(ml_prabhakar(al, be, ga, 0.0) * std::tgamma(be) - 1.0));
    }
    r.pass = e_exp <= 1e-10 && e_cosh <= 1e-10 && e_zero <= 1e-12;
    r.detail = "exp " + sci(e_exp) + ", cosh " + sci(e_cosh) + " (tol 1e-10); E(0)Gamma(b) " + sci(e_zero) +
               " (tol 1e-12)";
    return r;
}

// --- 2 -------------------------------------------------------------------
inline CheckResult oracle_equivalence() {
    CheckResult r = make_result(2, "oracle", "bivariate and trivariate series vs oracle");
    const auto start = std::chrono::steady_clock::now();
    double e2 = 0.0, e3 = 0.0;
    std::size_t n = 0;
    for (const Sample2& s : ml2_samples()) {
        e2 = std::max(e2, rel_err(ml2(s.p, s.x, s.y), oracle::hp_ml2(s.p, s.x, s.y).convert_to<double>()));
        ++n;
    }
    for (const Sample3& s : ml3_samples()) {
        e3 = std::max(e3, rel_err(ml3(s.p, s.x, s.y, s.z), oracle::hp_ml3(s.p, s.x, s.y, s.z).convert_to<double>()));
        ++n;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.pass = n >= 200 && e2 <= 1e-9 && e3 <= 1e-9 && secs < 120.0;
    r.detail = std::to_string(n) + " samples, max rel E2 " + sci(e2) + ", F3 " + sci(e3) + " (tol 1e-9), " +
               sci(secs) + " s (budget 120 s)";
    return r;
}

// --- 3 -------------------------------------------------------------------
inline CheckResult integral_identity() {
    CheckResult r = make_result(3, "fracops", "Prabhakar integral identity");
    Draw u(0x5eed0004);
    double e_int = 0.0, e_const = 0.0;
    const QuadPolicy quad;
    for (int i = 0; i < 20; ++i) {
        const PrabhakarParams pp{u(0.5, 2.0), u(0.2, 1.5), u(0.2, 2.0), u(-2.0, 0.5)};
        const double t = u(0.1, 1.5);
        const double I = prabhakar_integral(pp, [](double) { return 1.0; }, t, quad);
        const double ref = std::pow(t, pp.beta) * ml_prabhakar(pp.alpha, pp.beta + 1.0, pp.gamma, pp.delta * std::pow(t, pp.alpha));
        e_int = std::max(e_int, std::abs(I - ref));
        const PrabhakarParams pd{pp.alpha, u(0.1, 0.9), pp.gamma, pp.delta};
        e_const = std::max(e_const, std::abs(caputo_prabhakar_deriv_fd(pd, [](double) { return 2.5; }, t, quad)));
        const std::vector<double> samples(33, 2.5);
        for (double v : caputo_prabhakar_deriv_sampled(pd, samples, t / 32.0)) e_const = std::max(e_const, std::abs(v));
    }
    r.pass = e_int <= 1e-7 && e_const <= 1e-10;
    r.detail = "integral of 1 " + sci(e_int) + " (tol 1e-7), derivative of a constant " + sci(e_const) +
               " (tol 1e-10)";
    return r;
}

// --- 4 -------------------------------------------------------------------
inline CheckResult quadrature_order() {
    CheckResult r = make_result(4, "volterra", "Nystrom convergence order");
    double err[3];
    const int ns[3] = {64, 128, 256};
    for (int k = 0; k < 3; ++k) err[k] = manufactured_error(solve_tau(manufactured_system(ns[k])));
    const double r1 = err[0] / err[1], r2 = err[1] / err[2];
    r.pass = r1 >= 3.5 && r1 <= 4.5 && r2 >= 3.5 && r2 <= 4.5 && err[2] <= 1e-5;
    std::ostringstream os;
    os << std::setprecision(4) << "ratios " << r1 << ", " << r2 << " (in [3.5, 4.5]); error at n=256 " << sci(err[2])
       << " (tol 1e-5)";
    r.detail = os.str();
    return r;
}

// --- 5 -------------------------------------------------------------------
inline CheckResult constant_solution(GridSolution& sol) {
    CheckResult r = make_result(5, "problem", "constant solution end to end");
    const auto start = std::chrono::steady_clock::now();
    sol = solve(constant_problem());
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    double err = 0.0;
    for (double v : sol.u) err = std::max(err, std::abs(v - 1.0));
    r.pass = sol.t.size() == 65 && sol.x.size() == 65 && err <= 1e-3 && secs < 180.0;
    r.detail = "65x65 max |u - 1| " + sci(err) + " (tol 1e-3), " + sci(secs) + " s (budget 180 s)";
    return r;
}

// --- 6 -------------------------------------------------------------------
inline CheckResult residuals(const GridSolution& constant, GridSolution& smooth) {
    CheckResult r = make_result(6, "problem", "boundary, nonlocal and PDE residuals");
    smooth = solve(smooth_problem());
    const ResidualReport rc = verify(constant_problem(), constant);
    const ResidualReport rs = verify(smooth_problem(), smooth);
    r.pass = rc.pass() && rs.pass();
    r.detail = "constant (" + sci(rc.boundary) + ", " + sci(rc.nonlocal) + ", " + sci(rc.pde) + "), smooth (" +
               sci(rs.boundary) + ", " + sci(rs.nonlocal) + ", " + sci(rs.pde) + "); tol (1e-3, 1e-3, 5e-2)";
    return r;
}

// --- 7 -------------------------------------------------------------------
inline CheckResult positivity_and_bound(const std::vector<const GridSolution*>& solved) {
    CheckResult r = make_result(7, "volterra", "E2 positivity and the A bound");
    double min_e2 = HUGE_VAL;
    int samples = 0;
    for (int k = 1; k <= 9; ++k) {
        const double be = 0.1 * k;
        for (const auto& [a, de] : {std::pair{-1.0, -1.0}, std::pair{-0.5, -2.0}, std::pair{-1.0, -0.25}}) {
            Ml2Series e2(ml2_tele({1.0, be, be, de}));
            for (int i = 1; i <= 50; ++i) {
                const double t = i / 50.0;
                min_e2 = std::min(min_e2, e2(a * std::pow(t, be), de * t, SeriesPolicy{}));
                ++samples;
            }
        }
    }
    // A against int M dt for non-negative weights in the strict regime.
    double min_gap = HUGE_VAL;
    int bounds = 0;
    const std::vector<std::pair<std::string, RealFn>> weights = {
        {"1", [](double) { return 1.0; }},
        {"t", [](double t) { return t; }},
        {"exp(-t)", [](double t) { return std::exp(-t); }},
        {"1 + sin(3t)", [](double t) { return 1.0 + std::sin(3.0 * t); }}};
    for (double be : {0.3, 0.5, 0.8}) {
        for (double a : {-1.0, -0.5}) {
            for (const auto& w : weights) {
                const double A = compute_A({1.0, be, be, -1.0}, {a, -1.0}, w.second, 1.0);
                min_gap = std::min(min_gap, A - smooth_integral(w.second, 0.0, 1.0));
                ++bounds;
            }
        }
    }
    for (const GridSolution* s : solved) {
        min_gap = std::min(min_gap, s->A - s->integral_M);
        ++bounds;
    }
    r.pass = min_e2 > 0.0 && min_gap > -1e-8;
    r.detail = std::to_string(samples) + " samples, min E2 " + sci(min_e2) + " (> 0); " + std::to_string(bounds) +
               " weights, min A - int M " + sci(min_gap) + " (> -1e-8)";
    return r;
}

// --- 8 -------------------------------------------------------------------
inline CheckResult classical_limit() {
    CheckResult r = make_result(8, "goursat", "classical limit vs finite differences");
    const PrabhakarParams pp{1.0, 0.999, 0.999, 0.0};
    const TelegraphCoeffs c{-1.0, -1.0};
    const Domain2D d{1.0, 1.0};
    const RealFn tau = [](double x) { return 1.0 + 0.5 * x * x; };
    const RealFn phi = [](double t) { return 1.0 + 0.5 * t + std::sin(t) / 3.0; };
    Forcing f;
    f.smooth = [](double t, double x) { return std::cos(x) + t; };
    const GoursatGridResult g = goursat_grid(pp, c, d, tau, phi, f, 65, 65);
    const oracle::FdGrid fd = oracle::classical_telegraph_fd(
        c.a, c.b, d.q, d.p, phi, tau, [&](double t, double x) { return f(t, x); }, 65);
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < 65; ++i) {
        for (std::size_t l = 0; l < 65; ++l) {
            diff = std::max(diff, std::abs(g.u[i * 65 + l] - fd.at(i, l)));
            scale = std::max(scale, std::abs(fd.at(i, l)));
        }
    }
    r.pass = diff / scale <= 0.02;
    r.detail = "beta = 0.999, delta = 0, 65x65: max relative difference " + sci(diff / scale) + " (tol 2e-2)";
    return r;
}

// --- 9 -------------------------------------------------------------------
inline CheckResult solver_cross_check(const std::vector<const GridSolution*>& solved) {
    CheckResult r = make_result(9, "volterra", "forward substitution vs Picard iteration");
    std::vector<VolterraSystem> systems;
    for (const GridSolution* s : solved) systems.push_back(s->system);
    for (int n : {64, 128, 256}) systems.push_back(manufactured_system(n));
    double worst = 0.0;
    for (const VolterraSystem& sys : systems) {
        const VolterraSolution a = solve_tau(sys), b = picard_solve(sys);
        for (std::size_t l = 0; l < a.trace.tau.size(); ++l) {
            worst = std::max(worst, std::abs(a.trace.tau[l] - b.trace.tau[l]));
        }
    }
    r.pass = worst <= 1e-8;
    r.detail = std::to_string(systems.size()) + " systems, max difference " + sci(worst) + " (tol 1e-8)";
    return r;
}

// --- 10 ------------------------------------------------------------------

struct CliRun {
    int code = -1;
    std::string out, err;
};

inline std::string quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline CliRun run_cli(const std::filesystem::path& cli, const std::vector<std::string>& args,
                      const std::filesystem::path& dir) {
    std::string cmd = quote(cli.string());
    for (const auto& a : args) cmd += " " + quote(a);
    const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
    cmd += " > " + quote(out.string()) + " 2> " + quote(err.string());
    const int status = std::system(cmd.c_str());
    CliRun r;
    r.code = (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

/// Lines of a CLI report that describe the residuals.
inline std::string residual_lines(const std::string& text) {
    std::istringstream in(text);
    std::string line, out;
    while (std::getline(in, line)) {
        if (line.rfind("residual", 0) == 0) out += line + "\n";
    }
    return out;
}

inline void write_text(const std::filesystem::path& p, const std::string& s) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << s;
}

inline std::string config_text(const std::string& data, const std::string& extra = "") {
    return "{\"version\": 1, \"params\": {\"alpha\": 1, \"beta\": 0.5, \"gamma\": 0.5, \"delta\": -1},"
           " \"coeffs\": {\"a\": -1, \"b\": -1}, \"domain\": {\"q\": 1, \"p\": 1}, \"data\": " +
           data + ", \"grid\": {\"n_t\": 17, \"n_x\": 17}" + extra + "}\n";
}

inline CheckResult cli_contract(const Options& opt) {
    CheckResult r = make_result(10, "cli", "command-line contract");
    if (opt.cli.empty() || !std::filesystem::exists(opt.cli)) {
        r.detail = "CLI executable not available";
        return r;
    }
    namespace fs = std::filesystem;
    const fs::path root = opt.work_dir.empty()
                              ? fs::temp_directory_path() / ("prabhakar-selftest-" + std::to_string(::getpid()))
                              : opt.work_dir;
    fs::create_directories(root);
    std::vector<std::string> failures;
    auto expect = [&](bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    };

    const std::string constant = config_text(R"({"phi": "1", "psi": "0", "M": "1", "f": "0"})");
    write_text(root / "run1" / "config.json", constant);
    write_text(root / "run2" / "config.json", constant);
    const CliRun s1 = run_cli(opt.cli, {"solve", (root / "run1" / "config.json").string()}, root);
    const CliRun s2 = run_cli(opt.cli, {"solve", (root / "run2" / "config.json").string()}, root);
    expect(s1.code == 0 && s2.code == 0, "solve exit codes " + std::to_string(s1.code) + ", " + std::to_string(s2.code));
    const std::string u1 = slurp(root / "run1" / "u.csv"), u2 = slurp(root / "run2" / "u.csv");
    expect(!u1.empty() && u1 == u2, "u.csv differs between identical runs");
    expect(slurp(root / "run1" / "tau.csv") == slurp(root / "run2" / "tau.csv"), "tau.csv differs between runs");

    const CliRun v = run_cli(opt.cli, {"verify", (root / "run1" / "config.json").string(), (root / "run1" / "u.csv").string()}, root);
    expect(v.code == 0, "verify exit code " + std::to_string(v.code));
    expect(!residual_lines(s1.out).empty() && residual_lines(s1.out) == residual_lines(v.out),
           "verify report differs from solve report");

    // One corrupted cell.
    {
        std::string bad = u1;
        const std::size_t pos = bad.find('\n', bad.size() / 2);
        const std::size_t end = bad.find('\n', pos + 1);
        const std::string line = bad.substr(pos + 1, end - pos - 1);
        const std::size_t comma = line.rfind(',');
        const double value = std::stod(line.substr(comma + 1)) + 0.1;
        bad.replace(pos + 1, end - pos - 1, line.substr(0, comma + 1) + io::format_number(value));
        write_text(root / "run1" / "corrupt.csv", bad);
        const CliRun c = run_cli(opt.cli, {"verify", (root / "run1" / "config.json").string(), (root / "run1" / "corrupt.csv").string()}, root);
        expect(c.code != 0, "verify accepted a corrupted solution");
        write_text(root / "run1" / "headless.csv", u1.substr(u1.find('\n') + 1));
        const CliRun h = run_cli(opt.cli, {"verify", (root / "run1" / "config.json").string(), (root / "run1" / "headless.csv").string()}, root);
        expect(h.code == 2, "missing CSV header gave exit " + std::to_string(h.code));
    }

    // Crafted bad inputs.
    write_text(root / "bad" / "unknown.json", config_text(R"({"phi": "1"})", ", \"colour\": 1"));
    const CliRun unknown = run_cli(opt.cli, {"solve", (root / "bad" / "unknown.json").string()}, root);
    expect(unknown.code == 2, "unknown config key gave exit " + std::to_string(unknown.code));

    std::string regime = constant;
    regime.replace(regime.find("\"a\": -1"), 7, "\"a\": 1");
    write_text(root / "bad" / "regime.json", regime);
    const CliRun reg = run_cli(opt.cli, {"solve", (root / "bad" / "regime.json").string()}, root);
    expect(reg.code == 4, "a = +1 in strict mode gave exit " + std::to_string(reg.code));

    // M = c with c chosen so that the coefficient of tau vanishes on this grid.
    {
        const GridSolution base = [&] {
            SolveOptions so;
            so.n_t = so.n_x = 17;
            return solve(constant_problem(), so);
        }();
        const double c = 1.0 / (1.0 - base.A_system);
        std::ostringstream data;
        data << std::setprecision(17) << R"({"phi": "1", "psi": ")" << (1.0 - c) << R"(", "M": ")" << c << "\"}";
        write_text(root / "bad" / "degenerate.json", config_text(data.str()));
        const CliRun deg = run_cli(opt.cli, {"solve", (root / "bad" / "degenerate.json").string()}, root);
        expect(deg.code == 5, "degenerate nonlocal condition gave exit " + std::to_string(deg.code));
    }

    const CliRun e = run_cli(opt.cli, {"ml", "--alpha", "1", "--beta", "1", "--gamma", "1", "--z", "1"}, root);
    expect(e.code == 0 && e.out.find("2.71828182845905") != std::string::npos, "ml at z = 1 did not print e");
    const CliRun d1 = run_cli(opt.cli, {"ml2", "--a1", "2", "--a3", "0.5", "--a4", "0.5"}, root);
    expect(d1.code == 2 && d1.err.find("Delta1") != std::string::npos, "ml2 with Delta1 <= 0 gave exit " + std::to_string(d1.code));
    const CliRun nc = run_cli(opt.cli, {"ml", "--alpha", "1", "--beta", "1", "--gamma", "1", "--z", "1", "--max-terms", "3"}, root);
    expect(nc.code == 3, "series non-convergence gave exit " + std::to_string(nc.code));

    std::error_code ec;
    if (opt.work_dir.empty()) fs::remove_all(root, ec);
    r.pass = failures.empty();
    if (r.pass) {
        r.detail = "round trip, byte-identical CSV, exit codes 2, 3, 4, 5 and corrupted-input rejection";
    } else {
        for (const auto& f : failures) r.detail += (r.detail.empty() ? "" : "; ") + f;
    }
    return r;
}

inline bool selected(const std::string& filter, const std::string& group, const std::string& title) {
    return filter.empty() || group.find(filter) != std::string::npos || title.find(filter) != std::string::npos;
}

}  // namespace detail

/// Runs the checks selected by opt.filter in order.
inline std::vector<CheckResult> run(const Options& opt) {
    struct Entry {
        int id;
        const char* group;
        const char* title;
        std::function<CheckResult()> fn;
    };
    GridSolution constant, smooth;
    bool have_constant = false, have_smooth = false;
    // Checks 6, 7 and 9 reuse the solutions of 5 and 6 and solve them when those were filtered out.
    auto need_constant = [&]() -> const GridSolution& {
        if (!have_constant) constant = solve(constant_problem()), have_constant = true;
        return constant;
    };
    auto need_smooth = [&]() -> const GridSolution& {
        if (!have_smooth) smooth = solve(smooth_problem()), have_smooth = true;
        return smooth;
    };
    const std::vector<Entry> entries = {
        {1, "specfun", "special-function reductions", [] { return detail::special_reductions(); }},
        {2, "oracle", "bivariate and trivariate series vs oracle", [] { return detail::oracle_equivalence(); }},
        {3, "fracops", "Prabhakar integral identity", [] { return detail::integral_identity(); }},
        {4, "volterra", "Nystrom convergence order", [] { return detail::quadrature_order(); }},
        {5, "problem", "constant solution end to end",
         [&] {
             CheckResult r = detail::constant_solution(constant);
             have_constant = true;
             return r;
         }},
        {6, "problem", "boundary, nonlocal and PDE residuals",
         [&] {
             CheckResult r = detail::residuals(need_constant(), smooth);
             have_smooth = true;
             return r;
         }},
        {7, "volterra", "E2 positivity and the A bound",
         [&] { return detail::positivity_and_bound({&need_constant(), &need_smooth()}); }},
        {8, "goursat", "classical limit vs finite differences", [] { return detail::classical_limit(); }},
        {9, "volterra", "forward substitution vs Picard iteration",
         [&] { return detail::solver_cross_check({&need_constant(), &need_smooth()}); }},
        {10, "cli", "command-line contract", [&] { return detail::cli_contract(opt); }},
    };
    std::vector<CheckResult> out;
    for (const Entry& e : entries) {
        if (!detail::selected(opt.filter, e.group, e.title)) continue;
        if (opt.log) *opt.log << "[" << e.id << "] " << e.title << " ..." << std::endl;
        const auto start = std::chrono::steady_clock::now();
        CheckResult r;
        try {
            r = e.fn();
        } catch (const std::exception& ex) {
            r = detail::make_result(e.id, e.group, e.title);
            r.detail = std::string("exception: ") + ex.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out.push_back(r);
    }
    return out;
}

inline bool all_pass(const std::vector<CheckResult>& results) {
    for (const auto& r : results) {
        if (!r.pass) return false;
    }
    return !results.empty();
}

/// One line per check: id, status, title, time and the measured quantities.
inline std::string format_line(const CheckResult& r) {
    std::ostringstream os;
    os << std::setw(2) << r.id << "  " << (r.pass ? "PASS" : "FAIL") << "  " << std::left << std::setw(44) << r.title
       << std::right << std::fixed << std::setprecision(1) << std::setw(7) << r.seconds << " s  " << r.detail;
    return os.str();
}

inline std::string format_table(const std::vector<CheckResult>& results) {
    std::ostringstream os;
    os << " #  RESULT  CHECK" << std::string(40, ' ') << "TIME  DETAIL\n";
    int passed = 0;
    for (const auto& r : results) {
        os << format_line(r) << "\n";
        passed += r.pass ? 1 : 0;
    }
    os << passed << "/" << results.size() << " checks passed\n";
    return os.str();
}

}  // namespace prabhakar::selftest
