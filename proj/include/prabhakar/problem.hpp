#pragma once

// The nonlocal problem: telegraph equation with the Caputo-Prabhakar
// derivative, boundary condition u(t, 0) = phi(t) and nonlocal condition
// u(0, x) - int_0^q M(t) u(t, x) dt = psi(x).
//
// solve() finds tau = u(0, .) from the Volterra equation and then evaluates u
// on the grid from the closed-form Goursat solution; verify() measures how well
// a grid function satisfies each condition.

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "prabhakar/errors.hpp"
#include "prabhakar/expr.hpp"
#include "prabhakar/fracops.hpp"
#include "prabhakar/goursat.hpp"
#include "prabhakar/volterra.hpp"

namespace prabhakar {

struct ProblemN {
    PrabhakarParams params;
    TelegraphCoeffs coeffs;
    Domain2D domain;
    expr::Expr phi, psi, M, f_smooth;
    double eps1 = 0.0;
    double eps2 = 0.0;

    /// Conditions that every instance must satisfy.
    void validate() const {
        params.validate_derivative();
        domain.validate();
        if (!(eps1 >= 0.0 && eps1 < params.beta)) {
            std::ostringstream os;
            os << "eps1 = " << eps1 << " must satisfy 0 <= eps1 < beta = " << params.beta;
            throw InvalidParams(os.str());
        }
        if (!(eps2 >= 0.0 && eps2 < 1.0)) {
            std::ostringstream os;
            os << "eps2 = " << eps2 << " must satisfy 0 <= eps2 < 1";
            throw InvalidParams(os.str());
        }
        if (phi.depends_on(expr::Var::x)) throw InvalidData("phi must depend on t only");
        if (M.depends_on(expr::Var::x)) throw InvalidData("M must depend on t only");
        if (psi.depends_on(expr::Var::t)) throw InvalidData("psi must depend on x only");
    }

    /// Reasons the parameters fall outside the regime with proven existence and uniqueness
    /// (alpha = 1, gamma = beta, a < 0, b < 0, delta < 0); empty when inside.
    std::vector<std::string> regime_violations() const {
        std::vector<std::string> v;
        if (params.alpha != 1.0) v.push_back("alpha must equal 1");
        if (params.gamma != params.beta) v.push_back("gamma must equal beta");
        if (!(coeffs.a < 0.0)) v.push_back("a must be negative");
        if (!(coeffs.b < 0.0)) v.push_back("b must be negative");
        if (!(params.delta < 0.0)) v.push_back("delta must be negative");
        return v;
    }

    RealFn phi_fn() const {
        return [e = phi](double t) { return e(t, 0.0); };
    }
    RealFn psi_fn() const {
        return [e = psi](double x) { return e(0.0, x); };
    }
    RealFn M_fn() const {
        return [e = M](double t) { return e(t, 0.0); };
    }
    Forcing forcing() const {
        Forcing f;
        f.eps1 = eps1;
        f.eps2 = eps2;
        if (!f_smooth.is_zero()) f.smooth = [e = f_smooth](double t, double x) { return e(t, x); };
        return f;
    }
    NonlocalData nonlocal_data() const { return {M_fn(), phi_fn(), psi_fn(), forcing()}; }
};

enum class Mode { strict, relaxed };

struct ResidualThresholds {
    double boundary = 1e-3;
    double nonlocal = 1e-3;
    double pde = 5e-2;
};

struct ResidualReport {
    double boundary = 0.0;
    double nonlocal = 0.0;
    double pde = 0.0;

    bool pass(const ResidualThresholds& th = {}) const {
        return boundary <= th.boundary && nonlocal <= th.nonlocal && pde <= th.pde;
    }
};

struct GridSolution {
    std::vector<double> t, x;
    std::vector<double> u;  // row-major: u[i * x.size() + l] = u(t_i, x_l)
    TraceSolution tau;
    double A = 0.0;         // int M (1 - a Gamma(g) t^b E2) dt
    double A_system = 0.0;  // coefficient of tau in the Volterra equation
    double integral_M = 0.0;
    double compatibility_defect = 0.0;
    double G0 = 0.0;
    double volterra_residual = 0.0;
    VolterraSystem system;  // discrete trace equation, kept for cross-checks
    std::vector<std::string> warnings;
    std::optional<ResidualReport> residuals;

    double at(std::size_t i, std::size_t l) const { return u[i * x.size() + l]; }
};

struct SolveOptions {
    int n_t = 65;
    int n_x = 65;
    QuadPolicy quad;
    SeriesPolicy series;
    Mode mode = Mode::strict;
    double arg_cap = 50.0;
    double A_tol = kDefaultATol;
};

/// |phi(0) - int_0^q M phi dt - psi(0)|.
inline double compatibility_check(const ProblemN& pb, const QuadPolicy& quad = {}) {
    const RealFn M = pb.M_fn(), phi = pb.phi_fn();
    const double integral =
        smooth_integral([&](double t) { return M(t) * phi(t); }, 0.0, pb.domain.q, std::min(1e-12, quad.tol));
    return std::abs(phi(0.0) - integral - pb.psi(0.0, 0.0));
}

inline GridSolution solve(const ProblemN& pb, const SolveOptions& opt = {}) {
    pb.validate();
    if (opt.n_t < 3 || opt.n_x < 3) throw InvalidParams("solve needs at least 3 nodes per direction");
    GridSolution sol;
    const auto violations = pb.regime_violations();
    if (!violations.empty()) {
        std::string all;
        for (const auto& v : violations) all += (all.empty() ? "" : "; ") + v;
        if (opt.mode == Mode::strict) throw RegimeViolation(all);
        sol.warnings.push_back("outside the proven regime (" + all + "): uniqueness is not guaranteed, only A != 0 is checked");
    }
    sol.compatibility_defect = compatibility_check(pb, opt.quad);

    GoursatOptions gopt;
    gopt.quad = opt.quad;
    gopt.series = opt.series;
    gopt.arg_cap = opt.arg_cap;
    GoursatGrid tables(pb.params, pb.coeffs, pb.domain.q, opt.n_t - 1, pb.domain.p, opt.n_x - 1, gopt);
    const NonlocalData data = pb.nonlocal_data();
    tables.set_boundary(data.phi);
    tables.set_forcing(data.f);

    const VolterraSystem sys = assemble_volterra(data, tables, opt.A_tol);
    sol.A = sys.A_weighted;
    sol.A_system = sys.A;
    sol.integral_M = sys.integral_M;
    sol.G0 = sys.G[0];

    const double phi0 = data.phi(0.0);
    if (std::abs(phi0 - sol.G0) > 1e-6) {
        std::ostringstream os;
        os.precision(10);
        os << "phi(0) = " << phi0 << " differs from G(0) = " << sol.G0 << " (compatibility defect "
           << sol.compatibility_defect << ")";
        if (opt.mode == Mode::strict) throw RegimeViolation(os.str());
        sol.warnings.push_back(os.str());
    }

    // In the proven regime A > int M dt whenever M >= 0.
    if (violations.empty()) {
        bool nonneg = true;
        for (double tv : tables.t()) nonneg = nonneg && data.M(tv) >= 0.0;
        if (nonneg && !(sol.A > sol.integral_M - 1e-8)) {
            std::ostringstream os;
            os << "A = " << sol.A << " does not exceed int M dt = " << sol.integral_M;
            sol.warnings.push_back(os.str());
        }
    }

    const VolterraSolution vs = solve_tau(sys);
    sol.system = sys;
    sol.tau = vs.trace;
    sol.volterra_residual = vs.discrete_residual;
    sol.t = tables.t();
    sol.x = tables.x();
    sol.u = tables.assemble_all(sol.tau.tau);
    return sol;
}

/// Boundary, nonlocal and PDE residuals of a grid function on a uniform grid.
/// The t-integral in the nonlocal condition uses the trapezoid rule on the
/// t-grid; the PDE residual combines the sampled Caputo-Prabhakar derivative
/// with central differences in x at interior nodes.
inline ResidualReport verify(const ProblemN& pb, const std::vector<double>& t, const std::vector<double>& x,
                             const std::vector<double>& u, const SeriesPolicy& series = {}) {
    pb.validate();
    const std::size_t nt = t.size(), nx = x.size();
    if (nt < 3 || nx < 3 || u.size() != nt * nx) throw InvalidData("verify: grid shape mismatch");
    const RealFn phi = pb.phi_fn(), psi = pb.psi_fn(), M = pb.M_fn();
    const Forcing f = pb.forcing();
    auto U = [&](std::size_t i, std::size_t l) { return u[i * nx + l]; };
    ResidualReport r;
    for (std::size_t i = 0; i < nt; ++i) r.boundary = std::max(r.boundary, std::abs(U(i, 0) - phi(t[i])));

    const std::vector<double> wt = trapezoid_weights(t);
    std::vector<double> Mt(nt);
    for (std::size_t i = 0; i < nt; ++i) Mt[i] = M(t[i]);
    for (std::size_t l = 0; l < nx; ++l) {
        detail::Accumulator acc;
        acc.add(U(0, l));
        for (std::size_t i = 0; i < nt; ++i) acc.add(-wt[i] * Mt[i] * U(i, l));
        acc.add(-psi(x[l]));
        r.nonlocal = std::max(r.nonlocal, std::abs(acc.value()));
    }

    const double ht = t[1] - t[0], hx = x[1] - x[0];
    const SampledCaputoPrabhakar D(pb.params, ht, nt, Reconstruction::singular_start, series);
    std::vector<std::vector<double>> Du(nx);
    std::vector<double> column(nt);
    for (std::size_t l = 0; l < nx; ++l) {
        for (std::size_t i = 0; i < nt; ++i) column[i] = U(i, l);
        Du[l] = D.apply(column);
    }
    const double a = pb.coeffs.a, b = pb.coeffs.b;
    for (std::size_t i = 1; i + 1 < nt; ++i) {
        for (std::size_t l = 1; l + 1 < nx; ++l) {
            const double dxDu = (Du[l + 1][i] - Du[l - 1][i]) / (2.0 * hx);
            const double ux = (U(i, l + 1) - U(i, l - 1)) / (2.0 * hx);
            const double res = dxDu - a * ux - b * Du[l][i] - f(t[i], x[l]);
            r.pde = std::max(r.pde, std::abs(res));
        }
    }
    return r;
}

inline ResidualReport verify(const ProblemN& pb, const GridSolution& sol, const SeriesPolicy& series = {}) {
    return verify(pb, sol.t, sol.x, sol.u, series);
}

}  // namespace prabhakar
