#pragma once

// Reduction of the nonlocal condition to a second-kind Volterra equation for
// the trace tau(x) = u(0, x), and its Nystrom solution.
//
// Inserting the closed-form Goursat solution into
//   u(0, x) - int_0^q M(t) u(t, x) dt = psi(x)
// gives  A tau(x) - ab int_0^x tau(xi) M1(x - xi) dxi = g(x)  with
//   A     = 1 - int M dt - a Gamma(g) int M t^b E2 dt
//   M1(r) = int M(t) t^b F_V2(a t^b, b r, d t^a) dt
//   g(x)  = psi + e^{bx} int M (phi - phi(0)) dt - a phi(0) int M t^b F_V1 dt
//           + ab x int M V3 dt + int M V4 dt
// where V3 and V4 are the inner phi- and f-integrals of the Goursat formula.
// The t-integrals of series terms use the trapezoid rule on the t-grid of the
// Goursat tables, so the discrete equation is exactly consistent with the
// grid solution assembled from the same tables.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "prabhakar/errors.hpp"
#include "prabhakar/fracops.hpp"
#include "prabhakar/goursat.hpp"
#include "prabhakar/quadrature.hpp"
#include "prabhakar/specfun.hpp"

namespace prabhakar {

inline constexpr double kDefaultATol = 1e-10;

/// Adaptive Gauss-Kronrod integral of a continuous function.
inline double smooth_integral(const RealFn& f, double a, double b, double tol = 1e-12) {
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, tol, &err);
    if (!std::isfinite(v)) throw QuadratureFailure("smooth_integral: non-finite result");
    return v;
}

/// Data entering the nonlocal problem besides the PDE coefficients.
struct NonlocalData {
    RealFn M;
    RealFn phi;
    RealFn psi;
    Forcing f;
};

/// Discrete second-kind Volterra equation of convolution type on a uniform grid:
///   tau_l - lambda sum_j w_j M2[l - j] tau_j = G_l   (trapezoid weights w_j).
struct VolterraSystem {
    double A = 1.0;                                          // coefficient of tau in the equation
    double A_weighted = std::numeric_limits<double>::quiet_NaN();  // int M (1 - a Gamma(g) t^b E2) dt
    double integral_M = std::numeric_limits<double>::quiet_NaN();
    double lambda = 0.0;                                     // a b
    std::vector<double> x;                                   // uniform nodes on [0, p]
    std::vector<double> M1, M2;                              // kernel by offset index
    std::vector<double> g, G;
    std::vector<std::string> warnings;

    double h() const { return x.size() > 1 ? x[1] - x[0] : 0.0; }
};

struct VolterraSolution {
    TraceSolution trace;
    double discrete_residual = 0.0;
    int iterations = 0;
};

namespace detail {

inline void check_weight(const RealFn& M, double q) {
    double mx = 0.0;
    for (int i = 0; i <= 64; ++i) mx = std::max(mx, std::abs(M(q * i / 64.0)));
    if (!(mx > 1e-14)) throw InvalidData("M vanishes identically on [0, q]");
}

inline void check_A(double A, double tol) {
    if (!(std::abs(A) > tol)) {
        std::ostringstream os;
        os << "|A| = " << std::abs(A) << " does not exceed A_tol = " << tol;
        throw DegenerateNonlocal(os.str());
    }
}

}  // namespace detail

/// int_0^q M(t) (1 - a Gamma(g) t^b E2(a t^b, d t^a)) dt by adaptive quadrature.
inline double compute_A(const PrabhakarParams& params, const TelegraphCoeffs& coeffs, const RealFn& M, double q,
                        const SeriesPolicy& series = {}, double A_tol = kDefaultATol) {
    params.validate();
    if (!(q > 0.0)) throw InvalidParams("compute_A requires q > 0");
    detail::check_weight(M, q);
    Ml2Series e2(ml2_tele(params));
    const double gg = std::tgamma(params.gamma);
    const double A = smooth_integral(
        [&](double t) {
            const double tb = std::pow(t, params.beta);
            return M(t) * (1.0 - coeffs.a * gg * tb * e2(coeffs.a * tb, params.delta * std::pow(t, params.alpha), series));
        },
        0.0, q);
    detail::check_A(A, A_tol);
    return A;
}

/// Assembles the system on the grid of `tables`, which must hold phi and f.
/// The x-grid of the system is the x-grid of the tables.
inline VolterraSystem assemble_volterra(const NonlocalData& data, const GoursatGrid& tables,
                                        double A_tol = kDefaultATol) {
    if (tables.scope() != GoursatGrid::Scope::full) throw InvalidParams("assemble_volterra needs full-grid tables");
    const double a = tables.coeffs().a, b = tables.coeffs().b;
    const auto& t = tables.t();
    const auto& x = tables.x();
    const double q = t.back();
    detail::check_weight(data.M, q);
    const std::vector<double> wt = trapezoid_weights(t);
    std::vector<double> Mt(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) Mt[i] = data.M(t[i]);
    const double phi0 = data.phi(0.0);

    VolterraSystem sys;
    sys.lambda = a * b;
    sys.x = x;
    sys.integral_M = smooth_integral(data.M, 0.0, q);
    const double int_M_dphi = smooth_integral([&](double s) { return data.M(s) * (data.phi(s) - phi0); }, 0.0, q);

    detail::Accumulator e2_sum;
    for (std::size_t i = 0; i < t.size(); ++i) e2_sum.add(wt[i] * Mt[i] * tables.t_pow_beta(int(i)) * tables.e2(int(i)));
    const double gg = tables.gamma_of_gamma();
    sys.A = 1.0 - sys.integral_M - a * gg * e2_sum.value();
    sys.A_weighted = sys.integral_M - a * gg * e2_sum.value();
    detail::check_A(sys.A, A_tol);

    const std::size_t nx = x.size();
    sys.M1.assign(nx, 0.0);
    sys.g.assign(nx, 0.0);
    for (std::size_t r = 0; r < nx; ++r) {
        detail::Accumulator acc;
        for (std::size_t i = 0; i < t.size(); ++i) acc.add(wt[i] * Mt[i] * tables.t_pow_beta(int(i)) * tables.v2(int(i), int(r)));
        sys.M1[r] = acc.value();
    }
    for (std::size_t l = 0; l < nx; ++l) {
        detail::Accumulator acc;
        acc.add(data.psi(x[l]));
        acc.add(std::exp(b * x[l]) * int_M_dphi);
        for (std::size_t i = 0; i < t.size(); ++i) {
            const int ii = int(i), ll = int(l);
            const double series_part = -a * phi0 * tables.t_pow_beta(ii) * tables.v1(ii, ll) +
                                       a * b * x[l] * tables.v3sum(ii, ll) + tables.v4(ii, ll);
            acc.add(wt[i] * Mt[i] * series_part);
        }
        sys.g[l] = acc.value();
    }
    sys.M2.resize(nx);
    sys.G.resize(nx);
    for (std::size_t r = 0; r < nx; ++r) sys.M2[r] = sys.M1[r] / sys.A;
    for (std::size_t l = 0; l < nx; ++l) sys.G[l] = sys.g[l] / sys.A;
    return sys;
}

namespace detail {

inline GoursatOptions standalone_options(const QuadPolicy& quad, const SeriesPolicy& series) {
    GoursatOptions o;
    o.quad = quad;
    o.series = series;
    return o;
}

}  // namespace detail

/// M1(xi, x) with the t-integral by the trapezoid rule on quad.n_points uniform cells.
inline double kernel_M1(const PrabhakarParams& params, const TelegraphCoeffs& coeffs, const RealFn& M, double q,
                        double xi, double x, const QuadPolicy& quad = {}, const SeriesPolicy& series = {}) {
    quad.validate();
    if (!(0.0 <= xi && xi <= x)) throw DomainError("kernel_M1 requires 0 <= xi <= x");
    Ml3Series v2(ml3_tele_variant(Variant::V2, params));
    const int n = quad.n_points;
    detail::Accumulator acc;
    for (int i = 0; i <= n; ++i) {
        const double t = q * i / n;
        const double w = (i == 0 || i == n) ? 0.5 * q / n : q / n;
        const double tb = std::pow(t, params.beta);
        acc.add(w * M(t) * tb * v2(coeffs.a * tb, coeffs.b * (x - xi), params.delta * std::pow(t, params.alpha), series));
    }
    return acc.value();
}

/// g(x) on its own: t-grid with quad.n_points uniform cells, and for the
/// forcing term a xi-grid with max(8, n_points / 8) cells on [0, x].
inline double rhs_g(const PrabhakarParams& params, const TelegraphCoeffs& coeffs, double q, const NonlocalData& data,
                    double x, const QuadPolicy& quad = {}, const SeriesPolicy& series = {}) {
    quad.validate();
    if (!(x >= 0.0)) throw DomainError("rhs_g requires x >= 0");
    const int nt = quad.n_points;
    const int nx = x > 0.0 ? std::max(8, quad.n_points / 8) : 1;
    const double xmax = x > 0.0 ? x : 1.0;
    GoursatGrid tables(params, coeffs, q, nt, xmax, nx, detail::standalone_options(quad, series),
                       x > 0.0 ? GoursatGrid::Scope::last_column : GoursatGrid::Scope::full);
    tables.set_boundary(data.phi);
    tables.set_forcing(data.f);
    const auto& t = tables.t();
    const std::vector<double> wt = trapezoid_weights(t);
    const double phi0 = data.phi(0.0);
    const int l = x > 0.0 ? nx : 0;
    const double b = coeffs.b, a = coeffs.a;
    detail::Accumulator acc;
    acc.add(data.psi(x));
    acc.add(std::exp(b * x) * smooth_integral([&](double s) { return data.M(s) * (data.phi(s) - phi0); }, 0.0, q));
    for (std::size_t i = 0; i < t.size(); ++i) {
        const int ii = int(i);
        const double series_part = -a * phi0 * tables.t_pow_beta(ii) * tables.v1(ii, l) +
                                   (l > 0 ? a * b * x * tables.v3sum(ii, l) + tables.v4(ii, l) : 0.0);
        acc.add(wt[i] * data.M(t[i]) * series_part);
    }
    return acc.value();
}

/// Forward substitution for the trapezoid Nystrom system.
inline VolterraSolution solve_tau(const VolterraSystem& sys) {
    const std::size_t n = sys.x.size();
    if (n == 0 || sys.M2.size() != n || sys.G.size() != n) throw InvalidData("solve_tau: inconsistent system");
    const double h = sys.h();
    VolterraSolution out;
    out.trace.x = sys.x;
    std::vector<double>& tau = out.trace.tau;
    tau.assign(n, 0.0);
    tau[0] = sys.G[0];
    const double pivot = 1.0 - sys.lambda * 0.5 * h * sys.M2[0];
    if (n > 1 && std::abs(pivot) < 1e-12) {
        std::ostringstream os;
        os << "diagonal pivot 1 - ab w M2(x, x) = " << pivot << " is below 1e-12 in magnitude";
        throw SingularStep(os.str());
    }
    for (std::size_t l = 1; l < n; ++l) {
        detail::Accumulator acc;
        acc.add(sys.G[l]);
        for (std::size_t j = 0; j < l; ++j) {
            const double w = j == 0 ? 0.5 * h : h;
            acc.add(sys.lambda * w * sys.M2[l - j] * tau[j]);
        }
        tau[l] = acc.value() / pivot;
    }
    // Residual of the discrete equations.
    double res = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        detail::Accumulator acc;
        acc.add(tau[l]);
        for (std::size_t j = 0; j <= l && l > 0; ++j) {
            const double w = (j == 0 || j == l) ? 0.5 * h : h;
            acc.add(-sys.lambda * w * sys.M2[l - j] * tau[j]);
        }
        acc.add(-sys.G[l]);
        res = std::max(res, std::abs(acc.value()));
    }
    out.discrete_residual = res;
    return out;
}

/// Successive approximations tau <- G + lambda K tau from tau = G, using the
/// same discrete operator as solve_tau.
inline VolterraSolution picard_solve(const VolterraSystem& sys, int max_iter = 1000, double tol = 1e-12) {
    const std::size_t n = sys.x.size();
    if (n == 0 || sys.M2.size() != n || sys.G.size() != n) throw InvalidData("picard_solve: inconsistent system");
    const double h = sys.h();
    VolterraSolution out;
    out.trace.x = sys.x;
    std::vector<double> tau = sys.G, next(n);
    for (int it = 1; it <= max_iter; ++it) {
        double diff = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            detail::Accumulator acc;
            acc.add(sys.G[l]);
            for (std::size_t j = 0; j <= l && l > 0; ++j) {
                const double w = (j == 0 || j == l) ? 0.5 * h : h;
                acc.add(sys.lambda * w * sys.M2[l - j] * tau[j]);
            }
            next[l] = acc.value();
            diff = std::max(diff, std::abs(next[l] - tau[l]));
        }
        tau.swap(next);
        if (diff < tol) {
            out.trace.tau = tau;
            out.iterations = it;
            return out;
        }
    }
    std::ostringstream os;
    os << "picard_solve: no convergence to " << tol << " within " << max_iter << " iterations";
    throw MaxIterExceeded(os.str());
}

/// System for an explicit convolution kernel M2(r) and right-hand side G(x) on n + 1 uniform nodes over [0, p].
inline VolterraSystem convolution_system(double lambda, const RealFn& M2, const RealFn& G, double p, int n) {
    if (n < 1 || !(p > 0.0)) throw InvalidParams("convolution_system needs p > 0 and n >= 1");
    VolterraSystem sys;
    sys.lambda = lambda;
    sys.x.resize(n + 1);
    sys.M2.resize(n + 1);
    sys.G.resize(n + 1);
    for (int l = 0; l <= n; ++l) {
        sys.x[l] = l == n ? p : p * l / n;
        sys.M2[l] = M2(sys.x[l]);
        sys.G[l] = G(sys.x[l]);
    }
    sys.M1 = sys.M2;
    sys.g = sys.G;
    return sys;
}

}  // namespace prabhakar
