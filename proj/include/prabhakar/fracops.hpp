#pragma once

// Prabhakar fractional integral and Caputo-Prabhakar derivative (order m = 1).
//
//   I^{a,b,g,d} y(t) = int_0^t (t-s)^{b-1} E^g_{a,b}(d (t-s)^a) y(s) ds
//   D^{a,b,g,d} y(t) = I^{a,1-b,-g,d} y'(t)
//
// Both are evaluated by product integration: y is linearly interpolated on a
// mesh graded toward the kernel singularity, and the kernel is integrated
// exactly against the hat functions through its first two antiderivatives,
// which are again Mittag-Leffler functions.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "prabhakar/errors.hpp"
#include "prabhakar/parallel.hpp"
#include "prabhakar/quadrature.hpp"
#include "prabhakar/specfun.hpp"

namespace prabhakar {

using RealFn = std::function<double(double)>;

struct PrabhakarParams {
    double alpha = 1.0;
    double beta = 0.5;
    double gamma = 0.5;
    double delta = 0.0;

    void validate() const {
        if (!(alpha > 0.0) || !std::isfinite(beta) || !std::isfinite(gamma) || !std::isfinite(delta)) {
            throw InvalidParams("Prabhakar parameters require alpha > 0 and finite beta, gamma, delta");
        }
    }

    /// Checks 0 < beta < 1, the range where the derivative has order m = 1.
    void validate_derivative() const {
        validate();
        if (!(beta > 0.0 && beta < 1.0)) {
            std::ostringstream os;
            os << "Caputo-Prabhakar derivative requires 0 < beta < 1, got beta = " << beta;
            throw InvalidParams(os.str());
        }
    }

    /// Parameters of the integral that defines the derivative.
    PrabhakarParams derivative_kernel() const { return {alpha, 1.0 - beta, -gamma, delta}; }
};

/// Kernel s^{b-1} E^g_{a,b}(d s^a) with its antiderivatives
/// P(s) = s^b E^g_{a,b+1}(d s^a) and Q(s) = s^{b+1} E^g_{a,b+2}(d s^a).
class PrabhakarKernel {
public:
    PrabhakarKernel(const PrabhakarParams& p, const SeriesPolicy& series) : p_(p), series_(series) {
        p_.validate();
        if (!(p_.beta > 0.0)) throw DomainError("Prabhakar kernel requires beta > 0 for an integrable weight");
    }

    double value(double s) const {
        return std::pow(s, p_.beta - 1.0) * ml_prabhakar(p_.alpha, p_.beta, p_.gamma, arg(s), series_);
    }
    double P(double s) const {
        if (s == 0.0) return 0.0;
        return std::pow(s, p_.beta) * ml_prabhakar(p_.alpha, p_.beta + 1.0, p_.gamma, arg(s), series_);
    }
    double Q(double s) const {
        if (s == 0.0) return 0.0;
        return std::pow(s, p_.beta + 1.0) * ml_prabhakar(p_.alpha, p_.beta + 2.0, p_.gamma, arg(s), series_);
    }

    const PrabhakarParams& params() const noexcept { return p_; }
    const SeriesPolicy& series() const noexcept { return series_; }

private:
    double arg(double s) const { return p_.delta == 0.0 ? 0.0 : p_.delta * std::pow(s, p_.alpha); }

    PrabhakarParams p_;
    SeriesPolicy series_;
};

namespace detail {

/// Product rule for int_0^t K(t-s) y(s) ds on a mesh in the lag variable.
inline double product_rule(const PrabhakarKernel& k, const RealFn& y, double t, int n, double grading) {
    const GradedMesh mesh = graded_mesh(t, n, grading);
    std::vector<double> P(mesh.nodes.size()), Q(mesh.nodes.size());
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        P[i] = k.P(mesh.nodes[i]);
        Q[i] = k.Q(mesh.nodes[i]);
    }
    std::vector<double> w(mesh.nodes.size(), 0.0);
    for (std::size_t i = 0; i + 1 < mesh.nodes.size(); ++i) {
        const auto cw = kernel_cell_weights(mesh.nodes[i], mesh.nodes[i + 1], P[i], P[i + 1], Q[i], Q[i + 1]);
        w[i] += cw[0];
        w[i + 1] += cw[1];
    }
    Accumulator acc;
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        if (w[i] != 0.0) acc.add(w[i] * y(t - mesh.nodes[i]));
    }
    return acc.value();
}

}  // namespace detail

/// Prabhakar integral of y at t. The mesh is doubled at most four times. A
/// result is accepted when two successive product-rule values agree to
/// quad.tol (relative to max(1, |I|)), or when two successive Richardson
/// values (4 I_2n - I_n) / 3 do.
inline double prabhakar_integral(const PrabhakarParams& params, const RealFn& y, double t, const QuadPolicy& quad,
                                 const SeriesPolicy& series = {}) {
    quad.validate();
    if (!(t > 0.0)) throw DomainError("prabhakar_integral requires t > 0");
    const PrabhakarKernel kernel(params, series);
    int n = quad.n_points;
    double prev = detail::product_rule(kernel, y, t, n, quad.grading);
    double prev_extrap = std::numeric_limits<double>::quiet_NaN();
    for (int doubling = 0; doubling < 4; ++doubling) {
        n *= 2;
        const double cur = detail::product_rule(kernel, y, t, n, quad.grading);
        if (!std::isfinite(cur)) throw QuadratureFailure("prabhakar_integral: non-finite result");
        const double scale = std::max(1.0, std::abs(cur));
        if (std::abs(cur - prev) <= quad.tol * scale) return cur;
        const double extrap = cur + (cur - prev) / 3.0;
        if (std::abs(extrap - prev_extrap) <= quad.tol * scale) return extrap;
        prev = cur;
        prev_extrap = extrap;
    }
    std::ostringstream os;
    os << "prabhakar_integral: tolerance " << quad.tol << " not met after 4 doublings of n_points";
    throw QuadratureFailure(os.str());
}

/// Caputo-Prabhakar derivative from an available first derivative dy.
inline double caputo_prabhakar_deriv(const PrabhakarParams& params, const RealFn& dy, double t, const QuadPolicy& quad,
                                     const SeriesPolicy& series = {}) {
    params.validate_derivative();
    return prabhakar_integral(params.derivative_kernel(), dy, t, quad, series);
}

/// Second-order finite-difference derivative of y on [0, t] with step t * 1e-5.
/// Central in the interior, one-sided within one step of either end.
inline RealFn finite_difference_derivative(RealFn y, double t) {
    const double h = t * 1e-5;
    return [y = std::move(y), h, t](double s) {
        if (s - h < 0.0) return (-3.0 * y(s) + 4.0 * y(s + h) - y(s + 2.0 * h)) / (2.0 * h);
        if (s + h > t) return (3.0 * y(s) - 4.0 * y(s - h) + y(s - 2.0 * h)) / (2.0 * h);
        return (y(s + h) - y(s - h)) / (2.0 * h);
    };
}

/// Caputo-Prabhakar derivative of y when no analytic derivative is at hand.
inline double caputo_prabhakar_deriv_fd(const PrabhakarParams& params, const RealFn& y, double t,
                                        const QuadPolicy& quad, const SeriesPolicy& series = {}) {
    return caputo_prabhakar_deriv(params, finite_difference_derivative(y, t), t, quad, series);
}

/// How grid samples are turned into a function before differentiation.
enum class Reconstruction {
    linear,          // piecewise linear in t
    singular_start,  // quadratic in t^beta on the first two cells, linear afterwards
};

/// Caputo-Prabhakar derivative of samples on the uniform grid t_i = i h.
///
/// Solutions of the telegraph problem expand in powers of s = t^beta near
/// t = 0, which a piecewise-linear reconstruction in t resolves poorly. The
/// singular-start mode interpolates each cell by a quadratic in s through three
/// neighbouring samples and integrates the derivative of that interpolant
/// against the kernel exactly, so c0 + c1 s + c2 s^2 is reproduced at every node.
class SampledCaputoPrabhakar {
public:
    SampledCaputoPrabhakar(const PrabhakarParams& params, double h, std::size_t n_nodes, Reconstruction mode,
                           const SeriesPolicy& series = {})
        : params_(params), h_(h), n_(n_nodes), mode_(mode) {
        params_.validate_derivative();
        if (!(h > 0.0) || n_nodes < 2) throw InvalidParams("sampled derivative needs h > 0 and at least two nodes");
        if (mode_ == Reconstruction::linear || n_ < 3) {
            const PrabhakarKernel k(params_.derivative_kernel(), series);
            P_.resize(n_);
            for (std::size_t i = 0; i < n_; ++i) P_[i] = k.P(static_cast<double>(i) * h_);
            mode_ = Reconstruction::linear;
            return;
        }
        build_quadratic_weights(series);
    }

    std::vector<double> apply(const std::vector<double>& u) const {
        if (u.size() != n_) throw InvalidData("sampled derivative: sample count does not match the grid");
        std::vector<double> d(n_, 0.0);
        for (std::size_t i = 1; i < n_; ++i) {
            detail::Accumulator acc;
            if (mode_ == Reconstruction::linear) {
                for (std::size_t j = 0; j < i; ++j) acc.add((u[j + 1] - u[j]) / h_ * (P_[i - j] - P_[i - j - 1]));
            } else {
                const std::vector<double>& w = W_[i];
                for (std::size_t m = 0; m < w.size(); ++m) acc.add(w[m] * u[m]);
            }
            d[i] = acc.value();
        }
        return d;
    }

    std::size_t size() const noexcept { return n_; }

private:
    void build_quadratic_weights(const SeriesPolicy& series) {
        const double beta = params_.beta;
        std::vector<double> sig(n_);
        for (std::size_t m = 0; m < n_; ++m) sig[m] = std::pow(static_cast<double>(m) * h_, beta);
        W_.assign(n_, {});
        std::vector<std::vector<double>> rows(n_);
        parallel_for(
            n_ - 1, [] { return 0; },
            [&](int&, std::size_t k) {
                const std::size_t i = k + 1;
                const double t = static_cast<double>(i) * h_;
                std::vector<double> w(std::min(n_, i + 2), 0.0);
                double Fb_prev = 0.0, F2b_prev = 0.0;
                for (std::size_t j = 0; j < i; ++j) {
                    const double L = static_cast<double>(j + 1) * h_;
                    const double Fb = power_start_integral(beta, t, L, series);
                    const double F2b = power_start_integral(2.0 * beta, t, L, series);
                    const double Jb = Fb - Fb_prev, J2b = F2b - F2b_prev;
                    Fb_prev = Fb;
                    F2b_prev = F2b;
                    // Stencil: the cell's end points plus the left neighbour, or the right one on the first cell.
                    const std::size_t m0 = j == 0 ? 0 : j - 1;
                    const std::array<std::size_t, 3> nodes{m0, m0 + 1, m0 + 2};
                    for (int r = 0; r < 3; ++r) {
                        // Lagrange basis in s: (s - sa)(s - sb) / den = c2 s^2 + c1 s + c0.
                        const double sa = sig[nodes[(r + 1) % 3]], sb = sig[nodes[(r + 2) % 3]];
                        const double den = (sig[nodes[r]] - sa) * (sig[nodes[r]] - sb);
                        const double c2 = 1.0 / den, c1 = -(sa + sb) / den;
                        w[nodes[r]] += c1 * Jb + c2 * J2b;
                    }
                }
                rows[i] = std::move(w);
            });
        W_ = std::move(rows);
    }

    // int_0^L K(t - s) p s^{p-1} ds for the derivative kernel K.
    double power_start_integral(double p, double t, double L, const SeriesPolicy& series) const {
        const PrabhakarParams k = params_.derivative_kernel();
        if (L >= t) {
            return std::tgamma(p + 1.0) * std::pow(t, p - params_.beta) *
                   ml_prabhakar(k.alpha, p + k.beta, k.gamma, k.delta * std::pow(t, k.alpha), series);
        }
        const double x = L / t;
        detail::Accumulator sum;
        detail::StopRule stop(series);
        double coef = 1.0;  // (g)_m d^m / m!
        for (int m = 0; m < series.max_terms_per_index; ++m) {
            const double e = k.alpha * m + k.beta;  // exponent of (t - s) plus one
            const double term = coef * rgamma(e) * p * std::pow(t, e - 1.0 + p) * boost::math::beta(p, e, x);
            sum.add(term);
            if (stop.update(std::abs(term), std::abs(sum.value())) || coef == 0.0 || k.delta == 0.0) {
                return sum.value();
            }
            coef *= (k.gamma + m) * k.delta / (m + 1.0);
        }
        detail::throw_nonconvergence("sampled Caputo-Prabhakar start integral", series.max_terms_per_index);
    }

    PrabhakarParams params_;
    double h_;
    std::size_t n_;
    Reconstruction mode_;
    std::vector<double> P_;
    std::vector<std::vector<double>> W_;  // W_[i][m]: weight of sample m in the derivative at node i
};

inline std::vector<double> caputo_prabhakar_deriv_sampled(const PrabhakarParams& params,
                                                          const std::vector<double>& samples, double h,
                                                          Reconstruction mode = Reconstruction::singular_start,
                                                          const SeriesPolicy& series = {}) {
    return SampledCaputoPrabhakar(params, h, samples.size(), mode, series).apply(samples);
}

}  // namespace prabhakar
