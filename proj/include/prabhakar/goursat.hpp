#pragma once

// Closed-form solution of the Goursat problem for
//   d/dx D u - a u_x - b D u = f,   u(0, x) = tau(x),   u(t, 0) = phi(t),
// where D is the Caputo-Prabhakar derivative in t:
//
//   u = tau(x) + (phi(t) - phi(0)) e^{bx} + a Gamma(g) t^b tau(x) E2(a t^b, d t^a)
//       - a phi(0) t^b F_V1(a t^b, b x, d t^a)
//       + a b t^b int_0^x tau(xi) F_V2(a t^b, b (x - xi), d t^a) dxi
//       + a b x int_0^t (t - eta)^{b-1} phi(eta) F_V3(a (t-eta)^b, b x, d (t-eta)^a) deta
//       + int_0^t int_0^x (t - eta)^{b-1} f(eta, xi) F_V4(a (t-eta)^b, b (x-xi), d (t-eta)^a) dxi deta
//
// with E2 the bivariate and F_V* four instances of the trivariate
// Mittag-Leffler type function. Everything is evaluated on uniform meshes;
// the series values that depend only on mesh offsets are tabulated once.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "prabhakar/errors.hpp"
#include "prabhakar/fracops.hpp"
#include "prabhakar/parallel.hpp"
#include "prabhakar/quadrature.hpp"
#include "prabhakar/specfun.hpp"

namespace prabhakar {

struct TelegraphCoeffs {
    double a = -1.0;
    double b = -1.0;
};

struct Domain2D {
    double q = 1.0;
    double p = 1.0;

    void validate() const {
        if (!(q > 0.0 && p > 0.0 && std::isfinite(q) && std::isfinite(p))) {
            throw InvalidParams("domain extents q and p must be positive and finite");
        }
    }
};

/// Trace tau on an ascending x-grid, linearly interpolated in between.
struct TraceSolution {
    std::vector<double> x;
    std::vector<double> tau;

    double operator()(double xv) const {
        if (x.empty() || x.size() != tau.size()) throw InvalidData("TraceSolution: empty or inconsistent grid");
        if (xv <= x.front()) return tau.front();
        if (xv >= x.back()) return tau.back();
        const auto it = std::upper_bound(x.begin(), x.end(), xv);
        const std::size_t j = static_cast<std::size_t>(it - x.begin());
        const double w = (xv - x[j - 1]) / (x[j] - x[j - 1]);
        return (1.0 - w) * tau[j - 1] + w * tau[j];
    }
};

using RealFn2 = std::function<double(double, double)>;

/// Forcing f(t, x) = t^{-eps1} x^{-eps2} f_smooth(t, x). An empty f_smooth means f = 0.
struct Forcing {
    RealFn2 smooth;
    double eps1 = 0.0;
    double eps2 = 0.0;

    bool is_zero() const noexcept { return !smooth; }
    double operator()(double t, double x) const {
        if (!smooth) return 0.0;
        return std::pow(t, -eps1) * std::pow(x, -eps2) * smooth(t, x);
    }
};

struct GoursatOptions {
    QuadPolicy quad;
    SeriesPolicy series;
    double arg_cap = 50.0;
};

enum class Variant { V1, V2, V3, V4 };

inline const char* variant_name(Variant v) {
    switch (v) {
        case Variant::V1: return "V1";
        case Variant::V2: return "V2";
        case Variant::V3: return "V3";
        case Variant::V4: return "V4";
    }
    return "?";
}

inline Variant parse_variant(const std::string& s) {
    if (s == "V1" || s == "v1") return Variant::V1;
    if (s == "V2" || s == "v2") return Variant::V2;
    if (s == "V3" || s == "v3") return Variant::V3;
    if (s == "V4" || s == "v4") return Variant::V4;
    throw InvalidParams("unknown variant '" + s + "' (expected V1, V2, V3 or V4)");
}

/// Parameters of the trivariate instances in the solution formula.
inline ML3Params ml3_tele_variant(Variant v, const PrabhakarParams& pp) {
    pp.validate();
    const double al = pp.alpha, be = pp.beta, ga = pp.gamma;
    ML3Params p;
    // First row: (gamma, 1, gamma; 1, 1, d2) with d2 = 2 for V1..V3 and 1 for V4.
    p.a1 = ga, p.b1 = 1.0, p.d1 = ga;
    p.a2 = 1.0, p.g1 = 1.0, p.d2 = v == Variant::V4 ? 1.0 : 2.0;
    // Second row: (beta, alpha, d3; gamma, gamma; 1, d5; 1, 1; 1, 1; 1, d8).
    p.a3 = be, p.b2 = al;
    p.a4 = ga, p.d4 = ga;
    p.a5 = 1.0;
    p.b3 = 1.0, p.d6 = 1.0;
    p.g2 = 1.0, p.d7 = 1.0;
    p.g3 = 1.0;
    switch (v) {
        case Variant::V1: p.d3 = be + 1.0, p.d5 = 2.0, p.d8 = 1.0; break;
        case Variant::V2: p.d3 = be + 1.0, p.d5 = 1.0, p.d8 = 2.0; break;
        case Variant::V3: p.d3 = be, p.d5 = 2.0, p.d8 = 2.0; break;
        case Variant::V4: p.d3 = be, p.d5 = 1.0, p.d8 = 1.0; break;
    }
    validate(p);
    return p;
}

/// Parameters of the bivariate instance (gamma, 1, gamma; 0, 1; beta, alpha, beta+1; gamma, gamma; 1, 1).
inline ML2Params ml2_tele(const PrabhakarParams& pp) {
    pp.validate();
    ML2Params p;
    p.a1 = pp.gamma, p.b1 = 1.0, p.g1 = pp.gamma;
    p.a2 = 0.0, p.g2 = 1.0;
    p.a3 = pp.beta, p.b2 = pp.alpha, p.d1 = pp.beta + 1.0;
    p.a4 = pp.gamma, p.d2 = pp.gamma;
    p.b3 = 1.0, p.d3 = 1.0;
    validate(p);
    return p;
}

namespace detail {

inline ML3Params shifted_d3(ML3Params p, double shift) {
    p.d3 += shift;
    return p;
}

/// Per-worker series objects; each owns its coefficient tables.
struct TeleSeries {
    Ml2Series e2;
    Ml3Series v1, v2, v3p, v3q, v4p, v4q;

    explicit TeleSeries(const PrabhakarParams& pp)
        : e2(ml2_tele(pp)),
          v1(ml3_tele_variant(Variant::V1, pp)),
          v2(ml3_tele_variant(Variant::V2, pp)),
          v3p(shifted_d3(ml3_tele_variant(Variant::V3, pp), 1.0)),
          v3q(shifted_d3(ml3_tele_variant(Variant::V3, pp), 2.0)),
          v4p(shifted_d3(ml3_tele_variant(Variant::V4, pp), 1.0)),
          v4q(shifted_d3(ml3_tele_variant(Variant::V4, pp), 2.0)) {}
};

using Table = std::vector<std::vector<double>>;

inline Table make_table(std::size_t rows, std::size_t cols) { return Table(rows, std::vector<double>(cols, 0.0)); }

}  // namespace detail

/// Series tables and data integrals of the solution formula on the uniform grid
/// t_i = i ht (i = 0..nt), x_l = l hx (l = 0..nx).
///
/// The scope limits which nodes are filled: the whole grid, the last x-column
/// (all t at x = x_max) or only the corner (t_max, x_max).
class GoursatGrid {
public:
    enum class Scope { full, last_column, corner };

    GoursatGrid(const PrabhakarParams& params, const TelegraphCoeffs& coeffs, double t_max, int nt, double x_max,
                int nx, const GoursatOptions& opts = {}, Scope scope = Scope::full)
        : params_(params), coeffs_(coeffs), opts_(opts), nt_(nt), nx_(nx), scope_(scope) {
        params_.validate();
        opts_.series.validate();
        if (!(params_.beta > 0.0)) throw InvalidParams("goursat: beta must be positive (discriminant Delta1 = beta)");
        if (nt < 1 || nx < 1 || !(t_max > 0.0) || !(x_max > 0.0)) {
            throw InvalidParams("goursat: grid needs positive extents and at least one cell per direction");
        }
        check_arguments(t_max, x_max);
        ht_ = t_max / nt;
        hx_ = x_max / nx;
        const detail::TeleSeries probe(params_);  // validates every parameter set up front
        (void)probe;
        t_.resize(nt_ + 1);
        x_.resize(nx_ + 1);
        for (int i = 0; i <= nt_; ++i) t_[i] = i == nt_ ? t_max : i * ht_;
        for (int l = 0; l <= nx_; ++l) x_[l] = l == nx_ ? x_max : l * hx_;
        tb_.resize(nt_ + 1);
        for (int i = 0; i <= nt_; ++i) tb_[i] = std::pow(t_[i], params_.beta);
        build_series_tables();
    }

    /// Samples phi on the t-grid and forms the V3 integrals.
    void set_boundary(const std::vector<double>& phi) {
        if (phi.size() != t_.size()) throw InvalidData("goursat: phi samples do not match the t-grid");
        phi_ = phi;
        v3sum_ = detail::make_table(nt_ + 1, nx_ + 1);
        for_each_needed([&](int i, int l) {
            detail::Accumulator acc;
            for (int k = 0; k < i; ++k) {
                acc.add(w3a_[k][l] * phi_[i - k] + w3b_[k][l] * phi_[i - k - 1]);
            }
            v3sum_[i][l] = acc.value();
        });
        have_phi_ = true;
    }

    void set_boundary(const RealFn& phi) {
        std::vector<double> s(t_.size());
        for (std::size_t i = 0; i < t_.size(); ++i) s[i] = phi(t_[i]);
        set_boundary(s);
    }

    /// Forms the V4 double integrals for the forcing (no-op for f = 0).
    void set_forcing(const Forcing& f) {
        v4_ = detail::make_table(nt_ + 1, nx_ + 1);
        forcing_zero_ = f.is_zero();
        if (forcing_zero_) return;
        if (!(f.eps1 >= 0.0 && f.eps1 < 1.0 && f.eps2 >= 0.0 && f.eps2 < 1.0)) {
            throw InvalidParams("forcing exponents must satisfy 0 <= eps1 < 1 and 0 <= eps2 < 1");
        }
        build_forcing_tables();
        // Smooth factor on the grid, and with the t-power folded in for eta > 0.
        detail::Table ys = detail::make_table(nt_ + 1, nx_ + 1), y = detail::make_table(nt_ + 1, nx_ + 1);
        for (int m = 0; m <= nt_; ++m) {
            for (int j = 0; j <= nx_; ++j) {
                const double ft = f.smooth(t_[m], x_[j]);
                if (!std::isfinite(ft)) throw InvalidData("forcing: smooth factor is not finite on the grid");
                ys[m][j] = ft;
                y[m][j] = m == 0 ? ft : std::pow(t_[m], -f.eps1) * ft;
            }
        }
        // Cells away from the kernel singularity carry the factor eta^{-eps1}
        // exactly: the kernel is replaced by its L2 projection onto linears on
        // the cell (mass matrix ht [1/3 1/6; 1/6 1/3]) and integrated against
        // eta^{-eps1} times the linear interpolant of the smooth factor.
        const bool singular = f.eps1 > 0.0;
        std::vector<std::array<double, 3>> hat(nt_);
        if (singular) {
            for (int m = 0; m < nt_; ++m) hat[m] = hat_product_moments(-f.eps1, t_[m], t_[m + 1]);
        }
        // xi-cell weights of the weight xi^{-eps2}.
        std::vector<std::array<double, 2>> cw(nx_);
        for (int j = 0; j < nx_; ++j) cw[j] = linear_cell_weights(-f.eps2, x_[j], x_[j + 1]);

        // eta-integral at t_i for source column xi_j and kernel offset r.
        auto eta_integral = [&](int i, int j, int r) {
            detail::Accumulator acc;
            for (int m = 0; m < i; ++m) {
                const int k = i - m - 1;  // lag cell [s_k, s_{k+1}] <-> eta cell [t_m, t_{m+1}]
                const double wa = w4a_[k][r];  // kernel against the hat at eta = t_{m+1}
                const double wb = w4b_[k][r];  // kernel against the hat at eta = t_m
                if (singular && 2 * (m + 1) <= i) {
                    const double c0 = (4.0 * wb - 2.0 * wa) / ht_;
                    const double c1 = (4.0 * wa - 2.0 * wb) / ht_;
                    const auto& mm = hat[m];
                    acc.add(ys[m][j] * (c0 * mm[0] + c1 * mm[1]) + ys[m + 1][j] * (c0 * mm[1] + c1 * mm[2]));
                } else {
                    acc.add(wa * y[m + 1][j] + wb * y[m][j]);
                }
            }
            return acc.value();
        };
        for_each_needed([&](int i, int l) {
            if (i == 0 || l == 0) return;
            detail::Accumulator acc;
            for (int j = 0; j < l; ++j) {
                acc.add(cw[j][0] * eta_integral(i, j, l - j) + cw[j][1] * eta_integral(i, j + 1, l - j - 1));
            }
            v4_[i][l] = acc.value();
        });
    }

    /// u at grid node (i, l) for tau sampled on the x-grid.
    double assemble(int i, int l, const std::vector<double>& tau) const {
        require_data();
        const double a = coeffs_.a, b = coeffs_.b;
        const double tb = tb_[i];
        double u = tau[l] * (1.0 + a * gamma_g_ * tb * e2_[i]);
        u += (phi_[i] - phi_[0]) * std::exp(b * x_[l]);
        u -= a * phi_[0] * tb * v1_[i][l];
        if (l > 0 && i > 0) {
            detail::Accumulator acc;
            for (int j = 0; j <= l; ++j) {
                const double w = (j == 0 || j == l) ? 0.5 * hx_ : hx_;
                acc.add(w * tau[j] * v2_[i][l - j]);
            }
            u += a * b * tb * acc.value();
        }
        u += a * b * x_[l] * v3sum_[i][l];
        u += v4_[i][l];
        return u;
    }

    /// Full grid, row-major u[i * (nx + 1) + l].
    std::vector<double> assemble_all(const std::vector<double>& tau) const {
        if (scope_ != Scope::full) throw InvalidParams("goursat: partial tables cannot assemble the full grid");
        if (tau.size() != x_.size()) throw InvalidData("goursat: tau samples do not match the x-grid");
        std::vector<double> u(t_.size() * x_.size());
        for (int i = 0; i <= nt_; ++i) {
            for (int l = 0; l <= nx_; ++l) u[i * (nx_ + 1) + l] = assemble(i, l, tau);
        }
        return u;
    }

    const std::vector<double>& t() const noexcept { return t_; }
    const std::vector<double>& x() const noexcept { return x_; }
    double ht() const noexcept { return ht_; }
    double hx() const noexcept { return hx_; }
    int nt() const noexcept { return nt_; }
    int nx() const noexcept { return nx_; }
    const PrabhakarParams& params() const noexcept { return params_; }
    const TelegraphCoeffs& coeffs() const noexcept { return coeffs_; }
    const GoursatOptions& options() const noexcept { return opts_; }
    Scope scope() const noexcept { return scope_; }
    double gamma_of_gamma() const noexcept { return gamma_g_; }

    double t_pow_beta(int i) const { return tb_[i]; }
    double e2(int i) const { return e2_[i]; }
    double v1(int i, int l) const { return v1_[i][l]; }
    double v2(int i, int r) const { return v2_[i][r]; }
    double v3sum(int i, int l) const { return v3sum_[i][l]; }
    double v4(int i, int l) const { return v4_[i][l]; }
    const std::vector<double>& phi() const noexcept { return phi_; }

private:
    void check_arguments(double t_max, double x_max) const {
        const double cap = opts_.arg_cap;
        const double args[] = {std::abs(coeffs_.a) * std::pow(t_max, params_.beta), std::abs(coeffs_.b) * x_max,
                               std::abs(params_.delta) * std::pow(t_max, params_.alpha)};
        static constexpr const char* names[] = {"|a| t^beta", "|b| x", "|delta| t^alpha"};
        for (int k = 0; k < 3; ++k) {
            if (!(args[k] <= cap)) {
                std::ostringstream os;
                os << "series argument " << names[k] << " = " << args[k] << " exceeds the cap " << cap;
                throw ArgumentOutOfRange(os.str());
            }
        }
    }

    template <class F>
    void for_each_needed(F&& f) const {
        for (int i = first_row(); i <= nt_; ++i) {
            for (int l = first_col(); l <= nx_; ++l) f(i, l);
        }
    }

    int first_row() const noexcept { return scope_ == Scope::corner ? nt_ : 0; }
    int first_col() const noexcept { return scope_ == Scope::full ? 0 : nx_; }

    void require_data() const {
        if (!have_phi_) throw InvalidParams("goursat: boundary data not set");
        if (v4_.empty()) throw InvalidParams("goursat: forcing not set");
    }

    void build_series_tables() {
        const double a = coeffs_.a, b = coeffs_.b, d = params_.delta;
        const double al = params_.alpha, be = params_.beta;
        const SeriesPolicy& sp = opts_.series;
        gamma_g_ = std::tgamma(params_.gamma);
        const std::size_t NT = nt_ + 1, NX = nx_ + 1;
        e2_.assign(NT, 0.0);
        v1_ = detail::make_table(NT, NX);
        v2_ = detail::make_table(NT, NX);
        w3a_ = detail::make_table(nt_, NX);
        w3b_ = detail::make_table(nt_, NX);
        const int i_lo = first_row();
        const int l_lo = first_col();
        auto make = [&] { return detail::TeleSeries(params_); };

        // Rows in t: E2, V1 and V2 values.
        parallel_for(
            NT - i_lo, make, [&](detail::TeleSeries& s, std::size_t ii) {
                const int i = i_lo + static_cast<int>(ii);
                const double xa = a * tb_[i], za = d * std::pow(t_[i], al);
                e2_[i] = s.e2(xa, za, sp);
                for (int l = l_lo; l <= nx_; ++l) v1_[i][l] = s.v1(xa, b * x_[l], za, sp);
                for (int r = 0; r <= nx_; ++r) v2_[i][r] = s.v2(xa, b * r * hx_, za, sp);
            });

        // Lag kernels of the V3 integral: antiderivatives at s_k = k ht and cell weights.
        detail::Table P = detail::make_table(NT, NX), Q = detail::make_table(NT, NX);
        parallel_for(
            NT, make, [&](detail::TeleSeries& s, std::size_t kk) {
                const int k = static_cast<int>(kk);
                if (k == 0) return;
                const double sk = k * ht_;
                const double xa = a * std::pow(sk, be), za = d * std::pow(sk, al);
                for (int l = l_lo; l <= nx_; ++l) {
                    P[k][l] = std::pow(sk, be) * s.v3p(xa, b * x_[l], za, sp);
                    Q[k][l] = std::pow(sk, be + 1.0) * s.v3q(xa, b * x_[l], za, sp);
                }
            });
        for (int k = 0; k < nt_; ++k) {
            for (int l = l_lo; l <= nx_; ++l) {
                const auto w = kernel_cell_weights(k * ht_, (k + 1) * ht_, P[k][l], P[k + 1][l], Q[k][l], Q[k + 1][l]);
                w3a_[k][l] = w[0];
                w3b_[k][l] = w[1];
            }
        }
    }

    void build_forcing_tables() {
        if (!w4a_.empty()) return;
        const double a = coeffs_.a, b = coeffs_.b, d = params_.delta;
        const double al = params_.alpha, be = params_.beta;
        const SeriesPolicy& sp = opts_.series;
        const std::size_t NT = nt_ + 1, NX = nx_ + 1;
        detail::Table P = detail::make_table(NT, NX), Q = detail::make_table(NT, NX);
        parallel_for(
            NT, [&] { return detail::TeleSeries(params_); },
            [&](detail::TeleSeries& s, std::size_t kk) {
                const int k = static_cast<int>(kk);
                if (k == 0) return;
                const double sk = k * ht_;
                const double xa = a * std::pow(sk, be), za = d * std::pow(sk, al);
                for (int r = 0; r <= nx_; ++r) {
                    P[k][r] = std::pow(sk, be) * s.v4p(xa, b * r * hx_, za, sp);
                    Q[k][r] = std::pow(sk, be + 1.0) * s.v4q(xa, b * r * hx_, za, sp);
                }
            });
        w4a_ = detail::make_table(nt_, NX);
        w4b_ = detail::make_table(nt_, NX);
        for (int k = 0; k < nt_; ++k) {
            for (int r = 0; r <= nx_; ++r) {
                const auto w = kernel_cell_weights(k * ht_, (k + 1) * ht_, P[k][r], P[k + 1][r], Q[k][r], Q[k + 1][r]);
                w4a_[k][r] = w[0];
                w4b_[k][r] = w[1];
            }
        }
    }

    PrabhakarParams params_;
    TelegraphCoeffs coeffs_;
    GoursatOptions opts_;
    int nt_, nx_;
    Scope scope_;
    double ht_ = 0.0, hx_ = 0.0;
    double gamma_g_ = 1.0;
    std::vector<double> t_, x_, tb_;
    std::vector<double> e2_;
    detail::Table v1_, v2_;           // [i][l], [i][offset]
    detail::Table w3a_, w3b_;         // [lag cell][l]
    detail::Table w4a_, w4b_;         // [lag cell][offset]
    detail::Table v3sum_, v4_;        // [i][l]
    std::vector<double> phi_;
    bool have_phi_ = false;
    bool forcing_zero_ = true;
};

namespace detail {

inline void check_corner_consistency(double phi0, double tau0) {
    if (std::abs(phi0 - tau0) > 1e-8) {
        std::ostringstream os;
        os.precision(12);
        os << "goursat: phi(0) = " << phi0 << " differs from tau(0) = " << tau0 << " by more than 1e-8";
        throw InvalidData(os.str());
    }
}

}  // namespace detail

/// u(t, x) from the closed form. The inner integrals use quad.n_points uniform
/// cells on [0, t] and on [0, x].
inline double goursat_eval(const PrabhakarParams& params, const TelegraphCoeffs& coeffs, const RealFn& tau,
                           const RealFn& phi, const Forcing& f, double t, double x, const GoursatOptions& opts = {}) {
    opts.quad.validate();
    detail::check_corner_consistency(phi(0.0), tau(0.0));
    if (!(t >= 0.0 && x >= 0.0)) throw DomainError("goursat_eval requires t >= 0 and x >= 0");
    if (t == 0.0) return tau(x);
    if (x == 0.0) {
        // Only the x-independent terms survive; evaluate with a nominal x-extent.
        const int n = opts.quad.n_points;
        GoursatGrid g(params, coeffs, t, n, 1.0, 1, opts);
        g.set_boundary(phi);
        g.set_forcing(f);
        std::vector<double> tau_s = {tau(0.0), tau(1.0)};
        return g.assemble(n, 0, tau_s);
    }
    const int n = opts.quad.n_points;
    GoursatGrid g(params, coeffs, t, n, x, n, opts, GoursatGrid::Scope::corner);
    g.set_boundary(phi);
    g.set_forcing(f);
    std::vector<double> tau_s(g.x().size());
    for (std::size_t l = 0; l < tau_s.size(); ++l) tau_s[l] = tau(g.x()[l]);
    return g.assemble(n, n, tau_s);
}

inline double goursat_eval(const PrabhakarParams& params, const TelegraphCoeffs& coeffs, const TraceSolution& tau,
                           const RealFn& phi, const Forcing& f, double t, double x, const GoursatOptions& opts = {}) {
    return goursat_eval(params, coeffs, RealFn([&tau](double xv) { return tau(xv); }), phi, f, t, x, opts);
}

/// u on the uniform grid with nt x nx nodes over [0, q] x [0, p], row-major in t.
struct GoursatGridResult {
    std::vector<double> t, x, u;
};

inline GoursatGridResult goursat_grid(const PrabhakarParams& params, const TelegraphCoeffs& coeffs,
                                      const Domain2D& dom, const RealFn& tau, const RealFn& phi, const Forcing& f,
                                      int nt_nodes, int nx_nodes, const GoursatOptions& opts = {}) {
    dom.validate();
    detail::check_corner_consistency(phi(0.0), tau(0.0));
    if (nt_nodes < 2 || nx_nodes < 2) throw InvalidParams("goursat_grid needs at least 2 nodes per direction");
    GoursatGrid g(params, coeffs, dom.q, nt_nodes - 1, dom.p, nx_nodes - 1, opts);
    g.set_boundary(phi);
    g.set_forcing(f);
    std::vector<double> tau_s(g.x().size());
    for (std::size_t l = 0; l < tau_s.size(); ++l) tau_s[l] = tau(g.x()[l]);
    return {g.t(), g.x(), g.assemble_all(tau_s)};
}

}  // namespace prabhakar
