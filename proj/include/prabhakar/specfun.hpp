#pragma once

// Mittag-Leffler type functions by controlled series summation:
//   E^g_{a,b}(z)           three-parameter (Prabhakar) Mittag-Leffler function
//   E_2(params | x, y)     bivariate Mittag-Leffler type function
//   F_E^(3)(params | x;y;z) trivariate Mittag-Leffler type function
//
// All denominator gammas go through a pole-safe reciprocal, so terms that hit
// a pole of Gamma vanish. Multivariate coefficients are tabulated in log-space
// (log|Gamma| plus a sign) and reused across evaluations of the same
// parameter set, which is what the Goursat and Volterra modules rely on.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <type_traits>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "prabhakar/errors.hpp"

namespace prabhakar {

struct SeriesPolicy {
    double rel_tol = 1e-12;
    int max_terms_per_index = 2000;
    int consecutive_small = 3;

    void validate() const {
        if (!(rel_tol > 0.0) || max_terms_per_index < 1 || consecutive_small < 1) {
            throw InvalidParams("SeriesPolicy requires rel_tol > 0, max_terms_per_index >= 1, "
                                "consecutive_small >= 1");
        }
    }
};

inline bool is_nonpositive_integer(double x) noexcept { return x <= 0.0 && x == std::floor(x); }

/// log|Gamma(x)| together with the sign of Gamma(x). `sign == 0` marks a pole.
struct SignedLog {
    double log_abs = 0.0;
    int sign = 1;

    bool is_zero() const noexcept { return sign == 0; }
};

inline SignedLog log_gamma(double x) noexcept {
    if (is_nonpositive_integer(x)) return {0.0, 0};
    int s = 1;
    const double l = ::lgamma_r(x, &s);
    return {l, s};
}

/// log|1/Gamma(x)| with sign; exactly zero (sign 0) at the poles of Gamma.
inline SignedLog log_rgamma(double x) noexcept {
    SignedLog g = log_gamma(x);
    if (g.is_zero()) return {-std::numeric_limits<double>::infinity(), 0};
    return {-g.log_abs, g.sign};
}

/// 1/Gamma(x); returns exactly 0 at non-positive integers.
inline double rgamma(double x) noexcept {
    if (is_nonpositive_integer(x)) return 0.0;
    if (x > 170.0 || x < -170.0) {
        const SignedLog g = log_gamma(x);
        return g.sign * std::exp(-g.log_abs);
    }
    return 1.0 / std::tgamma(x);
}

/// Rising factorial (g)_m = g (g+1) ... (g+m-1).
inline double pochhammer(double g, int m) {
    if (m < 0) throw InvalidParams("pochhammer: m must be non-negative");
    double p = 1.0;
    for (int i = 0; i < m; ++i) p *= g + i;
    return p;
}

namespace detail {

/// Neumaier-compensated accumulator.
class Accumulator {
public:
    void add(double v) noexcept {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Tracks the stop rule for one summation index: `needed` consecutive terms
/// that are negligible against the reference sum and not growing.
class StopRule {
public:
    StopRule(const SeriesPolicy& p) : policy_(p) {}

    bool update(double term_abs, double reference_abs) noexcept {
        const bool small = term_abs <= policy_.rel_tol * reference_abs && term_abs <= previous_;
        run_ = small ? run_ + 1 : 0;
        previous_ = term_abs;
        return run_ >= policy_.consecutive_small;
    }

private:
    const SeriesPolicy& policy_;
    double previous_ = std::numeric_limits<double>::infinity();
    int run_ = 0;
};

[[noreturn]] inline void throw_nonconvergence(const char* who, int cap) {
    std::ostringstream os;
    os << who << ": stop criterion not met within max_terms_per_index = " << cap;
    throw NonConvergence(os.str());
}

inline double checked_term(double v, const char* who) {
    if (!std::isfinite(v)) {
        throw NonConvergence(std::string(who) + ": series term overflow");
    }
    return v;
}

struct SignedLogArg {
    double log_abs;
    int sign;
    bool zero;
};

inline SignedLogArg split(double v) noexcept {
    if (v == 0.0) return {0.0, 1, true};
    return {std::log(std::abs(v)), v < 0 ? -1 : 1, false};
}

inline int sign_power(int s, std::size_t n) noexcept { return (s < 0 && (n & 1U)) ? -1 : 1; }

/// Inner indices stop on a tighter tolerance so that the many truncated
/// inner sums do not add up to more than rel_tol.
inline SeriesPolicy inner_policy(const SeriesPolicy& p) {
    SeriesPolicy q = p;
    q.rel_tol = p.rel_tol * 1e-3;
    return q;
}

/// True when summing terms of total magnitude `mass` into `sum` with unit
/// roundoff `unit` cannot be trusted to rel_tol.
inline bool ill_conditioned(double mass, double sum, double unit, const SeriesPolicy& p) {
    return mass * unit * 16.0 > p.rel_tol * std::abs(sum);
}

/// Heap slot that is rebuilt on demand and never shared between copies, so a
/// copied series can be handed to another worker thread.
template <class T>
class LazySlot {
public:
    LazySlot() = default;
    LazySlot(const LazySlot&) {}
    LazySlot& operator=(const LazySlot&) {
        ptr_.reset();
        return *this;
    }
    LazySlot(LazySlot&&) noexcept = default;
    LazySlot& operator=(LazySlot&&) noexcept = default;

    template <class... Args>
    T& get(Args&&... args) {
        if (!ptr_) ptr_ = std::make_unique<T>(std::forward<Args>(args)...);
        return *ptr_;
    }

private:
    std::unique_ptr<T> ptr_;
};

// Extended-precision re-summation. Ill-conditioned series are summed again
// in long double and, if that is still not enough, in 113-bit binary floating point.
using Quad = boost::multiprecision::cpp_bin_float_quad;

template <class R>
double to_double(const R& v) {
    if constexpr (std::is_floating_point_v<R>) {
        return static_cast<double>(v);
    } else {
        return v.template convert_to<double>();
    }
}

template <class R>
R ext_tgamma(const R& x) {
    using std::floor;
    if constexpr (std::is_floating_point_v<R>) {
        return std::tgamma(x);
    } else {
        return boost::math::tgamma(x);
    }
}

template <class R>
R ext_rgamma(const R& x) {
    using std::floor;
    if (x <= 0 && floor(x) == x) return R(0);
    return R(1) / ext_tgamma(x);
}

template <class R>
R ext_gamma(const R& x) {
    using std::floor;
    if (x <= 0 && floor(x) == x) throw InvalidParams("numerator Gamma(" + std::to_string(to_double(x)) + ") hits a pole");
    return ext_tgamma(x);
}

/// Unit roundoff of the extended types.
template <class R>
constexpr double unit_roundoff() {
    if constexpr (std::is_floating_point_v<R>) {
        return std::numeric_limits<R>::epsilon() / 2;
    } else {
        return 0x1p-113;
    }
}

/// Sum and absolute mass of an extended re-summation.
struct ExtendedResult {
    double value;
    double mass;
    bool finite;
};

/// Runs the long double tier and, when it is still ill-conditioned or
/// overflows, the 113-bit tier.
template <class Wide, class Quadx, class... Args>
double resum(LazySlot<Wide>& wide, LazySlot<Quadx>& quad, const auto& params, const SeriesPolicy& policy,
             Args... args) {
    const ExtendedResult w = wide.get(params).sum(args..., policy);
    if (w.finite && !ill_conditioned(w.mass, w.value, unit_roundoff<long double>(), policy)) return w.value;
    // Remaining cancellation (for instance an exact zero) leaves an absolute error of about mass * 1e-33.
    return quad.get(params).sum(args..., policy).value;
}

/// Plain summation of sum_m (g)_m z^m / (Gamma(a m + b) m!).
inline double ml_series(double alpha, double beta, double gamma, double z, const SeriesPolicy& policy) {
    if (z == 0.0) return rgamma(beta);
    const SignedLogArg lz = split(z);
    double log_coef = 0.0;  // log |(g)_m z^m / m!|
    int sign_coef = 1;
    bool coef_zero = false;
    Accumulator sum;
    StopRule stop(policy);
    for (int m = 0; m < policy.max_terms_per_index; ++m) {
        double term = 0.0;
        if (!coef_zero) {
            const SignedLog rg = log_rgamma(alpha * m + beta);
            if (!rg.is_zero()) {
                term = checked_term(sign_coef * rg.sign * std::exp(log_coef + rg.log_abs), "ml_prabhakar");
            }
        }
        sum.add(term);
        if (stop.update(std::abs(term), std::abs(sum.value())) || coef_zero) return sum.value();
        const double factor = gamma + m;
        if (factor == 0.0) {
            coef_zero = true;
        } else {
            log_coef += std::log(std::abs(factor)) + lz.log_abs - std::log(m + 1.0);
            sign_coef *= (factor < 0 ? -1 : 1) * lz.sign;
        }
    }
    throw_nonconvergence("ml_prabhakar", policy.max_terms_per_index);
}

}  // namespace detail

/// Three-parameter Mittag-Leffler function E^gamma_{alpha,beta}(z).
///
/// For alpha = 1 the function is a confluent hypergeometric function, and
/// negative arguments are mapped through Kummer's transformation
/// E^g_{1,b}(z) = e^z E^{b-g}_{1,b}(-z), which removes the cancellation of the
/// alternating series.
inline double ml_prabhakar(double alpha, double beta, double gamma, double z, const SeriesPolicy& policy = {}) {
    policy.validate();
    if (!(alpha > 0.0)) throw InvalidParams("ml_prabhakar requires alpha > 0");
    if (gamma == 0.0 || z == 0.0) return rgamma(beta);
    if (alpha == 1.0 && z < 0.0 && !is_nonpositive_integer(beta)) {
        return std::exp(z) * detail::ml_series(1.0, beta, beta - gamma, -z, policy);
    }
    return detail::ml_series(alpha, beta, gamma, z, policy);
}

// ---------------------------------------------------------------------------
// Bivariate function E_2
// ---------------------------------------------------------------------------

/// Parameters of E_2 in definition order
/// (alpha1, beta1, gamma1; alpha2, gamma2; alpha3, beta2, delta1; alpha4, delta2; beta3, delta3).
struct ML2Params {
    double a1 = 1, b1 = 1, g1 = 1;
    double a2 = 0, g2 = 1;
    double a3 = 1, b2 = 1, d1 = 1;
    double a4 = 1, d2 = 1;
    double b3 = 1, d3 = 1;
};

inline std::pair<double, double> discriminants2(const ML2Params& p) noexcept {
    return {p.a3 + p.a4 - p.a1 - p.a2, p.b2 + p.b3 - p.b1};
}

inline void validate(const ML2Params& p) {
    const auto [d1, d2] = discriminants2(p);
    if (!(d1 > 0.0)) {
        std::ostringstream os;
        os << "E2 discriminant Delta1 = a3 + a4 - a1 - a2 = " << d1 << " must be positive";
        throw InvalidParams(os.str());
    }
    if (!(d2 > 0.0)) {
        std::ostringstream os;
        os << "E2 discriminant Delta2 = b2 + b3 - b1 = " << d2 << " must be positive";
        throw InvalidParams(os.str());
    }
    // a2 = 0 is accepted: the factor Gamma(a2 m + g2) then reduces to the constant Gamma(g2).
    if (!(p.a1 > 0 && p.a3 > 0 && p.a4 > 0 && p.b1 > 0 && p.b2 > 0 && p.b3 > 0 && p.a2 >= 0)) {
        throw InvalidParams("E2 exponents a1, a3, a4, b1, b2, b3 must be positive and a2 non-negative");
    }
}

namespace detail {

/// E_2 re-summed in extended precision from its own coefficient tables.
template <class R>
class ExtendedMl2 {
public:
    explicit ExtendedMl2(const ML2Params& p) : p_(p) {
        norm_ = R(1) / (ext_gamma(R(p_.g1)) * ext_gamma(R(p_.g2)));
    }

    ExtendedResult sum(double x, double y, const SeriesPolicy& policy) {
        using std::abs;
        const SeriesPolicy inner = inner_policy(policy);
        const auto cap = static_cast<std::size_t>(policy.max_terms_per_index);
        const R X(x), Y(y);
        R total = 0, mass = 0, xm = 1;
        StopRule stop_m(policy);
        for (std::size_t m = 0; m < cap; ++m, xm *= X) {
            R slice = 0, slice_mass = 0, yk = 1;
            const R cm = row(m);
            if (cm != 0) {
                StopRule stop_k(inner);
                for (std::size_t k = 0;; ++k, yk *= Y) {
                    if (k >= cap) throw_nonconvergence("ml2", policy.max_terms_per_index);
                    const R term = norm_ * cm * coupled(m, k) * xm * yk;
                    slice += term;
                    slice_mass += abs(term);
                    const double ref = std::max(std::abs(to_double(slice)), std::abs(to_double(total + slice)));
                    if (y == 0.0 || stop_k.update(std::abs(to_double(term)), ref)) break;
                }
            }
            total += slice;
            mass += slice_mass;
            if (x == 0.0 || stop_m.update(to_double(slice_mass), std::abs(to_double(total)))) {
                const double v = to_double(total), w = to_double(mass);
                return {v, w, std::isfinite(v) && std::isfinite(w)};
            }
        }
        throw_nonconvergence("ml2", policy.max_terms_per_index);
    }

private:
    R row(std::size_t m) {
        while (rows_.size() <= m) {
            const R i(static_cast<double>(rows_.size()));
            rows_.push_back(ext_gamma(R(p_.a2) * i + R(p_.g2)) * ext_rgamma(R(p_.a4) * i + R(p_.d2)));
        }
        return rows_[m];
    }

    R coupled(std::size_t m, std::size_t k) {
        if (coupled_.size() <= m) coupled_.resize(m + 1);
        auto& r = coupled_[m];
        const R mm(static_cast<double>(m));
        while (r.size() <= k) {
            const R kk(static_cast<double>(r.size()));
            r.push_back(ext_gamma(R(p_.a1) * mm + R(p_.b1) * kk + R(p_.g1)) *
                        ext_rgamma(R(p_.a3) * mm + R(p_.b2) * kk + R(p_.d1)) * ext_rgamma(R(p_.b3) * kk + R(p_.d3)));
        }
        return r[k];
    }

    ML2Params p_;
    R norm_;
    std::vector<R> rows_;
    std::vector<std::vector<R>> coupled_;
};

}  // namespace detail

/// Prepared E_2 series: coefficient tables are grown on demand and reused by
/// later evaluations. Not thread-safe; give each worker its own copy.
///
/// When the absolute term mass dwarfs the sum (large negative arguments), the
/// double-precision result is discarded and the series is re-summed in
/// extended precision.
class Ml2Series {
public:
    explicit Ml2Series(const ML2Params& p) : p_(p) {
        validate(p_);
        const SignedLog rg1 = log_rgamma(p_.g1);
        const SignedLog rg2 = log_rgamma(p_.g2);
        const_zero_ = rg1.is_zero() || rg2.is_zero();
        const_log_ = const_zero_ ? 0.0 : rg1.log_abs + rg2.log_abs;
        const_sign_ = rg1.sign * rg2.sign;
    }

    const ML2Params& params() const noexcept { return p_; }

    double operator()(double x, double y, const SeriesPolicy& policy) {
        policy.validate();
        if (const_zero_) return 0.0;
        const detail::SignedLogArg lx = detail::split(x);
        const detail::SignedLogArg ly = detail::split(y);
        const SeriesPolicy inner = detail::inner_policy(policy);
        const auto cap = static_cast<std::size_t>(policy.max_terms_per_index);
        detail::Accumulator total;
        double mass = 0.0;
        detail::StopRule stop_m(policy);
        for (std::size_t m = 0;; ++m) {
            if (m >= cap) detail::throw_nonconvergence("ml2", policy.max_terms_per_index);
            const SignedLog& cm = row_factor(m);
            detail::Accumulator slice;
            double slice_mass = 0.0;  // slices may cancel while their terms are not yet negligible
            if (!cm.is_zero()) {
                const double base = const_log_ + cm.log_abs + (lx.zero ? 0.0 : m * lx.log_abs);
                const int base_sign = const_sign_ * cm.sign * detail::sign_power(lx.sign, m);
                detail::StopRule stop_k(inner);
                for (std::size_t k = 0;; ++k) {
                    if (k >= cap) detail::throw_nonconvergence("ml2", policy.max_terms_per_index);
                    const SignedLog& c = coupled(m, k);
                    double term = 0.0;
                    if (!c.is_zero()) {
                        term = detail::checked_term(
                            base_sign * c.sign * detail::sign_power(ly.sign, k) *
                                std::exp(base + c.log_abs + (ly.zero ? 0.0 : k * ly.log_abs)),
                            "ml2");
                    }
                    slice.add(term);
                    slice_mass += std::abs(term);
                    const double ref = std::max(std::abs(slice.value()), std::abs(total.value() + slice.value()));
                    if (ly.zero || stop_k.update(std::abs(term), ref)) break;
                }
            }
            total.add(slice.value());
            mass += slice_mass;
            if (lx.zero || stop_m.update(slice_mass, std::abs(total.value()))) break;
        }
        if (detail::ill_conditioned(mass, total.value(), 0x1p-53, policy)) {
            return detail::resum(wide_, quad_, p_, policy, x, y);
        }
        return total.value();
    }

private:
    // Gamma(a2 m + g2) / Gamma(a4 m + d2)
    const SignedLog& row_factor(std::size_t m) {
        while (rows_.size() <= m) {
            const std::size_t i = rows_.size();
            const SignedLog num = numerator_gamma(p_.a2 * i + p_.g2);
            const SignedLog den = log_rgamma(p_.a4 * i + p_.d2);
            rows_.push_back(den.is_zero() ? SignedLog{0.0, 0} : SignedLog{num.log_abs + den.log_abs, num.sign * den.sign});
        }
        return rows_[m];
    }

    // Gamma(a1 m + b1 k + g1) / (Gamma(a3 m + b2 k + d1) Gamma(b3 k + d3))
    const SignedLog& coupled(std::size_t m, std::size_t k) {
        if (coupled_.size() <= m) coupled_.resize(m + 1);
        auto& row = coupled_[m];
        while (row.size() <= k) {
            const std::size_t j = row.size();
            const SignedLog num = numerator_gamma(p_.a1 * m + p_.b1 * j + p_.g1);
            const SignedLog d1 = log_rgamma(p_.a3 * m + p_.b2 * j + p_.d1);
            const SignedLog d2 = log_rgamma(p_.b3 * j + p_.d3);
            if (d1.is_zero() || d2.is_zero()) {
                row.push_back({0.0, 0});
            } else {
                row.push_back({num.log_abs + d1.log_abs + d2.log_abs, num.sign * d1.sign * d2.sign});
            }
        }
        return row[k];
    }

    static SignedLog numerator_gamma(double arg) {
        SignedLog g = log_gamma(arg);
        if (g.is_zero()) {
            std::ostringstream os;
            os << "numerator Gamma(" << arg << ") hits a pole";
            throw InvalidParams(os.str());
        }
        return g;
    }

    ML2Params p_;
    bool const_zero_ = false;
    double const_log_ = 0.0;
    int const_sign_ = 1;
    std::vector<SignedLog> rows_;
    std::vector<std::vector<SignedLog>> coupled_;
    detail::LazySlot<detail::ExtendedMl2<long double>> wide_;
    detail::LazySlot<detail::ExtendedMl2<detail::Quad>> quad_;
};

inline double ml2(const ML2Params& params, double x, double y, const SeriesPolicy& policy = {}) {
    Ml2Series s(params);
    return s(x, y, policy);
}

// ---------------------------------------------------------------------------
// Trivariate function F_E^(3)
// ---------------------------------------------------------------------------

/// Parameters of F_E^(3) in definition order
/// (alpha1, beta1, delta1; alpha2, gamma1, delta2; alpha3, beta2, delta3; alpha4, delta4;
///  alpha5, delta5; beta3, delta6; gamma2, delta7; gamma3, delta8).
struct ML3Params {
    double a1 = 1, b1 = 1, d1 = 1;
    double a2 = 1, g1 = 1, d2 = 1;
    double a3 = 1, b2 = 1, d3 = 1;
    double a4 = 1, d4 = 1;
    double a5 = 1, d5 = 1;
    double b3 = 1, d6 = 1;
    double g2 = 1, d7 = 1;
    double g3 = 1, d8 = 1;
};

inline std::array<double, 3> discriminants3(const ML3Params& p) noexcept {
    return {p.a3 + p.a4 + p.a5 - p.a1 - p.a2, p.g2 + p.g3 - p.g1, p.b2 + p.b3 - p.b1};
}

inline void validate(const ML3Params& p) {
    const auto d = discriminants3(p);
    static constexpr const char* names[] = {"Delta1 = a3 + a4 + a5 - a1 - a2", "Delta2 = g2 + g3 - g1",
                                            "Delta3 = b2 + b3 - b1"};
    for (int i = 0; i < 3; ++i) {
        if (!(d[i] > 0.0)) {
            std::ostringstream os;
            os << "F3 discriminant " << names[i] << " = " << d[i] << " must be positive";
            throw InvalidParams(os.str());
        }
    }
    for (double e : {p.a1, p.a2, p.a3, p.a4, p.a5, p.b1, p.b2, p.b3, p.g1, p.g2, p.g3}) {
        if (!(e > 0.0)) throw InvalidParams("F3 exponents (a1..a5, b1..b3, g1..g3) must be positive");
    }
}

namespace detail {

/// F_E^(3) re-summed in extended precision from its own coefficient tables.
template <class R>
class ExtendedMl3 {
public:
    explicit ExtendedMl3(const ML3Params& p) : p_(p) {}

    ExtendedResult sum(double x, double y, double z, const SeriesPolicy& policy) {
        using std::abs;
        const SeriesPolicy inner = inner_policy(policy);
        const auto cap = static_cast<std::size_t>(policy.max_terms_per_index);
        const R X(x), Y(y), Z(z);
        R total = 0, mass = 0, xm = 1;
        StopRule stop_m(policy);
        for (std::size_t m = 0; m < cap; ++m, xm *= X) {
            R slice_m = 0, mass_m = 0, yj = 1;
            const R fm = m_factor(m);
            if (fm != 0) {
                StopRule stop_j(inner);
                for (std::size_t j = 0;; ++j, yj *= Y) {
                    if (j >= cap) throw_nonconvergence("ml3", policy.max_terms_per_index);
                    R slice_j = 0, mass_j = 0, zk = 1;
                    const R base = fm * j_factor(j) * mj_factor(m, j) * xm * yj;
                    if (base != 0) {
                        StopRule stop_k(inner);
                        for (std::size_t k = 0;; ++k, zk *= Z) {
                            if (k >= cap) throw_nonconvergence("ml3", policy.max_terms_per_index);
                            const R term = base * mk_factor(m, k) * zk;
                            slice_j += term;
                            mass_j += abs(term);
                            const double ref = std::max(std::abs(to_double(slice_j)),
                                                        std::abs(to_double(total + slice_m + slice_j)));
                            if (z == 0.0 || stop_k.update(std::abs(to_double(term)), ref)) break;
                        }
                    }
                    slice_m += slice_j;
                    mass_m += mass_j;
                    const double ref =
                        std::max(std::abs(to_double(slice_m)), std::abs(to_double(total + slice_m)));
                    if (y == 0.0 || stop_j.update(to_double(mass_j), ref)) break;
                }
            }
            total += slice_m;
            mass += mass_m;
            if (x == 0.0 || stop_m.update(to_double(mass_m), std::abs(to_double(total)))) {
                const double v = to_double(total), w = to_double(mass);
                return {v, w, std::isfinite(v) && std::isfinite(w)};
            }
        }
        throw_nonconvergence("ml3", policy.max_terms_per_index);
    }

private:
    template <class F>
    static R grow(std::vector<R>& v, std::size_t n, F&& f) {
        while (v.size() <= n) v.push_back(f(R(static_cast<double>(v.size()))));
        return v[n];
    }

    R m_factor(std::size_t m) {
        return grow(m_, m, [&](const R& i) {
            return ext_rgamma(R(p_.a4) * i + R(p_.d4)) * ext_rgamma(R(p_.a5) * i + R(p_.d5));
        });
    }
    R j_factor(std::size_t j) {
        return grow(j_, j, [&](const R& i) {
            return ext_rgamma(R(p_.g2) * i + R(p_.d7)) * ext_rgamma(R(p_.g3) * i + R(p_.d8));
        });
    }
    R mj_factor(std::size_t m, std::size_t j) {
        if (mj_.size() <= m) mj_.resize(m + 1);
        const R mm(static_cast<double>(m));
        return grow(mj_[m], j, [&](const R& jj) { return ext_gamma(R(p_.a2) * mm + R(p_.g1) * jj + R(p_.d2)); });
    }
    R mk_factor(std::size_t m, std::size_t k) {
        if (mk_.size() <= m) mk_.resize(m + 1);
        const R mm(static_cast<double>(m));
        return grow(mk_[m], k, [&](const R& kk) {
            const R den = ext_rgamma(R(p_.a3) * mm + R(p_.b2) * kk + R(p_.d3)) * ext_rgamma(R(p_.b3) * kk + R(p_.d6));
            return den == 0 ? R(0) : ext_gamma(R(p_.a1) * mm + R(p_.b1) * kk + R(p_.d1)) * den;
        });
    }

    ML3Params p_;
    std::vector<R> m_, j_;
    std::vector<std::vector<R>> mj_, mk_;
};

}  // namespace detail

/// Prepared F_E^(3) series; same sharing rules as Ml2Series.
///
/// Summation order is m (x) outermost, then j (y), then k (z); each index
/// stops on its own once `consecutive_small` successive contributions are
/// negligible against the running total. Ill-conditioned sums fall back to
/// extended precision as in Ml2Series.
class Ml3Series {
public:
    explicit Ml3Series(const ML3Params& p) : p_(p) { validate(p_); }

    const ML3Params& params() const noexcept { return p_; }

    double operator()(double x, double y, double z, const SeriesPolicy& policy) {
        policy.validate();
        const auto cap = static_cast<std::size_t>(policy.max_terms_per_index);
        const SeriesPolicy inner = detail::inner_policy(policy);
        const detail::SignedLogArg lx = detail::split(x);
        const detail::SignedLogArg ly = detail::split(y);
        const detail::SignedLogArg lz = detail::split(z);
        detail::Accumulator total;
        double mass = 0.0;
        detail::StopRule stop_m(policy);
        for (std::size_t m = 0;; ++m) {
            if (m >= cap) detail::throw_nonconvergence("ml3", policy.max_terms_per_index);
            detail::Accumulator slice_m;
            double mass_m = 0.0;
            const SignedLog& fm = m_factor(m);
            if (!fm.is_zero()) {
                detail::StopRule stop_j(inner);
                for (std::size_t j = 0;; ++j) {
                    if (j >= cap) detail::throw_nonconvergence("ml3", policy.max_terms_per_index);
                    detail::Accumulator slice_j;
                    double mass_j = 0.0;
                    const SignedLog& fj = j_factor(j);
                    const SignedLog& fmj = mj_factor(m, j);
                    if (!fj.is_zero()) {
                        const double base = fm.log_abs + fj.log_abs + fmj.log_abs +
                                            (lx.zero ? 0.0 : m * lx.log_abs) + (ly.zero ? 0.0 : j * ly.log_abs);
                        const int base_sign = fm.sign * fj.sign * fmj.sign * detail::sign_power(lx.sign, m) *
                                              detail::sign_power(ly.sign, j);
                        detail::StopRule stop_k(inner);
                        for (std::size_t k = 0;; ++k) {
                            if (k >= cap) detail::throw_nonconvergence("ml3", policy.max_terms_per_index);
                            const SignedLog& c = mk_factor(m, k);
                            double term = 0.0;
                            if (!c.is_zero()) {
                                term = detail::checked_term(
                                    base_sign * c.sign * detail::sign_power(lz.sign, k) *
                                        std::exp(base + c.log_abs + (lz.zero ? 0.0 : k * lz.log_abs)),
                                    "ml3");
                            }
                            slice_j.add(term);
                            mass_j += std::abs(term);
                            const double ref = std::max(
                                std::abs(slice_j.value()),
                                std::abs(total.value() + slice_m.value() + slice_j.value()));
                            if (lz.zero || stop_k.update(std::abs(term), ref)) break;
                        }
                    }
                    slice_m.add(slice_j.value());
                    mass_m += mass_j;
                    const double ref = std::max(std::abs(slice_m.value()), std::abs(total.value() + slice_m.value()));
                    if (ly.zero || stop_j.update(mass_j, ref)) break;
                }
            }
            total.add(slice_m.value());
            mass += mass_m;
            if (lx.zero || stop_m.update(mass_m, std::abs(total.value()))) break;
        }
        if (detail::ill_conditioned(mass, total.value(), 0x1p-53, policy)) {
            return detail::resum(wide_, quad_, p_, policy, x, y, z);
        }
        return total.value();
    }

private:
    static SignedLog numerator_gamma(double arg) {
        SignedLog g = log_gamma(arg);
        if (g.is_zero()) {
            std::ostringstream os;
            os << "numerator Gamma(" << arg << ") hits a pole";
            throw InvalidParams(os.str());
        }
        return g;
    }

    static SignedLog product(std::initializer_list<SignedLog> parts) {
        SignedLog out{0.0, 1};
        for (const auto& s : parts) {
            if (s.is_zero()) return {0.0, 0};
            out.log_abs += s.log_abs;
            out.sign *= s.sign;
        }
        return out;
    }

    // 1 / (Gamma(a4 m + d4) Gamma(a5 m + d5))
    const SignedLog& m_factor(std::size_t m) {
        while (m_.size() <= m) {
            const double i = static_cast<double>(m_.size());
            m_.push_back(product({log_rgamma(p_.a4 * i + p_.d4), log_rgamma(p_.a5 * i + p_.d5)}));
        }
        return m_[m];
    }

    // 1 / (Gamma(g2 j + d7) Gamma(g3 j + d8))
    const SignedLog& j_factor(std::size_t j) {
        while (j_.size() <= j) {
            const double i = static_cast<double>(j_.size());
            j_.push_back(product({log_rgamma(p_.g2 * i + p_.d7), log_rgamma(p_.g3 * i + p_.d8)}));
        }
        return j_[j];
    }

    // Gamma(a2 m + g1 j + d2)
    const SignedLog& mj_factor(std::size_t m, std::size_t j) {
        if (mj_.size() <= m) mj_.resize(m + 1);
        auto& row = mj_[m];
        while (row.size() <= j) {
            const double jj = static_cast<double>(row.size());
            row.push_back(numerator_gamma(p_.a2 * static_cast<double>(m) + p_.g1 * jj + p_.d2));
        }
        return row[j];
    }

    // Gamma(a1 m + b1 k + d1) / (Gamma(a3 m + b2 k + d3) Gamma(b3 k + d6))
    const SignedLog& mk_factor(std::size_t m, std::size_t k) {
        if (mk_.size() <= m) mk_.resize(m + 1);
        auto& row = mk_[m];
        while (row.size() <= k) {
            const double kk = static_cast<double>(row.size());
            const double mm = static_cast<double>(m);
            const SignedLog den = product({log_rgamma(p_.a3 * mm + p_.b2 * kk + p_.d3), log_rgamma(p_.b3 * kk + p_.d6)});
            if (den.is_zero()) {
                row.push_back({0.0, 0});
            } else {
                row.push_back(product({numerator_gamma(p_.a1 * mm + p_.b1 * kk + p_.d1), den}));
            }
        }
        return row[k];
    }

    ML3Params p_;
    std::vector<SignedLog> m_, j_;
    std::vector<std::vector<SignedLog>> mj_, mk_;
    detail::LazySlot<detail::ExtendedMl3<long double>> wide_;
    detail::LazySlot<detail::ExtendedMl3<detail::Quad>> quad_;
};

inline double ml3(const ML3Params& params, double x, double y, double z, const SeriesPolicy& policy = {}) {
    Ml3Series s(params);
    return s(x, y, z, policy);
}

}  // namespace prabhakar
