#pragma once

// Reference quadrature in MPFR arithmetic: adaptive bisection with a 20-point
// Gauss-Legendre panel rule whose nodes are computed here by Newton iteration.

#include <boost/math/constants/constants.hpp>

#include <functional>
#include <vector>

#include "prabhakar/errors.hpp"
#include "prabhakar/oracle/series.hpp"

namespace prabhakar::oracle {

template <unsigned Digits>
struct GaussPanel {
    using T = Big<Digits>;
    static constexpr int kPoints = 20;
    std::vector<T> x, w;  // nodes and weights on [-1, 1]

    GaussPanel() {
        const T pi = boost::math::constants::pi<T>();
        const T eps = pow(T(10), -T(int(Digits)) + 5);
        for (int i = 1; i <= kPoints; ++i) {
            T r = cos(pi * (i - T(0.25)) / (kPoints + T(0.5)));
            T dp = 0;
            for (int it = 0; it < 100; ++it) {
                T p0 = 1, p1 = r;
                for (int k = 2; k <= kPoints; ++k) {
                    const T p2 = ((2 * k - 1) * r * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = kPoints * (r * p1 - p0) / (r * r - 1);
                const T step = p1 / dp;
                r -= step;
                if (abs(step) < eps) break;
            }
            x.push_back(r);
            w.push_back(2 / ((1 - r * r) * dp * dp));
        }
    }

    T integrate(const std::function<T(const T&)>& f, const T& a, const T& b) const {
        const T c = (a + b) / 2, h = (b - a) / 2;
        T s = 0;
        for (int i = 0; i < kPoints; ++i) s += w[i] * f(c + h * x[i]);
        return s * h;
    }
};

namespace hpq {

template <unsigned Digits>
const GaussPanel<Digits>& panel() {
    static const GaussPanel<Digits> p;
    return p;
}

template <unsigned Digits>
Big<Digits> bisect(const std::function<Big<Digits>(const Big<Digits>&)>& f, const Big<Digits>& a,
                   const Big<Digits>& b, const Big<Digits>& whole, const Big<Digits>& tol, int depth) {
    const auto& g = panel<Digits>();
    const Big<Digits> c = (a + b) / 2;
    const Big<Digits> left = g.integrate(f, a, c), right = g.integrate(f, c, b);
    if (abs(left + right - whole) <= tol) return left + right;
    if (depth >= 60) throw QuadratureFailure("adaptive_quad: bisection depth exhausted");
    return bisect<Digits>(f, a, c, left, tol / 2, depth + 1) + bisect<Digits>(f, c, b, right, tol / 2, depth + 1);
}

}  // namespace hpq

/// int_a^b (s - a)^w f(s) ds for w > -1.
///
/// The substitution s = a + (b - a) u^(1/(w+1)) absorbs the endpoint weight,
/// leaving int_0^1 f(.) du scaled by (b - a)^(w+1) / (w + 1).
template <unsigned Digits = 60>
Big<Digits> adaptive_quad(const std::function<Big<Digits>(const Big<Digits>&)>& f, double a, double b,
                          double weight_exponent = 0.0, double abs_tol = 1e-20) {
    using T = Big<Digits>;
    if (!(weight_exponent > -1.0)) throw DomainError("adaptive_quad requires weight exponent > -1");
    if (!(b > a)) throw DomainError("adaptive_quad requires a < b");
    const T A(a), L = T(b) - T(a), e = T(weight_exponent) + 1;
    std::function<T(const T&)> g;
    if (weight_exponent == 0.0) {
        g = [&](const T& u) { return f(A + L * u); };
    } else {
        g = [&](const T& u) { return f(A + L * pow(u, 1 / e)); };
    }
    const T scale = pow(L, e) / e;
    const T tol = T(abs_tol) / abs(scale);
    const T whole = hpq::panel<Digits>().integrate(g, T(0), T(1));
    return scale * hpq::bisect<Digits>(g, T(0), T(1), whole, tol, 0);
}

/// Convenience overload for double-valued integrands.
template <unsigned Digits = 60>
Big<Digits> adaptive_quad(const std::function<double(double)>& f, double a, double b, double weight_exponent = 0.0,
                          double abs_tol = 1e-13) {
    using T = Big<Digits>;
    return adaptive_quad<Digits>(std::function<T(const T&)>([&](const T& s) { return T(f(s.template convert_to<double>())); }),
                                 a, b, weight_exponent, abs_tol);
}

}  // namespace prabhakar::oracle
