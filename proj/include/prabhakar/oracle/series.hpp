#pragma once

// Reference summation of the Mittag-Leffler type series in MPFR arithmetic.
//
// Terms are grouped in shells of constant total degree and summed until a
// geometric estimate of the remaining tail drops below 10^(-digits/2).
// Nothing here calls the production special functions.

#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "prabhakar/errors.hpp"
#include "prabhakar/specfun.hpp"

namespace prabhakar::oracle {

template <unsigned Digits>
using Big = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<Digits>,
                                          boost::multiprecision::et_off>;
using BigReal = Big<60>;

inline constexpr int kMaxShells = 4000;

namespace hp {

template <class T>
bool at_pole(const T& x) {
    return x <= 0 && floor(x) == x;
}

/// 1/Gamma(x), exactly zero at the poles.
template <class T>
T rgamma(const T& x) {
    if (at_pole(x)) return T(0);
    return T(1) / tgamma(x);
}

template <class T>
T numerator_gamma(const T& x, const char* who) {
    if (at_pole(x)) {
        std::ostringstream os;
        os << who << ": numerator Gamma(" << x.str(10) << ") hits a pole";
        throw InvalidParams(os.str());
    }
    return tgamma(x);
}

template <class T>
T tail_threshold(unsigned digits) {
    return pow(T(10), -T(int(digits)) / 2);
}

/// Shell bookkeeping: decides when the geometric tail estimate is small enough.
template <class T>
class ShellStop {
public:
    explicit ShellStop(unsigned digits) : eps_(tail_threshold<T>(digits)) {}

    // `mass` is the sum of |term| over the shell just completed.
    bool done(const T& mass) {
        ++shells_;
        bool stop = false;
        if (shells_ > 3 && mass == 0 && prev_ == 0) stop = true;
        if (shells_ > 3 && prev_ > 0 && mass < prev_) {
            const T r = mass / prev_;
            if (mass * r / (1 - r) < eps_ && mass < eps_) stop = true;
        }
        prev_ = mass;
        // Two consecutive small shells guard against a shell emptied by denominator poles.
        hits_ = stop ? hits_ + 1 : 0;
        return hits_ >= 2;
    }

private:
    T eps_;
    T prev_ = T(-1);
    int shells_ = 0;
    int hits_ = 0;
};

[[noreturn]] inline void fail(const char* who) {
    throw NonConvergence(std::string(who) + ": tail bound not reached within " + std::to_string(kMaxShells) +
                         " shells");
}

}  // namespace hp

/// sum_m (g)_m z^m / (Gamma(a m + b) m!) with the Pochhammer symbol built from gammas.
template <unsigned Digits = 60>
Big<Digits> hp_ml_prabhakar(double alpha, double beta, double gamma, double z) {
    using T = Big<Digits>;
    if (!(alpha > 0)) throw InvalidParams("hp_ml_prabhakar requires alpha > 0");
    const T a(alpha), b(beta), g(gamma), zz(z);
    T sum = 0, zm = 1, poch = 1, fact = 1;
    hp::ShellStop<T> stop(Digits);
    for (int m = 0; m < kMaxShells * 10; ++m) {
        const T term = poch * zm * hp::rgamma(a * m + b) / fact;
        sum += term;
        if (stop.done(abs(term))) return sum;
        poch *= g + m;
        zm *= zz;
        fact *= m + 1;
    }
    hp::fail("hp_ml_prabhakar");
}

/// Reference E_2 with coefficient tables cached across calls.
template <unsigned Digits = 60>
class HpMl2 {
public:
    using T = Big<Digits>;

    explicit HpMl2(const ML2Params& p) : p_(p) { validate(p_); }

    T operator()(double x, double y) {
        const T X(x), Y(y);
        std::vector<T> xp{T(1)}, yp{T(1)};
        T sum = 0;
        hp::ShellStop<T> stop(Digits);
        for (int n = 0; n < kMaxShells; ++n) {
            grow(static_cast<std::size_t>(n));
            if (n > 0) {
                xp.push_back(xp.back() * X);
                yp.push_back(yp.back() * Y);
            }
            T mass = 0;
            for (int m = 0; m <= n; ++m) {
                const int k = n - m;
                const T term = coef_[m][k] * xp[m] * yp[k];
                sum += term;
                mass += abs(term);
            }
            if (stop.done(mass)) return sum;
        }
        hp::fail("hp_ml2");
    }

private:
    // Ensure coef_[m][k] exists for m + k <= n.
    void grow(std::size_t n) {
        const T a1(p_.a1), b1(p_.b1), g1(p_.g1), a2(p_.a2), g2(p_.g2), a3(p_.a3), b2(p_.b2), d1(p_.d1), a4(p_.a4),
            d2(p_.d2), b3(p_.b3), d3(p_.d3);
        if (coef_.empty()) norm_ = 1 / (hp::numerator_gamma(g1, "hp_ml2") * hp::numerator_gamma(g2, "hp_ml2"));
        while (coef_.size() <= n) coef_.emplace_back();
        for (std::size_t m = 0; m <= n; ++m) {
            auto& row = coef_[m];
            const T mm(static_cast<double>(m));
            const T fm = hp::numerator_gamma(a2 * mm + g2, "hp_ml2") * hp::rgamma(a4 * mm + d2);
            while (row.size() + m <= n) {
                const T kk(static_cast<double>(row.size()));
                row.push_back(norm_ * fm * hp::numerator_gamma(a1 * mm + b1 * kk + g1, "hp_ml2") *
                              hp::rgamma(a3 * mm + b2 * kk + d1) * hp::rgamma(b3 * kk + d3));
            }
        }
    }

    ML2Params p_;
    T norm_ = 1;
    std::vector<std::vector<T>> coef_;
};

template <unsigned Digits = 60>
Big<Digits> hp_ml2(const ML2Params& p, double x, double y) {
    return HpMl2<Digits>(p)(x, y);
}

/// Reference trivariate series; separable factor tables are cached.
template <unsigned Digits = 60>
class HpMl3 {
public:
    using T = Big<Digits>;

    explicit HpMl3(const ML3Params& p) : p_(p) { validate(p_); }

    T operator()(double x, double y, double z) {
        const T X(x), Y(y), Z(z);
        std::vector<T> xp{T(1)}, yp{T(1)}, zp{T(1)};
        T sum = 0;
        hp::ShellStop<T> stop(Digits);
        for (int n = 0; n < kMaxShells; ++n) {
            grow(static_cast<std::size_t>(n));
            if (n > 0) {
                xp.push_back(xp.back() * X);
                yp.push_back(yp.back() * Y);
                zp.push_back(zp.back() * Z);
            }
            T mass = 0;
            for (int m = 0; m <= n; ++m) {
                if (fm_[m] == 0) continue;
                for (int j = 0; j + m <= n; ++j) {
                    const int k = n - m - j;
                    const T term = fm_[m] * fj_[j] * fk_[k] * gmj_[m][j] * gmk_[m][k] * xp[m] * yp[j] * zp[k];
                    sum += term;
                    mass += abs(term);
                }
            }
            if (stop.done(mass)) return sum;
        }
        hp::fail("hp_ml3");
    }

private:
    void grow(std::size_t n) {
        const auto& p = p_;
        auto big = [](double v) { return T(v); };
        while (fm_.size() <= n) {
            const T m(static_cast<double>(fm_.size()));
            fm_.push_back(hp::rgamma(big(p.a4) * m + big(p.d4)) * hp::rgamma(big(p.a5) * m + big(p.d5)));
        }
        while (fj_.size() <= n) {
            const T j(static_cast<double>(fj_.size()));
            fj_.push_back(hp::rgamma(big(p.g2) * j + big(p.d7)) * hp::rgamma(big(p.g3) * j + big(p.d8)));
        }
        while (fk_.size() <= n) {
            const T k(static_cast<double>(fk_.size()));
            fk_.push_back(hp::rgamma(big(p.b3) * k + big(p.d6)));
        }
        while (gmj_.size() <= n) gmj_.emplace_back();
        while (gmk_.size() <= n) gmk_.emplace_back();
        for (std::size_t mi = 0; mi <= n; ++mi) {
            const T m(static_cast<double>(mi));
            while (gmj_[mi].size() + mi <= n) {
                const T j(static_cast<double>(gmj_[mi].size()));
                gmj_[mi].push_back(hp::numerator_gamma(big(p.a2) * m + big(p.g1) * j + big(p.d2), "hp_ml3"));
            }
            while (gmk_[mi].size() + mi <= n) {
                const T k(static_cast<double>(gmk_[mi].size()));
                gmk_[mi].push_back(hp::numerator_gamma(big(p.a1) * m + big(p.b1) * k + big(p.d1), "hp_ml3") *
                                   hp::rgamma(big(p.a3) * m + big(p.b2) * k + big(p.d3)));
            }
        }
    }

    ML3Params p_;
    std::vector<T> fm_, fj_, fk_;
    std::vector<std::vector<T>> gmj_, gmk_;
};

template <unsigned Digits = 60>
Big<Digits> hp_ml3(const ML3Params& p, double x, double y, double z) {
    return HpMl3<Digits>(p)(x, y, z);
}

}  // namespace prabhakar::oracle
