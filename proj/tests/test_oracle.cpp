#include <gtest/gtest.h>

#include <cmath>

#include "prabhakar/oracle.hpp"
#include "prabhakar/selftest.hpp"

using namespace prabhakar;
using oracle::Big;

namespace {

const nlohmann::json& fixtures() {
    static const nlohmann::json doc = selftest::load_fixtures(PRABHAKAR_FIXTURES);
    return doc;
}

template <class T>
T rel(const T& v, const T& ref) {
    return abs(v - ref) / abs(ref);
}

}  // namespace

TEST(OracleSeries, OriginIsGammaRatio) {
    using T = Big<60>;
    ML2Params p;
    p.g1 = 1.5, p.g2 = 2.5, p.d1 = 0.5, p.d2 = 1.25, p.d3 = 3.0;
    const T ref = tgamma(T(1.5)) * tgamma(T(2.5)) / (tgamma(T(1.5)) * tgamma(T(2.5)) * tgamma(T(0.5)) *
                                                   tgamma(T(1.25)) * tgamma(T(3.0)));
    EXPECT_LT(rel(oracle::hp_ml2(p, 0.0, 0.0), ref), T("1e-30"));
    EXPECT_LT(rel(oracle::hp_ml_prabhakar(1.0, 1.0, 1.0, 1.0), exp(T(1))), T("1e-30"));
}

TEST(OracleSeries, ReproducesStoredConstants) {
    const auto& c = fixtures()["constants"];
    const auto& e2 = c["ml2_telegraph"];
    const auto v2 = oracle::hp_ml2(selftest::ml2_from_vector(e2["params"].get<std::vector<double>>()), e2["x"], e2["y"]);
    EXPECT_LT(rel(v2, Big<60>(e2["value"].get<std::string>())), Big<60>("1e-28"));
    const auto& e3 = c["ml3_v1"];
    const auto v3 =
        oracle::hp_ml3(selftest::ml3_from_vector(e3["params"].get<std::vector<double>>()), e3["x"], e3["y"], e3["z"]);
    EXPECT_LT(rel(v3, Big<60>(e3["value"].get<std::string>())), Big<60>("1e-28"));
}

TEST(OracleSeries, ReproducesSampleFixtures) {
    int checked = 0;
    for (const auto& s : fixtures()["ml2_samples"]) {
        if (checked++ % 10) continue;
        const auto v = oracle::hp_ml2(selftest::ml2_from_vector(s["params"].get<std::vector<double>>()), s["x"], s["y"]);
        EXPECT_LT(rel(v, Big<60>(s["value"].get<std::string>())), Big<60>("1e-28"));
    }
    for (const auto& s : fixtures()["ml3_samples"]) {
        if (checked++ % 10) continue;
        const auto v =
            oracle::hp_ml3(selftest::ml3_from_vector(s["params"].get<std::vector<double>>()), s["x"], s["y"], s["z"]);
        EXPECT_LT(rel(v, Big<60>(s["value"].get<std::string>())), Big<60>("1e-28"));
    }
}

TEST(OracleSeries, PrecisionInvariant) {
    const ML2Params p = selftest::ml2_from_vector(fixtures()["constants"]["ml2_telegraph"]["params"].get<std::vector<double>>());
    const Big<60> lo = oracle::hp_ml2<60>(p, -0.9, -0.4);
    const Big<90> hi = oracle::hp_ml2<90>(p, -0.9, -0.4);
    EXPECT_LT(abs(lo.convert_to<long double>() - hi.convert_to<long double>()) / abs(hi.convert_to<long double>()),
              1e-17L);
    EXPECT_LT(abs(Big<90>(lo) - hi) / abs(hi), Big<90>("1e-25"));
}

TEST(OracleSeries, PolesAreRejected) {
    ML2Params p;
    p.g1 = -1.0;
    EXPECT_THROW(oracle::hp_ml2(p, 0.1, 0.1), InvalidParams);
}

TEST(OracleQuad, PanelIsExactForPolynomials) {
    using T = Big<60>;
    const auto& g = oracle::hpq::panel<60>();
    const T v = g.integrate([](const T& s) { return pow(s, 39); }, T(0), T(1));
    EXPECT_LT(abs(v - T(1) / 40), T("1e-50"));
}

TEST(OracleQuad, EndpointWeightIsAbsorbed) {
    using T = Big<60>;
    const std::function<T(const T&)> f = [](const T& s) { return cos(s); };
    // int_0^1 s^{-1/2} cos(s) ds = sqrt(2 pi) C(sqrt(2 / pi)); compare against the series sum (-1)^k / ((2k)! (2k + 1/2)).
    T ref = 0, fact = 1;
    for (int k = 0; k < 40; ++k) {
        if (k > 0) fact *= T(2 * k - 1) * T(2 * k);
        ref += (k % 2 ? -1 : 1) / (fact * (2 * k + T(0.5)));
    }
    EXPECT_LT(abs(oracle::adaptive_quad<60>(f, 0.0, 1.0, -0.5, 1e-40) - ref), T("1e-35"));
    EXPECT_THROW(oracle::adaptive_quad<60>(f, 0.0, 1.0, -1.0), DomainError);
}

TEST(OracleFd, ExactForUndampedEquation) {
    // a = b = 0, f = 0: u = tau(x) + phi(t) - phi(0) solves u_tx = 0.
    const auto phi = [](double t) { return 1.0 + std::sin(t); };
    const auto tau = [](double x) { return 1.0 + x * x; };
    const auto g = oracle::classical_telegraph_fd(0.0, 0.0, 1.0, 1.0, phi, tau, [](double, double) { return 0.0; }, 17);
    for (std::size_t i = 0; i < g.t.size(); ++i)
        for (std::size_t l = 0; l < g.x.size(); ++l) EXPECT_NEAR(g.at(i, l), tau(g.x[l]) + phi(g.t[i]) - 1.0, 1e-13);
}

TEST(OracleFd, SecondOrderConvergence) {
    // Manufactured u = 1 + sin(t) cos(x) with a = b = -1.
    const double a = -1.0, b = -1.0;
    const auto u = [](double t, double x) { return std::sin(t) * std::cos(x) + 1.0; };
    const auto f = [&](double t, double x) {
        const double utx = -std::cos(t) * std::sin(x), ux = -std::sin(t) * std::sin(x), ut = std::cos(t) * std::cos(x);
        return utx - a * ux - b * ut;
    };
    const auto phi = [&](double t) { return u(t, 0.0); };
    const auto tau = [&](double x) { return u(0.0, x); };
    double prev = 0.0;
    for (int n : {17, 33, 65}) {
        const auto g = oracle::classical_telegraph_fd(a, b, 1.0, 1.0, phi, tau, f, n);
        double err = 0.0;
        for (std::size_t i = 0; i < g.t.size(); ++i)
            for (std::size_t l = 0; l < g.x.size(); ++l) err = std::max(err, std::abs(g.at(i, l) - u(g.t[i], g.x[l])));
        if (prev > 0.0) {
            EXPECT_NEAR(prev / err, 4.0, 0.5) << "n " << n;
        }
        prev = err;
    }
}
