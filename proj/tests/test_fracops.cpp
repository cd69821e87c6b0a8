#include <gtest/gtest.h>

#include <cmath>

#include "prabhakar/fracops.hpp"
#include "prabhakar/oracle.hpp"
#include "prabhakar/selftest.hpp"

using namespace prabhakar;

namespace {

const RealFn one = [](double) { return 1.0; };

// D t^nu = Gamma(nu + 1) t^{nu - b} E^{-g}_{a, nu + 1 - b}(d t^a).
double deriv_of_power(const PrabhakarParams& p, double nu, double t) {
    return std::tgamma(nu + 1.0) * std::pow(t, nu - p.beta) *
           ml_prabhakar(p.alpha, nu + 1.0 - p.beta, -p.gamma, p.delta * std::pow(t, p.alpha));
}

}  // namespace

TEST(PrabhakarParams, DerivativeRangeIsEnforced) {
    EXPECT_THROW((PrabhakarParams{1.0, 1.0, 0.5, 0.0}.validate_derivative()), InvalidParams);
    EXPECT_THROW((PrabhakarParams{1.0, 0.0, 0.5, 0.0}.validate_derivative()), InvalidParams);
    EXPECT_THROW((PrabhakarParams{0.0, 0.5, 0.5, 0.0}.validate()), InvalidParams);
    const PrabhakarParams k = PrabhakarParams{1.2, 0.3, 0.7, -2.0}.derivative_kernel();
    EXPECT_DOUBLE_EQ(k.beta, 0.7);
    EXPECT_DOUBLE_EQ(k.gamma, -0.7);
}

TEST(PrabhakarIntegral, OfOneMatchesOracleFixtures) {
    const auto doc = selftest::load_fixtures(PRABHAKAR_FIXTURES);
    for (const auto& c : doc["constants"]["prabhakar_integral_of_one"]) {
        const PrabhakarParams p{c["alpha"], c["beta"], c["gamma"], c["delta"]};
        const double I = prabhakar_integral(p, one, c["t"], QuadPolicy{});
        EXPECT_NEAR(I, std::stod(c["quadrature"].get<std::string>()), 1e-10);
        EXPECT_NEAR(I, selftest::fixture_value(c), 1e-10);
    }
}

TEST(PrabhakarIntegral, RiemannLiouvilleReductions) {
    const double t = 0.8, be = 0.35;
    const double rl = std::pow(t, be) / std::tgamma(be + 1.0);
    EXPECT_NEAR(prabhakar_integral({1.3, be, 0.0, -2.0}, one, t, QuadPolicy{}), rl, 1e-12);
    EXPECT_NEAR(prabhakar_integral({1.3, be, 1.7, 0.0}, one, t, QuadPolicy{}), rl, 1e-12);
}

TEST(PrabhakarIntegral, Linearity) {
    const PrabhakarParams p{0.9, 0.6, 0.8, -1.2};
    const RealFn y1 = [](double s) { return std::sin(s); }, y2 = [](double s) { return s * s; };
    const QuadPolicy q;
    const double lhs = prabhakar_integral(p, [&](double s) { return 2.0 * y1(s) - 3.0 * y2(s); }, 1.1, q);
    const double rhs = 2.0 * prabhakar_integral(p, y1, 1.1, q) - 3.0 * prabhakar_integral(p, y2, 1.1, q);
    EXPECT_NEAR(lhs, rhs, 10.0 * q.tol);
}

TEST(PrabhakarIntegral, SecondOrderAgainstOracleQuadrature) {
    const PrabhakarParams p{1.0, 0.5, 0.5, -1.0};
    const double t = 1.0;
    const RealFn y = [](double s) { return std::exp(-s) * std::cos(2.0 * s); };
    // Lag variable r = t - s puts the kernel singularity at the left end.
    const double ref = oracle::adaptive_quad<40>(
                           std::function<double(double)>([&](double r) {
                               return oracle::hp_ml_prabhakar<40>(p.alpha, p.beta, p.gamma, p.delta * r).convert_to<double>() *
                                      y(t - r);
                           }),
                           0.0, t, p.beta - 1.0, 1e-14)
                           .convert_to<double>();
    const PrabhakarKernel k(p, SeriesPolicy{});
    double prev = 0.0;
    for (int n : {8, 16, 32, 64}) {
        const double err = std::abs(detail::product_rule(k, y, t, n, 2.0) - ref);
        if (prev > 0.0) {
            EXPECT_GE(prev / err, 3.0) << "n = " << n;
        }
        prev = err;
    }
    EXPECT_NEAR(prabhakar_integral(p, y, t, QuadPolicy{}), ref, 1e-8);
}

TEST(PrabhakarIntegral, Errors) {
    EXPECT_THROW(prabhakar_integral({1, 0.5, 0.5, 0}, one, 0.0, QuadPolicy{}), DomainError);
    QuadPolicy bad;
    bad.n_points = 2;
    EXPECT_THROW(prabhakar_integral({1, 0.5, 0.5, 0}, one, 1.0, bad), InvalidParams);
    EXPECT_THROW(prabhakar_integral({1, -0.5, 0.5, 0}, one, 1.0, QuadPolicy{}), DomainError);
}

TEST(CaputoPrabhakar, ConstantHasZeroDerivative) {
    const PrabhakarParams p{1.0, 0.4, 0.7, -1.5};
    EXPECT_EQ(caputo_prabhakar_deriv(p, [](double) { return 0.0; }, 0.9, QuadPolicy{}), 0.0);
    EXPECT_LE(std::abs(caputo_prabhakar_deriv_fd(p, [](double) { return 3.0; }, 0.9, QuadPolicy{})), 1e-10);
}

TEST(CaputoPrabhakar, ClassicalCaputoOfIdentity) {
    const double be = 0.3, t = 0.75;
    const double ref = std::pow(t, 1.0 - be) / std::tgamma(2.0 - be);
    EXPECT_NEAR(caputo_prabhakar_deriv({1.0, be, 0.6, 0.0}, one, t, QuadPolicy{}), ref, 1e-12);
}

TEST(CaputoPrabhakar, IdentityWithGeneralParameters) {
    const PrabhakarParams p{0.8, 0.45, 1.3, -0.7};
    const double t = 1.2;
    const double ref = std::pow(t, 1.0 - p.beta) * ml_prabhakar(p.alpha, 2.0 - p.beta, -p.gamma, p.delta * std::pow(t, p.alpha));
    EXPECT_NEAR(caputo_prabhakar_deriv(p, one, t, QuadPolicy{}), ref, 1e-10);
    EXPECT_NEAR(caputo_prabhakar_deriv_fd(p, [](double s) { return s; }, t, QuadPolicy{}), ref, 1e-7);
}

TEST(CaputoPrabhakar, SharesCodeWithIntegral) {
    const PrabhakarParams p{1.1, 0.55, 0.35, -0.4};
    const RealFn dy = [](double s) { return std::cos(s); };
    EXPECT_EQ(caputo_prabhakar_deriv(p, dy, 0.9, QuadPolicy{}),
              prabhakar_integral(p.derivative_kernel(), dy, 0.9, QuadPolicy{}));
}

TEST(SampledDerivative, ConstantSamplesGiveZero) {
    const std::vector<double> c(40, -1.75);
    for (auto mode : {Reconstruction::linear, Reconstruction::singular_start}) {
        for (double v : caputo_prabhakar_deriv_sampled({1.0, 0.5, 0.5, -1.0}, c, 0.025, mode)) EXPECT_LE(std::abs(v), 1e-12);
    }
}

TEST(SampledDerivative, ReproducesQuadraticsInTPowerBeta) {
    const PrabhakarParams p{1.0, 0.5, 0.5, -1.0};
    const int n = 32;
    const double h = 1.0 / n;
    for (double nu : {0.5, 1.0}) {
        std::vector<double> u(n + 1);
        for (int i = 0; i <= n; ++i) u[i] = std::pow(i * h, nu);
        const auto d = caputo_prabhakar_deriv_sampled(p, u, h);
        for (int i = 1; i <= n; ++i) EXPECT_NEAR(d[i], deriv_of_power(p, nu, i * h), 1e-8) << "nu " << nu << " i " << i;
    }
}

TEST(SampledDerivative, ConvergesForSmoothData) {
    const PrabhakarParams p{1.0, 0.5, 0.5, -1.0};
    double prev = 0.0;
    for (int n : {16, 32, 64}) {
        const double h = 1.0 / n;
        std::vector<double> u(n + 1);
        for (int i = 0; i <= n; ++i) u[i] = std::pow(i * h, 2.0);
        const double err = std::abs(caputo_prabhakar_deriv_sampled(p, u, h)[n] - deriv_of_power(p, 2.0, 1.0));
        if (prev > 0.0) {
            EXPECT_GT(prev / err, 2.0);
        }
        prev = err;
    }
    EXPECT_LT(prev, 1e-3);
}
