#include <gtest/gtest.h>

#include <cmath>

#include "prabhakar/oracle/quad.hpp"
#include "prabhakar/quadrature.hpp"

using namespace prabhakar;

TEST(PowerMoment, ClosedForms) {
    EXPECT_DOUBLE_EQ(power_moment(0.0, 0.0, 1.0, 0), 1.0);
    EXPECT_NEAR(power_moment(-0.5, 0.0, 1.0, 0), 2.0, 1e-15);
    EXPECT_NEAR(power_moment(-0.5, 0.0, 1.0, 1), 2.0 / 3.0, 1e-15);
    // Short cell: two Taylor terms are exact to rounding; h is the representable width.
    const double b = 0.5 + 1e-9, h = b - 0.5;
    EXPECT_NEAR(power_moment(0.3, 0.5, b, 0), std::pow(0.5, 0.3) * h * (1.0 + 0.3 * h), 1e-24);
}

TEST(PowerMoment, RejectsNonIntegrableExponent) {
    EXPECT_THROW(power_moment(-1.0, 0.0, 1.0, 0), DomainError);
    EXPECT_THROW(power_moment(0.0, 1.0, 0.5, 0), DomainError);
}

TEST(GradedMesh, NodesFollowPowerLaw) {
    const GradedMesh m = graded_mesh(2.0, 8, 2.0);
    ASSERT_EQ(m.nodes.size(), 9u);
    EXPECT_EQ(m.nodes.front(), 0.0);
    EXPECT_EQ(m.nodes.back(), 2.0);
    for (int i = 0; i <= 8; ++i) EXPECT_NEAR(m.nodes[i], 2.0 * std::pow(i / 8.0, 2.0), 1e-15);
    EXPECT_THROW(graded_mesh(1.0, 4, 0.5), InvalidParams);
}

TEST(BuildRule, UnweightedIsTrapezoid) {
    const WeightedRule r = build_rule(0.0, uniform_mesh(1.0, 2));
    ASSERT_EQ(r.weights.size(), 3u);
    EXPECT_DOUBLE_EQ(r.weights[0], 0.25);
    EXPECT_DOUBLE_EQ(r.weights[1], 0.5);
    EXPECT_DOUBLE_EQ(r.weights[2], 0.25);
}

TEST(BuildRule, ExactForLinearFunctions) {
    for (double grading : {1.0, 2.0, 3.0}) {
        const WeightedRule r = build_rule(-0.5, graded_mesh(1.0, 37, grading));
        EXPECT_NEAR(r.apply([](double) { return 1.0; }), 2.0, 1e-13);
        EXPECT_NEAR(r.apply([](double s) { return s; }), 2.0 / 3.0, 1e-13);
    }
}

TEST(BuildRule, WeightsNonNegativeForSingularWeights) {
    for (double w : {-0.9, -0.5, -0.1, 0.0}) {
        const WeightedRule r = build_rule(w, graded_mesh(1.5, 64, 2.0));
        for (double v : r.weights) EXPECT_GE(v, 0.0);
    }
}

TEST(BuildRule, SecondOrderAgainstOracle) {
    const auto f = [](double s) { return std::cos(3.0 * s); };
    const double ref = oracle::adaptive_quad<40>(std::function<double(double)>(f), 0.0, 1.0, -0.5).convert_to<double>();
    double prev = 0.0;
    for (int n : {16, 32, 64, 128}) {
        const double err = std::abs(build_rule(-0.5, graded_mesh(1.0, n, 2.0)).apply(f) - ref);
        if (prev > 0.0) {
            EXPECT_GT(prev / err, 3.5) << "n = " << n;
        }
        prev = err;
    }
}

TEST(TrapezoidWeights, SumToLength) {
    const std::vector<double> x = {0.0, 0.1, 0.5, 0.55, 2.0};
    double s = 0.0;
    for (double w : trapezoid_weights(x)) s += w;
    EXPECT_NEAR(s, 2.0, 1e-15);
}

TEST(KernelCellWeights, ReproduceLinearData) {
    // Kernel K = 1: P(s) = s, Q(s) = s^2 / 2, so int_a^b y = (b - a)(y_a + y_b) / 2.
    const double a = 0.2, b = 0.7;
    const auto w = kernel_cell_weights(a, b, a, b, 0.5 * a * a, 0.5 * b * b);
    EXPECT_NEAR(w[0], 0.25, 1e-15);
    EXPECT_NEAR(w[1], 0.25, 1e-15);
}
