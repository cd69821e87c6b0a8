#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>

#include "prabhakar/expr.hpp"

using namespace prabhakar;
using expr::Expr;
using expr::Var;

TEST(Parse, ArithmeticAndPrecedence) {
    EXPECT_DOUBLE_EQ(expr::parse("2+3*t")(4.0), 14.0);
    EXPECT_NEAR(expr::parse("exp(-t)*x^2")(1.0, 2.0), 4.0 / std::exp(1.0), 1e-15);
    EXPECT_DOUBLE_EQ(expr::parse("-t^2")(3.0), -9.0);
    EXPECT_DOUBLE_EQ(expr::parse("2^3^2")(0.0), 512.0);
    EXPECT_DOUBLE_EQ(expr::parse("pi")(0.0), M_PI);
    EXPECT_DOUBLE_EQ(expr::parse("e")(0.0), std::exp(1.0));
    EXPECT_DOUBLE_EQ(expr::parse("pow(x, 3) - sqrt(t) + abs(-2)")(4.0, 2.0), 8.0);
    EXPECT_DOUBLE_EQ(expr::parse("1.5e1 / (2)")(0.0), 7.5);
}

TEST(Parse, ErrorsCarryOffsets) {
    try {
        expr::parse("2+*3");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.offset(), 2u);
    }
    EXPECT_THROW(expr::parse("2t"), ParseError);
    EXPECT_THROW(expr::parse(""), ParseError);
    EXPECT_THROW(expr::parse("sin(t"), ParseError);
    EXPECT_THROW(expr::parse("foo(t)"), ParseError);
    EXPECT_THROW(expr::parse("y + 1"), ParseError);
    EXPECT_THROW(expr::parse("pow(t)"), ParseError);
}

TEST(Eval, DomainFaults) {
    EXPECT_THROW(expr::parse("1/ (t-1)")(1.0), EvalError);
    EXPECT_THROW(expr::parse("ln(t)")(0.0), EvalError);
    EXPECT_THROW(expr::parse("sqrt(t)")(-1.0), EvalError);
}

TEST(Differentiate, BasicRules) {
    EXPECT_EQ(expr::parse("t^2").differentiate(Var::t).render(), "2*t");
    EXPECT_EQ(expr::parse("exp(-t)").differentiate(Var::t).render(), "-exp(-t)");
    EXPECT_EQ(expr::parse("x").differentiate(Var::t).render(), "0");
    EXPECT_TRUE(expr::parse("x").differentiate(Var::t).is_zero());
    EXPECT_THROW(expr::parse("abs(t)").differentiate(Var::t), NonDifferentiable);
}

TEST(Differentiate, DependsOn) {
    const Expr e = expr::parse("sin(t) + 3");
    EXPECT_TRUE(e.depends_on(Var::t));
    EXPECT_FALSE(e.depends_on(Var::x));
}

namespace {

// Random expressions of bounded depth on which every function is smooth near the samples.
std::string random_expr(std::mt19937& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 9);
    std::uniform_real_distribution<double> num(0.5, 2.0);
    switch (pick(rng)) {
        case 0: return "t";
        case 1: return "x";
        case 2: return std::to_string(num(rng));
        case 3: return "(" + random_expr(rng, depth - 1) + " + " + random_expr(rng, depth - 1) + ")";
        case 4: return "(" + random_expr(rng, depth - 1) + " - " + random_expr(rng, depth - 1) + ")";
        case 5: return "(" + random_expr(rng, depth - 1) + " * " + random_expr(rng, depth - 1) + ")";
        case 6: return "(" + random_expr(rng, depth - 1) + " / (2 + sin(" + random_expr(rng, depth - 1) + ")))";
        case 7: return "exp(sin(" + random_expr(rng, depth - 1) + "))";
        case 8: return "sqrt(1 + (" + random_expr(rng, depth - 1) + ")^2)";
        default: return "cos(" + random_expr(rng, depth - 1) + ")";
    }
}

}  // namespace

TEST(Differentiate, MatchesFiniteDifferences) {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> pt(0.2, 1.5);
    for (int trial = 0; trial < 40; ++trial) {
        const Expr e = expr::parse(random_expr(rng, 5));
        for (Var v : {Var::t, Var::x}) {
            const Expr d = e.differentiate(v);
            for (int k = 0; k < 20; ++k) {
                const double t = pt(rng), x = pt(rng), h = 1e-5;
                const double fd = v == Var::t ? (e(t + h, x) - e(t - h, x)) / (2 * h) : (e(t, x + h) - e(t, x - h)) / (2 * h);
                const double exact = d(t, x);
                EXPECT_NEAR(exact, fd, 1e-6 * std::max(1.0, std::abs(exact))) << e.render();
            }
        }
    }
}

TEST(Render, RoundTripEvaluatesIdentically) {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> pt(0.2, 1.5);
    for (int trial = 0; trial < 60; ++trial) {
        const Expr e = expr::parse(random_expr(rng, 5));
        const Expr r = expr::parse(e.render());
        for (int k = 0; k < 10; ++k) {
            const double t = pt(rng), x = pt(rng);
            EXPECT_EQ(e(t, x), r(t, x)) << e.render();
        }
    }
}
