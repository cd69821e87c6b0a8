#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "prabhakar/goursat.hpp"
#include "prabhakar/selftest.hpp"
#include "prabhakar/specfun.hpp"

using namespace prabhakar;

namespace {

const nlohmann::json& fixtures() {
    static const nlohmann::json doc = selftest::load_fixtures(PRABHAKAR_FIXTURES);
    return doc;
}

double rel(double v, double ref) { return std::abs(v - ref) / std::abs(ref); }

}  // namespace

TEST(Rgamma, KnownValues) {
    EXPECT_DOUBLE_EQ(rgamma(1.0), 1.0);
    EXPECT_EQ(rgamma(0.0), 0.0);
    EXPECT_EQ(rgamma(-3.0), 0.0);
    EXPECT_NEAR(rgamma(0.5), 0.564189583547756, 1e-15);
    EXPECT_NEAR(rgamma(-0.5), -1.0 / (2.0 * std::sqrt(M_PI)), 1e-15);
}

TEST(Rgamma, LargeArgumentsStayFinite) {
    EXPECT_GT(rgamma(171.5), 0.0);
    EXPECT_TRUE(std::isfinite(rgamma(-170.5)));
    EXPECT_NEAR(rgamma(150.0) * std::tgamma(150.0), 1.0, 1e-12);
    EXPECT_GE(rgamma(200.0), 0.0);
}

TEST(Pochhammer, ProductRecurrence) {
    EXPECT_EQ(pochhammer(3.0, 2), 12.0);
    EXPECT_EQ(pochhammer(0.7, 0), 1.0);
    EXPECT_EQ(pochhammer(0.0, 5), 0.0);
    EXPECT_NEAR(pochhammer(-0.5, 3), -0.5 * 0.5 * 1.5, 1e-15);
}

TEST(SeriesPolicy, RejectsInvalidFields) {
    SeriesPolicy p;
    p.rel_tol = 0;
    EXPECT_THROW(p.validate(), InvalidParams);
    p = {};
    p.max_terms_per_index = 0;
    EXPECT_THROW(p.validate(), InvalidParams);
    p = {};
    p.consecutive_small = 0;
    EXPECT_THROW(p.validate(), InvalidParams);
}

TEST(MittagLeffler, ClassicalReductions) {
    EXPECT_NEAR(ml_prabhakar(1, 1, 1, 1), 2.718281828459045, 1e-15);
    EXPECT_NEAR(ml_prabhakar(2, 1, 1, 1), 1.543080634815244, 1e-15);
    EXPECT_NEAR(ml_prabhakar(1.3, 0.7, 2.5, 0.0), rgamma(0.7), 1e-16);
    EXPECT_NEAR(ml_prabhakar(0.8, 1.7, 0.0, -4.0), rgamma(1.7), 1e-16);
}

TEST(MittagLeffler, ExponentialOverRange) {
    for (int i = 0; i < 50; ++i) {
        const double z = -20.0 + 25.0 * i / 49.0;
        EXPECT_LT(rel(ml_prabhakar(1, 1, 1, z), std::exp(z)), 1e-10) << "z = " << z;
    }
}

TEST(MittagLeffler, HyperbolicCosineReduction) {
    for (int i = 0; i < 50; ++i) {
        const double z = -20.0 + 25.0 * i / 49.0;
        const double ref = z >= 0 ? std::cosh(std::sqrt(z)) : std::cos(std::sqrt(-z));
        EXPECT_LT(rel(ml_prabhakar(2, 1, 1, z), ref), 1e-10) << "z = " << z;
    }
}

TEST(MittagLeffler, ValueAtZeroTimesGammaIsOne) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> a(0.1, 3.0), b(0.1, 5.0), g(-2.0, 3.0);
    for (int i = 0; i < 100; ++i) {
        const double be = b(rng);
        EXPECT_NEAR(ml_prabhakar(a(rng), be, g(rng), 0.0) * std::tgamma(be), 1.0, 1e-12);
    }
}

TEST(MittagLeffler, NonConvergenceIsReported) {
    SeriesPolicy p;
    p.max_terms_per_index = 3;
    EXPECT_THROW(ml_prabhakar(1, 1, 1, 1, p), NonConvergence);
    EXPECT_THROW(ml_prabhakar(0.0, 1, 1, 1), InvalidParams);
}

TEST(MittagLeffler, MonotoneTruncation) {
    SeriesPolicy small, big;
    small.max_terms_per_index = 200;
    big.max_terms_per_index = 4000;
    for (double z : {-5.0, -1.0, 0.5, 3.0}) {
        const double a = ml_prabhakar(0.9, 1.2, 0.6, z, small), b = ml_prabhakar(0.9, 1.2, 0.6, z, big);
        EXPECT_LE(rel(a, b), small.rel_tol);
    }
}

TEST(Discriminants, TelegraphInstances) {
    const PrabhakarParams pp{1.3, 0.4, 0.7, -1.0};
    const auto [d1, d2] = discriminants2(ml2_tele(pp));
    EXPECT_DOUBLE_EQ(d1, 0.4);
    EXPECT_DOUBLE_EQ(d2, 1.3);
    const auto d = discriminants3(ml3_tele_variant(Variant::V1, {1.3, 0.4, 0.4, -1.0}));
    EXPECT_DOUBLE_EQ(d[0], 0.4);
    EXPECT_DOUBLE_EQ(d[1], 1.0);
    EXPECT_DOUBLE_EQ(d[2], 1.3);
}

TEST(Discriminants, ZeroDeltaIsRejected) {
    ML2Params p;
    p.a1 = 1.0, p.a2 = 0.5, p.a3 = 1.0, p.a4 = 0.5;
    EXPECT_DOUBLE_EQ(discriminants2(p).first, 0.0);
    try {
        ml2(p, 0.1, 0.1);
        FAIL() << "expected InvalidParams";
    } catch (const InvalidParams& e) {
        EXPECT_NE(std::string(e.what()).find("Delta1"), std::string::npos);
    }
    ML3Params q;
    q.g1 = 2.0;
    EXPECT_THROW(ml3(q, 0.1, 0.1, 0.1), InvalidParams);
}

TEST(Ml2, OriginIsGammaRatio) {
    ML2Params p;
    p.d1 = 1.5, p.d2 = 2.5, p.d3 = 0.75;
    EXPECT_NEAR(ml2(p, 0.0, 0.0), rgamma(1.5) * rgamma(2.5) * rgamma(0.75), 1e-15);
}

TEST(Ml2, SeparableCaseIsAProduct) {
    // a1 = a3, g1 = d1, b1 = b2: the coupled ratio cancels and the series factorizes.
    ML2Params p;
    p.a1 = p.a3 = 0.8, p.g1 = p.d1 = 1.4, p.b1 = p.b2 = 0.9;
    p.a2 = 0.3, p.g2 = 1.2, p.a4 = 1.1, p.d2 = 0.7, p.b3 = 1.0, p.d3 = 1.3;
    const double x = -0.7, y = 0.6;
    double sx = 0.0, sy = 0.0;
    for (int m = 0; m < 80; ++m) {
        sx += std::tgamma(p.a2 * m + p.g2) * rgamma(p.a4 * m + p.d2) * std::pow(x, m);
        sy += rgamma(p.b3 * m + p.d3) * std::pow(y, m);
    }
    EXPECT_LT(rel(ml2(p, x, y), sx * sy / (std::tgamma(p.g1) * std::tgamma(p.g2))), 1e-12);
}

TEST(Ml2, TelegraphValueMatchesOracleFixture) {
    const auto& c = fixtures()["constants"]["ml2_telegraph"];
    const ML2Params p = selftest::ml2_from_vector(c["params"].get<std::vector<double>>());
    EXPECT_LT(rel(ml2(p, c["x"], c["y"]), selftest::fixture_value(c)), 1e-12);
}

TEST(Ml2, PositiveOnTelegraphInstance) {
    for (int k = 1; k <= 9; ++k) {
        const double be = 0.1 * k;
        Ml2Series e2(ml2_tele({1.0, be, be, -1.0}));
        for (int i = 1; i <= 20; ++i) {
            const double t = i / 20.0;
            EXPECT_GT(e2(-std::pow(t, be), -t, SeriesPolicy{}), 0.0) << "beta " << be << " t " << t;
        }
    }
}

TEST(Ml3, OriginIsGammaRatio) {
    ML3Params p;
    p.d1 = 1.5, p.d2 = 2.0, p.d3 = 0.5, p.d4 = 1.25, p.d5 = 2.0, p.d6 = 3.0, p.d7 = 1.1, p.d8 = 0.9;
    const double ref = std::tgamma(1.5) * std::tgamma(2.0) * rgamma(0.5) * rgamma(1.25) * rgamma(2.0) * rgamma(3.0) *
                       rgamma(1.1) * rgamma(0.9);
    EXPECT_NEAR(ml3(p, 0, 0, 0), ref, 1e-15);
}

TEST(Ml3, SingleSeriesWhenYAndZVanish) {
    const ML3Params p = ml3_tele_variant(Variant::V3, {1.0, 0.6, 0.8, -1.0});
    const double x = -1.3;
    double s = 0.0;
    for (int m = 0; m < 60; ++m) {
        const double term = std::tgamma(p.a1 * m + p.d1) * std::tgamma(p.a2 * m + p.d2) * std::pow(x, m) *
                            rgamma(p.a3 * m + p.d3) * rgamma(p.a4 * m + p.d4) * rgamma(p.a5 * m + p.d5);
        s += term;
        if (m > 5 && std::abs(term) < 1e-20 * std::abs(s)) break;
    }
    s *= rgamma(p.d6) * rgamma(p.d7) * rgamma(p.d8);
    EXPECT_LT(rel(ml3(p, x, 0, 0), s), 1e-12);
}

TEST(Ml3, V1ValueMatchesOracleFixture) {
    const auto& c = fixtures()["constants"]["ml3_v1"];
    const ML3Params p = selftest::ml3_from_vector(c["params"].get<std::vector<double>>());
    EXPECT_LT(rel(ml3(p, c["x"], c["y"], c["z"]), selftest::fixture_value(c)), 1e-12);
}

TEST(Ml3, ExactZeroSumIsReturned) {
    // V1 at (0, -1, 0) sums (j + 1)(-1)^j / j! over j, which is exactly zero.
    const ML3Params p = ml3_tele_variant(Variant::V1, {1.0, 0.5, 0.5, -1.0});
    EXPECT_NEAR(ml3(p, 0.0, -1.0, 0.0), 0.0, 1e-14);
}

TEST(OracleFixtures, ProductionSeriesAgreeOnAllSamples) {
    double worst2 = 0.0, worst3 = 0.0;
    std::size_t n = 0;
    for (const auto& s : fixtures()["ml2_samples"]) {
        const ML2Params p = selftest::ml2_from_vector(s["params"].get<std::vector<double>>());
        worst2 = std::max(worst2, rel(ml2(p, s["x"], s["y"]), selftest::fixture_value(s)));
        ++n;
    }
    for (const auto& s : fixtures()["ml3_samples"]) {
        const ML3Params p = selftest::ml3_from_vector(s["params"].get<std::vector<double>>());
        worst3 = std::max(worst3, rel(ml3(p, s["x"], s["y"], s["z"]), selftest::fixture_value(s)));
        ++n;
    }
    EXPECT_GE(n, 200u);
    EXPECT_LT(worst2, 1e-9);
    EXPECT_LT(worst3, 1e-9);
}

TEST(Ml3, LemmaRegimeGridIsBounded) {
    // Variant sets with a5 >= 1, d5 >= 1 on negative arguments: every value is finite; the grid
    // maximum is the empirical bound constant.
    double C = 0.0;
    for (Variant v : {Variant::V1, Variant::V2, Variant::V3, Variant::V4}) {
        Ml3Series s(ml3_tele_variant(v, {1.0, 0.5, 0.5, -1.0}));
        for (int i = 1; i <= 10; ++i) {
            for (int j = 1; j <= 10; ++j) {
                for (int k = 1; k <= 10; ++k) {
                    const double val = s(-0.1 * i, -0.1 * j, -0.1 * k, SeriesPolicy{});
                    ASSERT_TRUE(std::isfinite(val));
                    C = std::max(C, std::abs(val));
                }
            }
        }
    }
    RecordProperty("empirical_bound_C", std::to_string(C));
    EXPECT_LT(C, 10.0);
}
