#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ruinprob/model.hpp"

using namespace ruinprob;

TEST(Premium, BuiltInValuesAndDerivatives) {
  const auto lin = PremiumFunction::linear(1.0, 0.5);
  EXPECT_DOUBLE_EQ(lin(4.0), 3.0);
  EXPECT_DOUBLE_EQ(lin.d1(4.0), 0.5);
  EXPECT_DOUBLE_EQ(lin.d2(4.0), 0.0);

  const auto poly = PremiumFunction::polynomial(2.0, {0.5, 0.25, 0.125});
  const double u = 1.7;
  EXPECT_NEAR(poly(u), 2.0 + 0.5 * u + 0.25 * u * u + 0.125 * u * u * u, 1e-14);
  EXPECT_NEAR(poly.d1(u), 0.5 + 0.5 * u + 0.375 * u * u, 1e-14);
  EXPECT_NEAR(poly.d2(u), 0.5 + 0.75 * u, 1e-14);
  EXPECT_NEAR(poly.d3(u), 0.75, 1e-14);

  const auto ratl = PremiumFunction::rational(1.0, 1.0);
  EXPECT_DOUBLE_EQ(ratl(1.0), 1.5);
  EXPECT_DOUBLE_EQ(ratl.d1(1.0), -0.25);
  EXPECT_DOUBLE_EQ(ratl.d2(1.0), 0.25);
  EXPECT_DOUBLE_EQ(ratl.d3(1.0), -6.0 / 16.0);
  EXPECT_DOUBLE_EQ(ratl.limit_at_infinity(), 1.0);
}

TEST(Premium, DerivativesMatchFiniteDifferences) {
  const PremiumFunction ps[] = {PremiumFunction::linear(1.0, 0.3), PremiumFunction::polynomial(1.0, {0.2, 0.05}),
                                PremiumFunction::rational(2.0, -0.5), PremiumFunction::constant(3.0)};
  for (const auto& p : ps) {
    for (double u : {0.3, 2.0, 11.0}) {
      const double h = 1e-4;
      EXPECT_NEAR(p.d1(u), (p(u + h) - p(u - h)) / (2 * h), 1e-7);
      EXPECT_NEAR(p.d2(u), (p.d1(u + h) - p.d1(u - h)) / (2 * h), 1e-7);
      EXPECT_NEAR(p.d3(u), (p.d2(u + h) - p.d2(u - h)) / (2 * h), 1e-7);
    }
  }
}

TEST(Premium, ParseGrammar) {
  EXPECT_EQ(parse_premium("const:1").kind(), PremiumKind::constant);
  EXPECT_EQ(parse_premium("linear:1,0.5").kind(), PremiumKind::linear);
  EXPECT_EQ(parse_premium("poly:1,0.5,0.1").coefficients().size(), 2u);
  EXPECT_EQ(parse_premium("ratl:1,2").kind(), PremiumKind::bounded_p1);
  for (const char* bad : {"const", "const:", "const:x", "linear:1", "poly:1", "ratl:1,-1", "cubic:1",
                          "linear:1,-0.5", "const:0", "const:1,2"}) {
    EXPECT_THROW(parse_premium(bad), Error) << bad;
  }
  for (const char* s : {"const:1.5", "linear:1,0.5", "poly:2,0.25,0.125", "ratl:1,-0.25"}) {
    EXPECT_EQ(parse_premium(parse_premium(s).spec()).spec(), parse_premium(s).spec());
  }
}

TEST(Premium, CustomRequiresPositivity) {
  auto p = [](double u) { return 1.0 - u; };
  auto dp = [](double) { return -1.0; };
  auto d2 = [](double) { return 0.0; };
  EXPECT_THROW(PremiumFunction::custom(PremiumClass::p2, p, dp, d2), Error);
}

TEST(Classify, Examples) {
  EXPECT_EQ(classify_premium(PremiumFunction::constant(2.0)), PremiumClass::constant);
  EXPECT_EQ(classify_premium(PremiumFunction::linear(1.0, 0.5)), PremiumClass::p2);
  EXPECT_EQ(classify_premium(PremiumFunction::polynomial(1.0, {0.5, 0.1})), PremiumClass::p2);
  EXPECT_EQ(classify_premium(PremiumFunction::rational(1.0, 1.0)), PremiumClass::p1);
}

TEST(Classify, CustomProbes) {
  auto p1 = PremiumFunction::custom(
      PremiumClass::p1, [](double u) { return 1.0 + std::exp(-u); }, [](double u) { return -std::exp(-u); },
      [](double u) { return std::exp(-u); }, 1.0);
  EXPECT_EQ(classify_premium(p1), PremiumClass::p1);

  auto quad = PremiumFunction::custom(
      PremiumClass::p2, [](double u) { return 1.0 + u * u; }, [](double u) { return 2.0 * u; },
      [](double) { return 2.0; });
  EXPECT_EQ(classify_premium(quad), PremiumClass::p2);

  // p' = O(u^-3/2) is not P1; growth is too slow for P2 as well.
  auto slow = PremiumFunction::custom(
      PremiumClass::p1, [](double u) { return 2.0 - 1.0 / std::sqrt(1.0 + u); },
      [](double u) { return 0.5 * std::pow(1.0 + u, -1.5); }, [](double u) { return -0.75 * std::pow(1.0 + u, -2.5); });
  EXPECT_THROW(classify_premium(slow), Error);

  auto mislabelled = PremiumFunction::custom(
      PremiumClass::p1, [](double u) { return 1.0 + u; }, [](double) { return 1.0; }, [](double) { return 0.0; });
  try {
    classify_premium(mislabelled);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::classification);
  }
}

TEST(Classify, Idempotent) {
  for (const char* s : {"const:1", "linear:1,0.5", "poly:1,1,1", "ratl:3,-1"}) {
    const auto p = parse_premium(s);
    EXPECT_EQ(classify_premium(p), classify_premium(p));
    EXPECT_EQ(classify_premium(p), p.declared_class());
  }
}

TEST(SafeLoad, Examples) {
  const auto a = safe_load_check(ModelSpec(ModelCase::exp_exp, 1.0, 2.0, PremiumFunction::constant(1.0)));
  EXPECT_TRUE(a.satisfied);
  EXPECT_DOUBLE_EQ(a.margin, 0.5);

  const auto b = safe_load_check(ModelSpec(ModelCase::erlang2_exp, 1.0, 2.0, PremiumFunction::constant(1.0)));
  EXPECT_TRUE(b.satisfied);
  EXPECT_DOUBLE_EQ(b.margin, 2.0 - 0.5);

  const auto c = safe_load_check(ModelSpec(ModelCase::exp_erlang2, 1.0, 1.0, PremiumFunction::constant(1.0)));
  EXPECT_EQ(c.regime, SafeLoadRegime::one_negative_root);
  EXPECT_FALSE(c.satisfied);
  EXPECT_DOUBLE_EQ(c.margin, 0.5 - 1.0);

  const auto d = safe_load_check(ModelSpec(ModelCase::exp_erlang2, 1.0, 1.0, PremiumFunction::constant(3.0)));
  EXPECT_EQ(d.regime, SafeLoadRegime::two_negative_roots);
  EXPECT_TRUE(d.satisfied);
}

TEST(SafeLoad, BoundaryIsAnError) {
  try {
    safe_load_check(ModelSpec(ModelCase::exp_erlang2, 1.0, 2.0, PremiumFunction::constant(1.0)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::boundary);
  }
  EXPECT_THROW(safe_load_check(ModelSpec(ModelCase::exp_exp, 2.0, 2.0, PremiumFunction::constant(1.0))), Error);
}

TEST(SafeLoad, UsesLimitOfBoundedPremium) {
  // p(inf) = 1 fails exp-exp net profit for lambda = 3, mu = 2 even though p(0) = 4.
  const auto r = safe_load_check(ModelSpec(ModelCase::exp_exp, 3.0, 2.0, PremiumFunction::rational(1.0, 3.0)));
  EXPECT_FALSE(r.satisfied);
  EXPECT_DOUBLE_EQ(r.c, 1.0);
}

TEST(SafeLoad, UnboundedPremiumAlwaysSatisfied) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(0.01, 100.0);
  const ModelCase cases[] = {ModelCase::exp_exp, ModelCase::erlang2_exp, ModelCase::exp_erlang2};
  for (int i = 0; i < 200; ++i) {
    const ModelSpec m(cases[i % 3], d(rng), d(rng),
                      i % 2 ? PremiumFunction::linear(d(rng), d(rng)) : PremiumFunction::polynomial(d(rng), {d(rng), d(rng)}));
    const auto r = safe_load_check(m);
    EXPECT_TRUE(r.satisfied);
    EXPECT_EQ(r.regime, SafeLoadRegime::unbounded_premium);
  }
}

TEST(ModelSpec, Validation) {
  EXPECT_THROW(ModelSpec(ModelCase::exp_exp, 0.0, 1.0, PremiumFunction::constant(1.0)), Error);
  EXPECT_THROW(ModelSpec(ModelCase::exp_exp, 1.0, -1.0, PremiumFunction::constant(1.0)), Error);
  EXPECT_EQ(parse_model_case("erlang2-exp"), ModelCase::erlang2_exp);
  EXPECT_THROW(parse_model_case("erlang3-exp"), Error);
}
