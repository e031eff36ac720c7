#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ruinprob/analysis.hpp"
#include "ruinprob/bvp.hpp"

using namespace ruinprob;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::invalid_argument;
}

// exp(max - min) - 1 of f - g over a grid.
double log_spread(const std::vector<double>& grid, auto&& f, auto&& g) {
  double lo = INFINITY, hi = -INFINITY;
  for (double u : grid) {
    const double d = f(u) - g(u);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  return std::expm1(hi - lo);
}

RuinCurve curve_from_logs(const std::vector<double>& grid, auto&& log_psi) {
  RuinCurve c;
  for (double u : grid) {
    RuinPoint p;
    p.u = u;
    p.log_psi = log_psi(u);
    p.psi = std::exp(p.log_psi);
    c.points.push_back(p);
  }
  return c;
}

}  // namespace

TEST(Envelope, ExpExpLinearShape) {
  const double c = 1.0, eps = 0.5, lam = 1.0, mu = 2.0;
  const auto f = envelope(ModelSpec(ModelCase::exp_exp, lam, mu, PremiumFunction::linear(c, eps)));
  EXPECT_EQ(f.premium_class, EnvelopeClass::linear);
  const auto grid = make_grid(0, 50, 26);
  const double s = log_spread(grid, [&](double u) { return f.log_envelope(u); },
                              [&](double u) { return -mu * u + (lam / eps - 1.0) * std::log(c + eps * u); });
  EXPECT_LT(s, 1e-12);
}

TEST(Envelope, ExpExpPolynomialDividesByPremium) {
  const auto p = PremiumFunction::polynomial(1.0, {0.5, 0.1});
  const auto f = envelope(ModelSpec(ModelCase::exp_exp, 1.0, 2.0, p));
  EXPECT_EQ(f.premium_class, EnvelopeClass::p2);
  // d/du log envelope = -mu + lambda / p - p' / p.
  for (double u : {1.0, 5.0, 20.0}) {
    const double h = 1e-4;
    const double fd = (f.log_envelope(u + h) - f.log_envelope(u - h)) / (2 * h);
    EXPECT_NEAR(fd, -2.0 + 1.0 / p(u) - p.d1(u) / p(u), 1e-6) << u;
  }
}

TEST(Envelope, Erlang2ExpLinearIsTailIntegral) {
  const double c = 1.0, eps = 0.5, mu = 2.0;
  const auto f = envelope(ModelSpec(ModelCase::erlang2_exp, 1.0, mu, PremiumFunction::linear(c, eps)));
  for (double u : {0.0, 3.0, 40.0}) {
    const double direct = specfun::log_integrate_to_infinity(
                              [&](double y) { return -mu * y - 2.0 * std::log((c + eps * y) / c); }, u, 1e-12, 0.5)
                              .log_value;
    EXPECT_NEAR(f.log_envelope(u), direct, 1e-9) << u;
  }
}

TEST(Envelope, KummerFormMatchesTailIntegral) {
  const double c = 1.0, eps = 0.5, mu = 2.0;
  const auto f = envelope(ModelSpec(ModelCase::erlang2_exp, 1.0, mu, PremiumFunction::linear(c, eps)));
  // Integration by parts gives the tail integral as c^2 / eps times the Kummer form.
  for (double u : {0.0, 1.0, 10.0, 80.0, 400.0}) {
    EXPECT_NEAR(log_kummer_envelope(c, eps, mu, u) + std::log(c * c / eps), f.log_envelope(u), 1e-8) << u;
  }
}

TEST(Envelope, E1DeficitBranchesAgree) {
  for (double z : {39.0, 40.0, 41.0}) {
    EXPECT_NEAR(e1_deficit(z), 1.0 / z - specfun::scaled_exponential_integral_e1(z), 1e-13 / (z * z)) << z;
  }
  EXPECT_NEAR(e1_deficit(1e6) * 1e12, 1.0, 3e-6);
}

TEST(Envelope, UnstableRegimeIsAHypothesisViolation) {
  // 2c / lambda = 0.4 < 1 / mu = 0.5
  EXPECT_EQ(kind_of([] { envelope(ModelSpec(ModelCase::erlang2_exp, 1.0, 2.0, PremiumFunction::constant(0.2))); }),
            ErrorKind::hypothesis_violation);
  EXPECT_EQ(kind_of([] { envelope(ModelSpec(ModelCase::exp_exp, 1.0, 2.0, PremiumFunction::rational(0.3, 1.0))); }),
            ErrorKind::hypothesis_violation);
  EXPECT_NO_THROW(envelope(ModelSpec(ModelCase::erlang2_exp, 1.0, 2.0, PremiumFunction::constant(1.0))));
}

TEST(Envelope, RegimeDichotomySweep) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unif(0.1, 5.0);
  int one = 0, two = 0;
  for (int i = 0; i < 500; ++i) {
    const double lam = unif(rng), mu = unif(rng), c = unif(rng);
    if (std::abs(lam - mu * c / 2.0) < 1e-9) continue;
    const auto f = envelope(ModelSpec(ModelCase::exp_erlang2, lam, mu, PremiumFunction::constant(c)));
    const auto r = tilde_roots(lam, mu, c);
    EXPECT_EQ(f.log_terms.size() == 1, lam > mu * c / 2.0) << lam << " " << mu << " " << c;
    EXPECT_EQ(r.rho2 < 0.0, lam < mu * c / 2.0);
    EXPECT_LT(r.rho1, 0.0);
    (f.log_terms.size() == 1 ? one : two)++;
  }
  EXPECT_GT(one, 50);
  EXPECT_GT(two, 50);
}

TEST(FitConstant, ExpExpConstantPremium) {
  const double c = 1.0, lam = 1.0, mu = 2.0;
  const auto f = envelope(ModelSpec(ModelCase::exp_exp, lam, mu, PremiumFunction::constant(c)));
  const auto ref = ruin_constant_premium(ModelCase::exp_exp, c, lam, mu).curve(make_grid(0, 40, 81));
  const auto fit = fit_constant(f, ref);
  ASSERT_TRUE(fit.fitted_constant.has_value());
  EXPECT_NEAR(*fit.fitted_constant, lam / (c * mu), 1e-12);
  EXPECT_LT(fit.spread, 0.01);
  // Default window: first reserve below 1e-4, then twice that.
  EXPECT_DOUBLE_EQ(fit.fit_window.first, 9.0);
  EXPECT_DOUBLE_EQ(fit.fit_window.second, 18.0);
  EXPECT_NEAR(fit.log_asymptote(12.0), ref.points[24].log_psi, 1e-12);
}

TEST(FitConstant, IdenticalEnvelopeGivesOne) {
  AsymptoticForm f;
  f.log_envelope = [](double u) { return -0.7 * u + std::log1p(u); };
  const auto ref = curve_from_logs(make_grid(0, 30, 31), f.log_envelope);
  const auto fit = fit_constant(f, ref, std::make_pair(10.0, 20.0));
  EXPECT_DOUBLE_EQ(*fit.fitted_constant, 1.0);
  EXPECT_EQ(fit.spread, 0.0);
}

TEST(FitConstant, Erlang2ExpLinearEarlyWindow) {
  const double c = 1.0, eps = 50.0, lam = 0.2, mu = 1.0;
  const auto f = envelope(ModelSpec(ModelCase::erlang2_exp, lam, mu, PremiumFunction::linear(c, eps)));
  const auto ref = ruin_erlang2exp_linear(c, eps, lam, mu, make_grid(0, 40 / mu, 81));
  const auto fit = fit_constant(f, ref, std::make_pair(20.0 / mu, 40.0 / mu));
  EXPECT_LT(fit.spread, 0.05);
  EXPECT_GT(*fit.fitted_constant, 0.0);
}

TEST(FitConstant, SpreadShrinksAsWindowMovesRight) {
  const double c = 1.0, eps = 0.5, lam = 1.0, mu = 2.0;
  const auto f = envelope(ModelSpec(ModelCase::erlang2_exp, lam, mu, PremiumFunction::linear(c, eps)));
  const auto ref = ruin_erlang2exp_linear(c, eps, lam, mu, make_grid(0, 160, 321));
  const auto a = fit_constant(f, ref, std::make_pair(40.0, 80.0));
  const auto b = fit_constant(f, ref, std::make_pair(80.0, 160.0));
  EXPECT_LT(b.spread, a.spread);
  EXPECT_LT(b.spread, 0.05);
  // Fitted asymptote / reference tends to one.
  auto miss = [&](const AsymptoticForm& g, double u) { return std::abs(std::expm1(g.log_asymptote(u) - ref.points[static_cast<std::size_t>(2 * u)].log_psi)); };
  EXPECT_LT(miss(b, 160.0), miss(a, 80.0));
  EXPECT_LT(miss(b, 160.0), 0.03);
}

TEST(FitConstant, EarlyWindowIsAFitError) {
  const auto f = envelope(ModelSpec(ModelCase::erlang2_exp, 1.0, 2.0, PremiumFunction::linear(1.0, 0.5)));
  const auto ref = ruin_erlang2exp_linear(1.0, 0.5, 1.0, 2.0, make_grid(0, 10, 21));
  EXPECT_EQ(kind_of([&] { fit_constant(f, ref, std::make_pair(0.0, 10.0)); }), ErrorKind::fit);
  EXPECT_EQ(kind_of([&] { fit_constant(f, ref, std::make_pair(5.0, 20.0)); }), ErrorKind::invalid_argument);
}

TEST(Envelope, Erlang2ExpBoundedPremiumDecayRate) {
  const auto m = ModelSpec(ModelCase::erlang2_exp, 1.0, 2.0, PremiumFunction::rational(1.0, 1.0));
  const auto f = envelope(m);
  EXPECT_EQ(f.premium_class, EnvelopeClass::p1);
  BvpConfig cfg;
  cfg.u_max = 300.0;
  cfg.tol = 1e-6;
  cfg.estimate_error = false;
  const auto ref = solve_ruin(m, cfg, make_grid(0, 240, 241));
  auto r = [&](int u) { return ref.points[static_cast<std::size_t>(u)].log_psi - f.log_envelope(u); };
  // p - c = a / (1 + u) is not integrable, so psi / envelope drifts like
  // (1 + u)^{a d(rho1)/dc}; the exponential rate is still rho1.
  const double h = 1e-6;
  const double drho = (hat_roots(1.0, 2.0, 1.0 + h).rho1 - hat_roots(1.0, 2.0, 1.0 - h).rho1) / (2 * h);
  EXPECT_NEAR((r(240) - r(120)) / 120.0, 0.0, 0.01 * std::abs(hat_roots(1.0, 2.0, 1.0).rho1));
  auto flat = [&](int u) { return r(u) - drho * std::log1p(u); };
  EXPECT_LT(std::abs(flat(240) - flat(120)), std::abs(flat(60) - flat(30)));
  EXPECT_LT(std::abs(flat(240) - flat(120)), 0.02);
}

TEST(Envelope, ExpErlang2LinearLeadingBranch) {
  const double c = 1.0, eps = 1.0, lam = 2.0, mu = 1.0;
  const auto m = ModelSpec(ModelCase::exp_erlang2, lam, mu, PremiumFunction::linear(c, eps));
  const auto f = envelope(m);
  ASSERT_EQ(f.log_terms.size(), 2u);
  const std::vector<double> far = {20.0, 40.0, 80.0, 160.0};
  const ExpErlang2Linear exact(c, eps, lam, mu);
  std::vector<double> r;
  for (double u : far) r.push_back(exact.curve({u}).points[0].log_psi - f.log_envelope(u));
  for (std::size_t i = 1; i < r.size(); ++i) EXPECT_LT(std::abs(r[i] - r[i - 1]), 0.01) << far[i];
  // The second branch decays faster than the first.
  EXPECT_LT(f.log_terms[1](160.0) - f.log_terms[0](160.0), f.log_terms[1](40.0) - f.log_terms[0](40.0));
}

TEST(Envelope, GeneralStableRouteMatchesExplicitForms) {
  const double c = 1.0, eps = 0.5, mu = 2.0;
  const auto m = ModelSpec(ModelCase::erlang2_exp, 1.0, mu, PremiumFunction::linear(c, eps));
  const auto general = detail::stable_tail(OdeCoefficients(m), 1, 1.0 / mu);
  const auto grid = make_grid(80, 160, 9);
  EXPECT_LT(log_spread(grid, general, [&](double u) { return log_kummer_envelope(c, eps, mu, u); }), 0.05);

  const auto x = ModelSpec(ModelCase::exp_erlang2, 2.0, 1.0, PremiumFunction::linear(1.0, 1.0));
  const auto gx = detail::stable_tail(OdeCoefficients(x), 2, 1.0);
  EXPECT_LT(log_spread(grid, gx, envelope(x).log_envelope), 0.05);
}

TEST(Compare, ExpExpSlope) {
  const double c = 1.0, eps = 0.5, lam = 1.0, mu = 2.0;
  const auto t = compare_linear_vs_constant(ModelCase::exp_exp, c, eps, lam, mu, make_grid(0, 200, 201));
  EXPECT_TRUE(t.warnings.empty());
  for (std::size_t i = 1; i < t.rows.size(); ++i) EXPECT_LT(t.rows[i].log_ratio, t.rows[i - 1].log_ratio);
  // log ratio = -(lam/c) u + (lam/eps - 1) log(c + eps u) + const
  auto shape = [&](double u) { return -lam / c * u + (lam / eps - 1.0) * std::log(c + eps * u); };
  const auto& a = t.rows[100];
  const auto& b = t.rows[200];
  EXPECT_NEAR((b.log_ratio - a.log_ratio) - (shape(b.u) - shape(a.u)), 0.0, 0.01);
  EXPECT_LT(t.rows.back().ratio, 1e-3);
}

TEST(Compare, Erlang2ExpRatioVanishes) {
  const auto t = compare_linear_vs_constant(ModelCase::erlang2_exp, 1.0, 0.5, 1.0, 2.0, make_grid(0, 40, 41));
  for (std::size_t i = 1; i < t.rows.size(); ++i) EXPECT_LT(t.rows[i].ratio, t.rows[i - 1].ratio);
  EXPECT_LT(t.rows.back().ratio, 1e-3);
}

TEST(Compare, ExpErlang2RatioVanishes) {
  const auto t = compare_linear_vs_constant(ModelCase::exp_erlang2, 3.0, 1.0, 1.0, 1.0, make_grid(0, 40, 41));
  for (std::size_t i = 1; i < t.rows.size(); ++i) EXPECT_LT(t.rows[i].ratio, t.rows[i - 1].ratio);
  EXPECT_LT(t.rows.back().ratio, 1e-3);
  EXPECT_NEAR(t.rows[0].psi_constant, 2.0 / 3.0, 1e-14);
}

TEST(Compare, CertainRuinForConstantIsWarned) {
  // lambda = mu c / 2: the constant-premium model has zero drift.
  const auto t = compare_linear_vs_constant(ModelCase::exp_erlang2, 1.0, 0.5, 1.0, 2.0, make_grid(0, 10, 11));
  ASSERT_FALSE(t.warnings.empty());
  for (const auto& r : t.rows) {
    EXPECT_EQ(r.psi_constant, 1.0);
    EXPECT_EQ(r.ratio, r.psi_linear);
  }
}
