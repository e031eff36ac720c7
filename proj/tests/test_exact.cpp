#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ruinprob/bvp.hpp"
#include "ruinprob/exact.hpp"
#include "ruinprob/montecarlo.hpp"

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

void expect_probability_curve(const RuinCurve& c) {
  double prev = 1.0;
  for (const auto& p : c.points) {
    EXPECT_GE(p.psi, 0.0);
    EXPECT_LE(p.psi, prev + p.err) << p.u;
    prev = p.psi;
  }
}

// |psi - psi_hat| within three standard errors of a binomial with the exact psi.
void expect_matches_simulation(const RuinCurve& exact, const std::vector<SimulationResult>& sim) {
  ASSERT_EQ(exact.points.size(), sim.size());
  for (std::size_t i = 0; i < sim.size(); ++i) {
    const double psi = exact.points[i].psi;
    const double se = std::sqrt(psi * (1.0 - psi) / static_cast<double>(sim[i].n_paths));
    EXPECT_LE(std::abs(sim[i].psi_hat - psi), 3.0 * se + 1.0 / static_cast<double>(sim[i].n_paths)) << sim[i].u;
    EXPECT_FALSE(sim[i].truncation_flag);
  }
}

}  // namespace

TEST(ExpExp, GeneralFormulaExamples) {
  EXPECT_NEAR(ruin_exp_exp_general(PremiumFunction::constant(1.0), 1.0, 2.0, 0.0), 0.5, 1e-12);
  const double general = ruin_exp_exp_general(PremiumFunction::linear(1.0, 0.5), 1.0, 2.0, 1.0);
  EXPECT_NEAR(general, ruin_exp_exp_linear(1.0, 0.5, 1.0, 2.0, 1.0), 1e-6);
  const auto grid = make_grid(0, 5, 11);
  const auto a = ruin_exp_exp_general(PremiumFunction::linear(1.0, 0.5), 1.0, 2.0, grid);
  const auto b = ruin_exp_exp_linear(1.0, 0.5, 1.0, 2.0, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(a.points[i].psi, b.points[i].psi, 1e-6);
  expect_probability_curve(a);
  EXPECT_LT(a.points.back().psi, a.points.front().psi);
}

TEST(ExpExp, LinearReducesToConstantAsSlopeVanishes) {
  const double c = 1.0, lam = 1.0, mu = 2.0;
  for (double u : {0.0, 1.0, 3.0}) {
    const double constant = lam / (c * mu) * std::exp(-(mu - lam / c) * u);
    EXPECT_NEAR(ruin_exp_exp_linear(c, 1e-5, lam, mu, u), constant, 1e-3 * constant);
  }
}

TEST(ExpExp, LinearAsymptoticRatioFlattens) {
  const double c = 1.0, eps = 0.5, lam = 1.0, mu = 2.0;
  auto ratio = [&](double u) {
    return std::exp(log_ruin_exp_exp_linear(c, eps, lam, mu, u) + mu * u - (lam / eps - 1.0) * std::log(c + eps * u));
  };
  EXPECT_GT(ratio(100.0), 0.0);
  EXPECT_NEAR(ratio(200.0) / ratio(100.0), 1.0, 0.01);
  EXPECT_NEAR(ratio(400.0) / ratio(200.0), 1.0, 0.005);
}

TEST(ExpExp, LogSpaceHandlesLargeRateRatio) {
  // lambda / eps = 800 overflows eps^{lambda/eps} in plain arithmetic for eps = 10.
  const double v = log_ruin_exp_exp_linear(16000.0, 10.0, 8000.0, 1.0, 0.0);
  ASSERT_TRUE(std::isfinite(v));
  EXPECT_LT(v, 0.0);
  EXPECT_NEAR(v, std::log(ruin_exp_exp_general(PremiumFunction::linear(16000.0, 10.0), 8000.0, 1.0, 0.0)), 1e-6);
}

TEST(ExpExp, PremiumMonotonicity) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto grid = make_grid(0, 4, 5);
  for (int trial = 0; trial < 25; ++trial) {
    const double lam = 0.5 + unif(rng), mu = 1.0 + unif(rng);
    const double c = lam / mu * (1.2 + unif(rng));
    const double a = 2.0 * unif(rng);
    const double bump = 0.5 * unif(rng);
    const auto low = PremiumFunction::rational(c, a);
    const auto high = trial % 2 ? PremiumFunction::rational(c + bump, a) : PremiumFunction::polynomial(c + a, {0.05 + bump});
    const auto lo = ruin_exp_exp_general(low, lam, mu, grid);
    const auto hi = ruin_exp_exp_general(high, lam, mu, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      EXPECT_LE(hi.points[i].psi, lo.points[i].psi + 1e-10);
      EXPECT_GE(lo.points[i].psi, 0.0);
      EXPECT_LE(lo.points[i].psi, 1.0);
    }
  }
}

TEST(ExpExp, DivergenceWithoutNetProfit) {
  EXPECT_EQ(kind_of([] { ruin_exp_exp_general(PremiumFunction::constant(0.4), 1.0, 2.0, 0.0); }), ErrorKind::divergence);
  EXPECT_EQ(kind_of([] { ruin_exp_exp_general(PremiumFunction::rational(0.3, 1.0), 1.0, 2.0, 0.0); }),
            ErrorKind::divergence);
}

TEST(ConstantPremium, Examples) {
  const auto ee = ruin_constant_premium(ModelCase::exp_exp, 1.0, 1.0, 2.0);
  EXPECT_NEAR(ee.psi(3.0), 0.5 * std::exp(-3.0), 1e-15);
  EXPECT_NEAR(ee.psi(3.0), 0.02489, 1e-5);

  const auto e2 = ruin_constant_premium(ModelCase::erlang2_exp, 1.0, 1.0, 2.0);
  ASSERT_EQ(e2.decay_rates().size(), 1u);
  EXPECT_NEAR(e2.decay_rates()[0], std::sqrt(3.0), 1e-14);
  // Classical renewal result psi(0) = 1 - R / mu.
  EXPECT_NEAR(e2.psi(0.0), 1.0 - std::sqrt(3.0) / 2.0, 1e-14);

  const auto x2 = ruin_constant_premium(ModelCase::exp_erlang2, 3.0, 1.0, 1.0);
  ASSERT_EQ(x2.exponents.size(), 2u);
  EXPECT_NEAR(x2.exponents[0], -(5.0 + std::sqrt(13.0)) / 6.0, 1e-14);
  EXPECT_NEAR(x2.exponents[1], -(5.0 - std::sqrt(13.0)) / 6.0, 1e-14);
  EXPECT_LT(x2.exponents[1], 0.0);
  EXPECT_NEAR(x2.psi(0.0), 2.0 / 3.0, 1e-14);
}

TEST(ConstantPremium, SafeLoadViolation) {
  EXPECT_EQ(kind_of([] { ruin_constant_premium(ModelCase::exp_exp, 0.4, 1.0, 2.0); }), ErrorKind::safe_load);
  EXPECT_EQ(kind_of([] { ruin_constant_premium(ModelCase::erlang2_exp, 0.2, 1.0, 2.0); }), ErrorKind::safe_load);
  EXPECT_EQ(kind_of([] { ruin_constant_premium(ModelCase::exp_erlang2, 1.0, 1.0, 1.0); }), ErrorKind::safe_load);
}

TEST(ConstantPremium, AgreesWithSimulation) {
  const auto grid = make_grid(0, 4, 5);
  for (auto mc : {ModelCase::exp_exp, ModelCase::erlang2_exp, ModelCase::exp_erlang2}) {
    const double c = 3.0, lam = 1.0, mu = 1.0;
    const auto sol = ruin_constant_premium(mc, c, lam, mu);
    const auto sim = simulate_ruin_grid(ModelSpec(mc, lam, mu, PremiumFunction::constant(c)), grid, 150.0, 50000, 8);
    expect_matches_simulation(sol.curve(grid), sim);
  }
}

TEST(Erlang2ExpLinear, ShapeAndParameters) {
  const Erlang2ExpLinear e(1.0, 0.5, 1.0, 2.0);
  const double s = std::sqrt(1.0 + 4.0 / 0.5);
  EXPECT_NEAR(s, 3.0, 1e-15);
  EXPECT_NEAR(e.a(), 1.0 + (0.5 + 2.0 + 1.5) / 1.0, 1e-15);
  EXPECT_NEAR(e.b(), 4.0, 1e-15);
  EXPECT_NEAR(e.beta(), -0.5 + 2.0 + 1.5, 1e-15);
  const auto curve = e.curve(make_grid(0, 10, 21));
  for (std::size_t i = 1; i < curve.points.size(); ++i) EXPECT_LT(curve.points[i].psi, curve.points[i - 1].psi);
  EXPECT_GT(curve.points.back().psi, 0.0);
  EXPECT_LT(curve.points.front().psi, 1.0);
  EXPECT_LT(curve.calibration.residual, 1e-12);
}

TEST(Erlang2ExpLinear, DerivativeAtZeroMatchesFiniteDifference) {
  const Erlang2ExpLinear e(1.0, 0.5, 1.0, 2.0);
  const double h = 1e-5;
  EXPECT_NEAR(e.w0(), (-3.0 * e.log_h(0.0) + 4.0 * e.log_h(h) - e.log_h(2 * h)) / (2 * h), 1e-7);
}

TEST(Erlang2ExpLinear, MatchesBoundaryValueSolver) {
  const auto grid = make_grid(0, 10, 21);
  const auto exact = ruin_erlang2exp_linear(1.0, 0.5, 1.0, 2.0, grid);
  BvpConfig cfg;
  const auto bvp = solve_ruin(ModelSpec(ModelCase::erlang2_exp, 1.0, 2.0, PremiumFunction::linear(1.0, 0.5)), cfg, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_LE(std::abs(exact.points[i].psi - bvp.points[i].psi), std::max(cfg.tol, exact.points[i].err)) << grid[i];
  }
}

TEST(Erlang2ExpLinear, LargeReserveRatioIsFlat) {
  const double c = 1.0, eps = 0.5, mu = 2.0;
  const auto grid = std::vector<double>{40.0, 80.0, 160.0};
  const auto curve = ruin_erlang2exp_linear(c, eps, 1.0, mu, grid);
  auto log_env = [&](double u) {
    return specfun::log_integrate_to_infinity(
               [&](double y) { return -mu * y - 2.0 * std::log((c + eps * y) / c); }, u, 1e-12, 1.0 / mu)
        .log_value;
  };
  const double r0 = curve.points[0].log_psi - log_env(grid[0]);
  const double r1 = curve.points[1].log_psi - log_env(grid[1]);
  const double r2 = curve.points[2].log_psi - log_env(grid[2]);
  EXPECT_LT(std::abs(r2 - r1), std::abs(r1 - r0));
  EXPECT_LT(std::abs(std::expm1(r2 - r1)), 0.05);
}

TEST(Erlang2ExpLinear, AgreesWithSimulation) {
  const auto grid = make_grid(0, 10, 11);
  const auto exact = ruin_erlang2exp_linear(1.0, 0.5, 1.0, 2.0, grid);
  const auto m = ModelSpec(ModelCase::erlang2_exp, 1.0, 2.0, PremiumFunction::linear(1.0, 0.5));
  SimulationOptions opt;
  opt.n_paths = 200000;
  opt.seed = 3;
  expect_matches_simulation(exact, simulate_ruin_auto(m, grid, opt));
}

TEST(Erlang2ExpLinear, MonteCarloCalibrationAgrees) {
  ExactOptions opt;
  opt.calibration = CalibrationMode::monte_carlo;
  opt.mc_paths = 200000;
  const auto grid = std::vector<double>{0.0, 1.0, 3.0};
  const auto mc = ruin_erlang2exp_linear(1.0, 0.5, 1.0, 2.0, grid, opt);
  const auto ide = ruin_erlang2exp_linear(1.0, 0.5, 1.0, 2.0, grid);
  EXPECT_TRUE(mc.calibration.from_monte_carlo);
  EXPECT_FALSE(mc.warnings.empty());
  const double se = std::sqrt(ide.points[0].psi * (1 - ide.points[0].psi) / 200000.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(mc.points[i].psi / ide.points[i].psi, 1.0, 4.0 * se / ide.points[0].psi);
  }
}

TEST(ExpErlang2Linear, BesselDerivativesAtZero) {
  for (double lam : {2.0, 3.0, 0.7}) {
    const ExpErlang2Linear e(1.0, 1.0, lam, 1.0);
    const double h = 1e-5;
    for (int j : {0, 1}) {
      const double fd = (-3.0 * e.log_h(j, 0.0) + 4.0 * e.log_h(j, h) - e.log_h(j, 2 * h)) / (2 * h);
      EXPECT_NEAR(e.w0(j), fd, 1e-7) << lam << " " << j;
    }
  }
}

TEST(ExpErlang2Linear, KBranchDecay) {
  const ExpErlang2Linear e(1.0, 1.0, 2.0, 1.0);
  EXPECT_TRUE(e.integer_order());
  EXPECT_DOUBLE_EQ(e.order(), 1.0);
  // log h_K + mu v + (2 / eps) sqrt(lambda mu x) is slowly varying.
  auto reduced = [&](double v) { return e.log_h(1, v) + v + 2.0 * std::sqrt(2.0 * (1.0 + v)); };
  const double d1 = reduced(200.0) - reduced(100.0);
  const double d2 = reduced(400.0) - reduced(200.0);
  EXPECT_LT(std::abs(d1), 2.0);
  EXPECT_NEAR(d1, d2, 0.05);
  for (double v : {0.0, 1.0, 10.0, 100.0}) EXPECT_LT(e.log_h(1, v + 1.0), e.log_h(1, v));
}

TEST(ExpErlang2Linear, MatchesBoundaryValueSolverAndSimulation) {
  const auto grid = make_grid(0, 10, 11);
  const auto exact = ruin_experlang2_linear(1.0, 1.0, 2.0, 1.0, grid);
  EXPECT_TRUE(exact.warnings.empty());
  expect_probability_curve(exact);
  BvpConfig cfg;
  const auto m = ModelSpec(ModelCase::exp_erlang2, 2.0, 1.0, PremiumFunction::linear(1.0, 1.0));
  const auto bvp = solve_ruin(m, cfg, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_LE(std::abs(exact.points[i].psi - bvp.points[i].psi), std::max(cfg.tol, exact.points[i].err)) << grid[i];
  }
  SimulationOptions opt;
  opt.n_paths = 200000;
  opt.seed = 5;
  expect_matches_simulation(exact, simulate_ruin_auto(m, grid, opt));
}

TEST(ExpErlang2Linear, NonIntegerOrderIsFlagged) {
  const auto grid = make_grid(0, 5, 6);
  const auto exact = ruin_experlang2_linear(1.0, 1.0, 2.5, 1.0, grid);
  ASSERT_FALSE(exact.warnings.empty());
  const auto bvp = solve_ruin(ModelSpec(ModelCase::exp_erlang2, 2.5, 1.0, PremiumFunction::linear(1.0, 1.0)), BvpConfig{}, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(exact.points[i].psi, bvp.points[i].psi, 1e-7);
}
