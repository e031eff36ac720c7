// Ruin probabilities for a linear premium p(u) = 1 + 0.5 u under the three
// model cases, checked against simulation, plus the constant-premium ratio.

#include <cstdio>
#include <vector>

#include "ruinprob/ruinprob.hpp"

using namespace ruinprob;

int main() {
  const double c = 1.0, eps = 0.5, lam = 1.0, mu = 2.0;
  const auto grid = make_grid(0, 6, 7);

  const ModelSpec models[] = {
      ModelSpec(ModelCase::exp_exp, lam, mu, PremiumFunction::linear(c, eps)),
      ModelSpec(ModelCase::erlang2_exp, lam, mu, PremiumFunction::linear(c, eps)),
      ModelSpec(ModelCase::exp_erlang2, lam, mu, PremiumFunction::linear(c, eps)),
  };
  SimulationOptions sim;
  sim.n_paths = 100000;
  sim.seed = 7;

  for (const auto& m : models) {
    RuinCurve exact;
    switch (m.model_case) {
      case ModelCase::exp_exp: exact = ruin_exp_exp_linear(c, eps, lam, mu, grid); break;
      case ModelCase::erlang2_exp: exact = ruin_erlang2exp_linear(c, eps, lam, mu, grid); break;
      case ModelCase::exp_erlang2: exact = ruin_experlang2_linear(c, eps, lam, mu, grid); break;
    }
    const auto mc = simulate_ruin_auto(m, grid, sim);
    std::printf("%s, p(u) = %s\n", std::string(to_string(m.model_case)).c_str(), m.premium.spec().c_str());
    std::printf("%6s %14s %14s %12s\n", "u", "psi", "psi_hat", "ci95");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      std::printf("%6.2f %14.6e %14.6e %12.2e\n", grid[i], exact.points[i].psi, mc[i].psi_hat, mc[i].half_width_95);
    }
    std::printf("\n");
  }

  // Non-constant bounded premium: no closed form, so the boundary value solver.
  const auto ratl = ModelSpec(ModelCase::erlang2_exp, lam, mu, PremiumFunction::rational(c, 1.0));
  const auto bvp = solve_ruin(ratl, BvpConfig{}, grid);
  std::printf("erlang2-exp, p(u) = %s (solver)\n", ratl.premium.spec().c_str());
  for (const auto& p : bvp.points) std::printf("%6.2f %14.6e  +/- %.1e\n", p.u, p.psi, p.err);
  std::printf("\n");

  const auto table = compare_linear_vs_constant(ModelCase::erlang2_exp, c, eps, lam, mu, make_grid(0, 30, 7));
  std::printf("psi_linear / psi_constant, erlang2-exp\n");
  for (const auto& r : table.rows) std::printf("%6.1f %14.6e\n", r.u, r.ratio);
  return 0;
}
