#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "ruinprob/curve.hpp"
#include "ruinprob/detail/dopri5.hpp"
#include "ruinprob/detail/logmath.hpp"
#include "ruinprob/error.hpp"
#include "ruinprob/model.hpp"
#include "ruinprob/odecore.hpp"

namespace ruinprob {

enum class TailMode { asymptotic_seed, zero_seed };

struct BvpConfig {
  /// Truncation reserve; 0 grows it until psi(u_max) <= tol * 1e-2.
  double u_max = 0.0;
  /// Spacing and size of the output grid when the caller passes none.
  GridSpacing grid = GridSpacing::uniform;
  std::size_t points = 101;
  /// Target absolute error in psi.
  double tol = 1e-8;
  TailMode tail_mode = TailMode::asymptotic_seed;
  /// Largest integrator step.
  double h_max = 0.1;
  /// Repeat the solve with a tighter tolerance and half the step cap to
  /// produce per-point error estimates.
  bool estimate_error = true;
};

namespace detail {

struct RiccatiNode {
  double u;
  double log_h;  // log h, h = -psi' up to scale
  double w;      // h'/h
  double dw;     // w'
};

// Quintic Hermite interpolant of log h on [a.u, b.u] from value, slope and curvature.
inline double hermite_log_h(const RiccatiNode& a, const RiccatiNode& b, double u) {
  const double len = b.u - a.u;
  const double t = (u - a.u) / len;
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
  const double h1 = t - 6 * t3 + 8 * t4 - 3 * t5;
  const double h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
  const double h3 = 0.5 * t3 - t4 + 0.5 * t5;
  const double h4 = -4 * t3 + 7 * t4 - 3 * t5;
  const double h5 = 10 * t3 - 15 * t4 + 6 * t5;
  return a.log_h * h0 + len * a.w * h1 + len * len * a.dw * h2 + len * len * b.dw * h3 + len * b.w * h4 +
         b.log_h * h5;
}

// integral of exp(log h - anchor) over [lo, hi] within one node interval, 8-point Gauss-Legendre.
inline double segment_integral(const RiccatiNode& a, const RiccatiNode& b, double lo, double hi, double anchor) {
  static constexpr double x[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363};
  static constexpr double wt[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) {
    acc += wt[i] * (std::exp(hermite_log_h(a, b, mid - half * x[i]) - anchor) +
                    std::exp(hermite_log_h(a, b, mid + half * x[i]) - anchor));
  }
  return acc * half;
}

/// Solution of the Riccati form w' = -w^2 - q1 w - q0, L' = w of the h
/// equation on [0, u_max], with S(u) = integral of e^L over [u, inf).
class RiccatiProfile {
 public:
  std::vector<RiccatiNode> nodes;
  std::vector<double> log_s;  // log S at the nodes
  double log_tail_estimate = 0.0;

  double u_max() const { return nodes.back().u; }

  double log_h(double u) const {
    const std::size_t j = locate(u);
    if (j + 1 == nodes.size()) return nodes[j].log_h;
    return hermite_log_h(nodes[j], nodes[j + 1], u);
  }

  double log_s_at(double u) const {
    const std::size_t j = locate(u);
    if (j + 1 == nodes.size() || u == nodes[j].u) return log_s[j];
    const double anchor = nodes[j].log_h;
    const double part = segment_integral(nodes[j], nodes[j + 1], u, nodes[j + 1].u, anchor);
    return log_add_exp(log_s[j + 1], anchor + std::log(part));
  }

  double w_at(double u) const {
    const std::size_t j = locate(u);
    if (j + 1 == nodes.size()) return nodes[j].w;
    const double len = 1e-7 * std::max(1.0, u);
    const double lo = std::max(nodes[j].u, u - len);
    const double hi = std::min(nodes[j + 1].u, u + len);
    return (hermite_log_h(nodes[j], nodes[j + 1], hi) - hermite_log_h(nodes[j], nodes[j + 1], lo)) / (hi - lo);
  }

 private:
  std::size_t locate(double u) const {
    if (u < nodes.front().u || u > nodes.back().u) {
      throw Error(ErrorKind::invalid_argument, "bvp", "reserve " + format_number(u) + " outside the solved range");
    }
    auto it = std::upper_bound(nodes.begin(), nodes.end(), u, [](double v, const RiccatiNode& n) { return v < n.u; });
    return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - nodes.begin()) - 1));
  }
};

inline RiccatiProfile integrate_riccati(const OdeCoefficients& k, double u_from, double u_to, double w_start,
                                        double int_tol, double h_max, TailMode tail) {
  RiccatiProfile prof;
  std::array<double, 2> y{w_start, 0.0};
  auto rhs = [&k](double u, const std::array<double, 2>& s, std::array<double, 2>& d) {
    d[0] = -s[0] * s[0] - k.q1(u) * s[0] - k.q0(u);
    d[1] = s[0];
  };
  DopriOptions opt;
  opt.rtol = int_tol;
  opt.atol = int_tol;
  opt.h_max = h_max;
  opt.failure = ErrorKind::stiffness;
  opt.module = "bvp";
  auto observe = [&prof](double u, const std::array<double, 2>& s, const std::array<double, 2>& d) {
    if (!(std::abs(s[0]) < 1e8)) {
      throw Error(ErrorKind::divergence, "bvp",
                  "log-derivative of h blew up at u = " + format_number(u) + ": h changes sign, psi would not be monotone");
    }
    prof.nodes.push_back({u, s[1], s[0], d[0]});
    return true;
  };
  dopri5<2>(rhs, u_from, u_to, y, opt, observe);
  if (prof.nodes.front().u > prof.nodes.back().u) std::reverse(prof.nodes.begin(), prof.nodes.end());
  const double shift = prof.nodes.front().log_h;
  for (auto& n : prof.nodes) n.log_h -= shift;

  const std::size_t n = prof.nodes.size();
  prof.log_s.assign(n, -std::numeric_limits<double>::infinity());
  const auto& last = prof.nodes.back();
  if (!(last.w < 0.0)) {
    throw Error(ErrorKind::truncation, "bvp",
                "h is not decaying at u_max = " + format_number(last.u) + " (h'/h = " + format_number(last.w) + ")");
  }
  // integral of e^L over [u_max, inf) by one integration by parts: e^L (-1/w - w'/w^3).
  double tail_factor = -1.0 / last.w - last.dw / (last.w * last.w * last.w);
  if (!(tail_factor > 0.0)) tail_factor = -1.0 / last.w;
  prof.log_tail_estimate = last.log_h + std::log(tail_factor);
  if (tail == TailMode::asymptotic_seed) prof.log_s[n - 1] = prof.log_tail_estimate;
  for (std::size_t j = n - 1; j-- > 0;) {
    const double seg = segment_integral(prof.nodes[j], prof.nodes[j + 1], prof.nodes[j].u, prof.nodes[j + 1].u,
                                        prof.nodes[j].log_h);
    prof.log_s[j] = log_add_exp(prof.log_s[j + 1], prof.nodes[j].log_h + std::log(seg));
  }
  return prof;
}

struct BvpRun {
  RiccatiProfile profile;
  double log_gamma = 0.0;
  Calibration calibration;
};

inline double integration_tolerance(double tol) { return std::clamp(tol * 1e-3, 1e-13, 1e-6); }

// One solve on [0, u_max] with psi = gamma S fixed by the integro-differential
// equation at u = 0.
inline BvpRun run_bvp(const OdeCoefficients& k, double u_max, const BvpConfig& cfg, double tol, double h_max) {
  const ModelSpec& m = k.model();
  const double lam = m.lambda;
  const double p0 = m.premium(0.0);
  const double dp0 = m.premium.d1(0.0);
  BvpRun run;
  if (m.model_case == ModelCase::erlang2_exp) {
    // One stable solution: shoot backwards along the recessive root.
    double seed = root_value(k, 1, u_max);
    if (cfg.tail_mode == TailMode::asymptotic_seed) seed += root_correction(k, 1, u_max);
    run.profile = integrate_riccati(k, u_max, 0.0, seed, integration_tolerance(tol), h_max, cfg.tail_mode);
  } else {
    // Two stable solutions; the derivative of the equation at u = 0 fixes h'(0)/h(0).
    const double w0 = (lam - dp0) / p0;
    run.profile = integrate_riccati(k, 0.0, u_max, w0, integration_tolerance(tol), h_max, cfg.tail_mode);
  }
  const auto& prof = run.profile;
  const double s0 = std::exp(prof.log_s.front());
  const double w0 = prof.nodes.front().w;
  double bracket = 0.0;
  double rhs = 0.0;
  if (m.model_case == ModelCase::erlang2_exp) {
    bracket = lam * lam * s0 + (2.0 * lam * p0 - p0 * dp0) - p0 * p0 * w0;
    rhs = lam * lam;
  } else {
    bracket = lam * s0 + p0;
    rhs = lam;
  }
  if (!(bracket > 0.0) || !std::isfinite(bracket)) {
    throw Error(ErrorKind::calibration, "bvp", "normalisation at u = 0 is not positive");
  }
  const double gamma = rhs / bracket;
  run.log_gamma = std::log(gamma);
  run.calibration.gamma = {gamma};
  run.calibration.residual = std::abs(gamma * bracket - rhs) / rhs;
  const double psi0 = gamma * s0;
  if (psi0 > 1.0 + 1e-6) {
    throw Error(ErrorKind::calibration, "bvp", "calibrated psi(0) = " + format_number(psi0) + " exceeds 1");
  }
  return run;
}

// Rough decay rate of psi, used only to size the first truncation guess.
inline double decay_guess(const ModelSpec& m) {
  const double c = m.premium.limit_at_infinity();
  if (std::isfinite(c)) {
    const auto r = m.model_case == ModelCase::erlang2_exp ? hat_roots(m.lambda, m.mu, c) : tilde_roots(m.lambda, m.mu, c);
    const double dominant = m.model_case == ModelCase::erlang2_exp ? r.rho1 : r.rho2;
    return std::max(std::abs(dominant), 1e-3);
  }
  return m.model_case == ModelCase::erlang2_exp ? m.mu : 0.5 * m.mu;
}

inline void check_solvable(const ModelSpec& m) {
  if (m.model_case == ModelCase::exp_exp) {
    throw Error(ErrorKind::unsupported_case, "bvp", "exp-exp has closed forms; use the exact module");
  }
  const auto sl = safe_load_check(m);
  if (!sl.satisfied) {
    throw Error(ErrorKind::safe_load, "bvp",
                "net-profit condition fails at p(inf) = " + format_number(sl.c) + " (regime " +
                    std::string(to_string(sl.regime)) + "); ruin is certain and no decaying solution exists");
  }
}

}  // namespace detail

/// psi on `grid` (or on a grid built from cfg when empty) by numerical
/// solution of the second-order equation in h = psi'.
///
/// erlang2-exp has one stable solution and is shot backwards from u_max
/// along the recessive root. exp-erlang2 has two; the first derivative of
/// the integro-differential equation at 0 gives h'(0)/h(0) and the
/// equation is integrated forwards. In both cases the integro-differential
/// equation at u = 0 fixes the amplitude.
inline RuinCurve solve_ruin(const ModelSpec& m, const BvpConfig& cfg, std::vector<double> grid = {}) {
  if (!(cfg.tol > 0.0) || !(cfg.h_max > 0.0) || !(cfg.u_max >= 0.0)) {
    throw Error(ErrorKind::invalid_argument, "bvp", "tol and h_max must be positive, u_max non-negative");
  }
  detail::check_solvable(m);
  const OdeCoefficients k(m);
  if (!grid.empty()) require_sorted_reserves(grid, "bvp");
  const double grid_max = grid.empty() ? 0.0 : grid.back();

  double u_max = cfg.u_max;
  const bool automatic = u_max == 0.0;
  if (automatic) {
    const double r = detail::decay_guess(m);
    u_max = std::max(grid_max, 1.2 * std::log(100.0 / cfg.tol) / r + 1.0);
  } else if (u_max < grid_max) {
    throw Error(ErrorKind::invalid_argument, "bvp", "u_max is below the largest requested reserve");
  }

  detail::BvpRun run;
  for (int attempt = 0;; ++attempt) {
    run = detail::run_bvp(k, u_max, cfg, cfg.tol, cfg.h_max);
    const double tail_psi = std::exp(run.log_gamma + run.profile.log_tail_estimate);
    const double limit = automatic ? cfg.tol * 1e-2 : cfg.tol;
    if (tail_psi <= limit) break;
    if (!automatic || attempt >= 8) {
      throw Error(ErrorKind::truncation, "bvp",
                  "estimated psi(u_max) = " + detail::format_number(tail_psi) + " at u_max = " +
                      detail::format_number(u_max) + " exceeds the tolerance");
    }
    u_max *= 2.0;
  }

  if (grid.empty()) grid = make_grid(0.0, u_max, cfg.points, cfg.grid);

  std::vector<double> reference;
  if (cfg.estimate_error) {
    const auto fine = detail::run_bvp(k, u_max, cfg, cfg.tol * 1e-2, 0.5 * cfg.h_max);
    reference.reserve(grid.size());
    for (double u : grid) reference.push_back(std::exp(fine.log_gamma + fine.profile.log_s_at(u)));
  }

  RuinCurve curve;
  curve.method = Method::bvp;
  curve.model = m;
  curve.calibration = run.calibration;
  curve.points.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    RuinPoint pt;
    pt.u = grid[i];
    pt.log_psi = run.log_gamma + run.profile.log_s_at(grid[i]);
    pt.psi = std::exp(pt.log_psi);
    // Rounding accumulates once per integrator node.
    pt.err = static_cast<double>(run.profile.nodes.size()) * std::numeric_limits<double>::epsilon() * pt.psi;
    if (cfg.estimate_error) pt.err += std::abs(pt.psi - reference[i]);
    curve.points.push_back(pt);
  }
  return curve;
}

/// Recessive solution of the h equation: shot backwards from u_max along
/// the more negative root rho_1, normalised to h(0) = 1. For models with a
/// single stable solution this is h itself; otherwise it is the faster
/// decaying of the two.
struct StableSolution {
  std::vector<double> u;
  std::vector<double> log_h;
  std::vector<double> log_s;  // log of the integral of h over [u, inf)
};

inline StableSolution stable_solution(const ModelSpec& m, const BvpConfig& cfg, const std::vector<double>& grid) {
  if (m.model_case == ModelCase::exp_exp) {
    throw Error(ErrorKind::unsupported_case, "bvp", "exp-exp has no second-order h equation");
  }
  require_sorted_reserves(grid, "bvp");
  const OdeCoefficients k(m);
  const double u_max = std::max(cfg.u_max, grid.back());
  double seed = root_value(k, 1, u_max);
  if (cfg.tail_mode == TailMode::asymptotic_seed) seed += root_correction(k, 1, u_max);
  const auto prof =
      detail::integrate_riccati(k, u_max, 0.0, seed, detail::integration_tolerance(cfg.tol), cfg.h_max, cfg.tail_mode);
  StableSolution out;
  for (double u : grid) {
    out.u.push_back(u);
    out.log_h.push_back(prof.log_h(u));
    out.log_s.push_back(prof.log_s_at(u));
  }
  return out;
}

}  // namespace ruinprob
