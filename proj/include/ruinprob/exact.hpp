#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ruinprob/curve.hpp"
#include "ruinprob/detail/logmath.hpp"
#include "ruinprob/error.hpp"
#include "ruinprob/model.hpp"
#include "ruinprob/montecarlo.hpp"
#include "ruinprob/odecore.hpp"
#include "ruinprob/specfun.hpp"

namespace ruinprob {

enum class CalibrationMode { ide, monte_carlo };

struct ExactOptions {
  /// Relative tolerance of the tail quadratures.
  double rel_tol = 1e-11;
  CalibrationMode calibration = CalibrationMode::ide;
  /// Switch to Monte Carlo matching at u = 0 and 1 when the u = 0 conditions
  /// are ill-conditioned.
  bool monte_carlo_fallback = true;
  std::uint64_t mc_paths = 1'000'000;
  std::uint64_t mc_seed = 20240601;
  unsigned workers = 0;
};

namespace detail {

/// log of the integral of e^{log_f} over [u_i, inf) for each reserve of a
/// sorted grid, accumulated backwards from the last tail. `rel_err` receives
/// the relative error estimate of each entry.
template <class LogF>
std::vector<double> log_tail_curve(LogF&& log_f, const std::vector<double>& grid, double rel_tol, double scale,
                                   std::vector<double>* rel_err = nullptr) {
  const std::size_t n = grid.size();
  std::vector<double> out(n);
  std::vector<double> err(n, 0.0);
  // Integrands carry rounding from special-function evaluations, so the
  // quadratures report their error instead of failing at tight tolerances.
  specfun::QuadratureOptions opt;
  opt.abs_tol = 0.0;
  opt.rel_tol = rel_tol;
  opt.scale = scale;
  opt.throw_on_failure = false;
  auto piece = [&](double lo, double hi) {
    const double anchor = log_f(lo);
    if (!std::isfinite(anchor)) throw Error(ErrorKind::domain, "exact", "log-integrand is not finite");
    auto f = [&](double v) {
      const double e = log_f(v) - anchor;
      return e < -745.0 ? 0.0 : std::exp(e);
    };
    const auto r = std::isinf(hi) ? specfun::integrate_to_infinity(f, lo, opt) : specfun::integrate(f, lo, hi, opt);
    if (!(r.value > 0.0)) throw Error(ErrorKind::domain, "exact", "tail integral is not positive");
    return std::make_pair(anchor + std::log(r.value), r.abs_error_estimate / r.value);
  };
  std::tie(out[n - 1], err[n - 1]) = piece(grid.back(), std::numeric_limits<double>::infinity());
  for (std::size_t i = n - 1; i-- > 0;) {
    if (grid[i] == grid[i + 1]) {
      out[i] = out[i + 1];
      err[i] = err[i + 1];
      continue;
    }
    const auto [log_seg, seg_err] = piece(grid[i], grid[i + 1]);
    out[i] = log_add_exp(out[i + 1], log_seg);
    const double w_seg = std::exp(log_seg - out[i]);
    err[i] = (1.0 - w_seg) * err[i + 1] + w_seg * seg_err;
  }
  const double worst = *std::max_element(err.begin(), err.end());
  if (!(worst < 1e-6)) {
    throw Error(ErrorKind::non_convergence, "exact",
                "tail quadrature relative error " + format_number(worst) + " exceeds 1e-6");
  }
  if (rel_err) *rel_err = std::move(err);
  return out;
}

/// Sorted copy check shared by the grid evaluators.
inline void require_grid(const std::vector<double>& grid) { require_sorted_reserves(grid, "exact"); }

/// log |sum of s_i e^{l_i}| for a sum known to be positive.
inline double log_signed_sum(const std::vector<double>& sign, const std::vector<double>& logs) {
  double pos = -std::numeric_limits<double>::infinity();
  double neg = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sign.size(); ++i) {
    if (sign[i] > 0.0) pos = log_add_exp(pos, logs[i]);
    if (sign[i] < 0.0) neg = log_add_exp(neg, logs[i]);
  }
  if (!(pos > neg)) throw Error(ErrorKind::calibration, "exact", "calibrated combination is not positive");
  return log_sub_exp(pos, neg);
}

/// Amplitudes by weighted least squares of sum_i g_i s_i(u) against ruin
/// frequencies at u = 0 and u = 1. `basis(u)` returns the s_i(u).
inline std::vector<double> monte_carlo_amplitudes(const ModelSpec& m, const ExactOptions& opt,
                                                  const std::function<std::vector<double>(double)>& basis) {
  SimulationOptions so;
  so.n_paths = opt.mc_paths;
  so.seed = opt.mc_seed;
  so.workers = opt.workers;
  const std::vector<double> at{0.0, 1.0};
  const auto sim = simulate_ruin_auto(m, at, so);
  const auto b0 = basis(0.0);
  const auto b1 = basis(1.0);
  const std::array<const std::vector<double>*, 2> rows{&b0, &b1};
  if (b0.size() == 1) {
    double num = 0.0, den = 0.0;
    for (int j = 0; j < 2; ++j) {
      const double var = std::max(sim[j].psi_hat * (1.0 - sim[j].psi_hat), 1.0) / static_cast<double>(sim[j].n_paths);
      num += (*rows[j])[0] * sim[j].psi_hat / var;
      den += (*rows[j])[0] * (*rows[j])[0] / var;
    }
    if (!(den > 0.0)) throw Error(ErrorKind::calibration, "exact", "Monte Carlo calibration is degenerate");
    return {num / den};
  }
  const double det = b0[0] * b1[1] - b0[1] * b1[0];
  if (!(std::abs(det) > 0.0)) throw Error(ErrorKind::calibration, "exact", "Monte Carlo calibration is singular");
  return {(sim[0].psi_hat * b1[1] - sim[1].psi_hat * b0[1]) / det,
          (b0[0] * sim[1].psi_hat - b1[0] * sim[0].psi_hat) / det};
}

inline RuinCurve make_curve(const ModelSpec& m, Method method) {
  RuinCurve c;
  c.method = method;
  c.model = m;
  return c;
}

inline RuinPoint make_point(double u, double log_psi, double rel_err) {
  RuinPoint p;
  p.u = u;
  p.log_psi = log_psi;
  p.psi = std::exp(log_psi);
  p.err = p.psi * rel_err;
  return p;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// exponential interarrivals, exponential claims

/// psi for any premium: lambda I(u) / (1 + lambda I(0)) with
/// I(u) = integral over [u, inf) of exp(-mu v + Lambda(v)) / p(v),
/// Lambda(v) = integral of lambda / p over [0, v].
inline RuinCurve ruin_exp_exp_general(const PremiumFunction& p, double lambda, double mu, const std::vector<double>& grid,
                                      const ExactOptions& opt = {}) {
  const ModelSpec m(ModelCase::exp_exp, lambda, mu, p);
  m.validate();
  detail::require_grid(grid);
  const double c_inf = p.limit_at_infinity();
  if (std::isfinite(c_inf) && !(mu - lambda / c_inf > 0.0)) {
    throw Error(ErrorKind::divergence, "exact",
                "normalising integral diverges: mu - lambda / p(inf) = " + detail::format_number(mu - lambda / c_inf) +
                    " is not positive");
  }
  std::function<double(double)> big_lambda;
  if (p.is_constant()) {
    big_lambda = [lambda, c = p.c()](double v) { return lambda * v / c; };
  } else if (p.is_linear()) {
    big_lambda = [lambda, c = p.c(), e = p.eps()](double v) { return lambda / e * std::log1p(e * v / c); };
  } else {
    auto cum = std::make_shared<specfun::CumulativeIntegral>([p, lambda](double y) { return lambda / p(y); }, 1.0, 1e-13);
    big_lambda = [cum](double v) { return (*cum)(v); };
  }
  auto log_f = [&](double v) { return -mu * v + big_lambda(v) - std::log(p(v)); };
  const double rate = std::isfinite(c_inf) ? mu - lambda / c_inf : mu;
  std::vector<double> grid0 = grid;
  const bool has_zero = grid.front() == 0.0;
  if (!has_zero) grid0.insert(grid0.begin(), 0.0);
  std::vector<double> rel;
  std::vector<double> log_i;
  try {
    log_i = detail::log_tail_curve(log_f, grid0, opt.rel_tol, 1.0 / rate, &rel);
  } catch (const Error& e) {
    throw Error(ErrorKind::divergence, "exact", std::string("normalising integral failed to converge: ") + e.what());
  }
  const double log_den = detail::log_add_exp(0.0, std::log(lambda) + log_i[0]);
  auto curve = detail::make_curve(m, Method::exact);
  curve.calibration.gamma = {lambda / std::exp(log_den)};
  for (std::size_t i = has_zero ? 0 : 1; i < grid0.size(); ++i) {
    curve.points.push_back(
        detail::make_point(grid0[i], std::log(lambda) + log_i[i] - log_den, rel[i] + rel[0] + 1e-13));
  }
  return curve;
}

inline double ruin_exp_exp_general(const PremiumFunction& p, double lambda, double mu, double u) {
  return ruin_exp_exp_general(p, lambda, mu, std::vector<double>{u}).points.front().psi;
}

/// log psi for p = c + eps u through upper incomplete gamma functions,
/// combined in log space so that lambda / eps may be large.
inline double log_ruin_exp_exp_linear(double c, double eps, double lambda, double mu, double u) {
  if (!(c > 0.0) || !(eps > 0.0) || !(lambda > 0.0) || !(mu > 0.0) || !(u >= 0.0)) {
    throw Error(ErrorKind::invalid_argument, "exact", "need c, eps, lambda, mu > 0 and u >= 0");
  }
  const double eta = lambda / eps;
  const double log_scale = std::log(lambda) + (eta - 1.0) * std::log(eps);
  const double num = log_scale + specfun::log_upper_incomplete_gamma(mu * (c + eps * u) / eps, eta);
  const double first = eta * (std::log(mu) + std::log(c)) - mu * c / eps;
  const double den =
      detail::log_add_exp(first, log_scale + specfun::log_upper_incomplete_gamma(mu * c / eps, eta));
  const double out = num - den;
  if (!std::isfinite(out)) {
    throw Error(ErrorKind::overflow, "exact", "log-space evaluation overflowed for lambda / eps = " + detail::format_number(eta));
  }
  return out;
}

inline double ruin_exp_exp_linear(double c, double eps, double lambda, double mu, double u) {
  return std::exp(log_ruin_exp_exp_linear(c, eps, lambda, mu, u));
}

inline RuinCurve ruin_exp_exp_linear(double c, double eps, double lambda, double mu, const std::vector<double>& grid) {
  detail::require_grid(grid);
  auto curve = detail::make_curve(ModelSpec(ModelCase::exp_exp, lambda, mu, PremiumFunction::linear(c, eps)), Method::exact);
  for (double u : grid) curve.points.push_back(detail::make_point(u, log_ruin_exp_exp_linear(c, eps, lambda, mu, u), 1e-12));
  return curve;
}

// ---------------------------------------------------------------------------
// constant premium

/// psi = sum of amplitudes[i] * exp(exponents[i] * u).
struct ConstantPremiumSolution {
  ModelSpec model;
  std::vector<double> exponents;
  std::vector<double> amplitudes;

  /// Decay rates, -exponents.
  std::vector<double> decay_rates() const {
    std::vector<double> r;
    for (double e : exponents) r.push_back(-e);
    return r;
  }

  double log_psi(double u) const {
    std::vector<double> sign, logs;
    for (std::size_t i = 0; i < exponents.size(); ++i) {
      sign.push_back(amplitudes[i] > 0.0 ? 1.0 : -1.0);
      logs.push_back(std::log(std::abs(amplitudes[i])) + exponents[i] * u);
    }
    return detail::log_signed_sum(sign, logs);
  }

  double psi(double u) const { return std::exp(log_psi(u)); }

  RuinCurve curve(const std::vector<double>& grid) const {
    detail::require_grid(grid);
    auto c = detail::make_curve(model, Method::exact);
    c.calibration.gamma = amplitudes;
    for (double u : grid) c.points.push_back(detail::make_point(u, log_psi(u), 1e-13));
    return c;
  }
};

inline ConstantPremiumSolution ruin_constant_premium(ModelCase mc, double c, double lambda, double mu) {
  const ModelSpec m(mc, lambda, mu, PremiumFunction::constant(c));
  const auto sl = safe_load_check(m);
  if (!sl.satisfied) {
    throw Error(ErrorKind::safe_load, "exact",
                "net-profit condition fails for " + std::string(to_string(mc)) + " at c = " + detail::format_number(c));
  }
  ConstantPremiumSolution s;
  s.model = m;
  switch (mc) {
    case ModelCase::exp_exp:
      s.exponents = {-(mu - lambda / c)};
      s.amplitudes = {lambda / (c * mu)};
      break;
    case ModelCase::erlang2_exp: {
      const double sigma = hat_roots(lambda, mu, c).rho1;
      s.exponents = {sigma};
      s.amplitudes = {lambda * lambda / ((lambda - c * sigma) * (lambda - c * sigma))};
      break;
    }
    case ModelCase::exp_erlang2: {
      const auto r = tilde_roots(lambda, mu, c);
      // h = g1 e^{s1 u} + g2 e^{s2 u}; conditions at u = 0 on psi and h'/h.
      const double a11 = c - lambda / r.rho1, a12 = c - lambda / r.rho2;
      const double a21 = c * r.rho1 - lambda, a22 = c * r.rho2 - lambda;
      const double det = a11 * a22 - a12 * a21;
      const double g1 = lambda * a22 / det;
      const double g2 = -lambda * a21 / det;
      s.exponents = {r.rho1, r.rho2};
      s.amplitudes = {-g1 / r.rho1, -g2 / r.rho2};
      break;
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Erlang(2) interarrivals, exponential claims, p = c + eps u

/// psi = gamma * integral over [u, inf) of e^{-mu v} x^beta U(a, b, mu x / eps),
/// x = c + eps v. gamma is fixed once, on first use, by the integro-differential
/// equation at u = 0.
class Erlang2ExpLinear {
 public:
  Erlang2ExpLinear(double c, double eps, double lambda, double mu, ExactOptions opt = {})
      : model_(ModelCase::erlang2_exp, lambda, mu, PremiumFunction::linear(c, eps)), opt_(opt) {
    model_.validate();
    c_ = c;
    eps_ = eps;
    const double s = std::sqrt(1.0 + 4.0 * lambda / eps);
    a_ = 1.0 + (eps + 2.0 * lambda + eps * s) / (2.0 * eps);
    b_ = 1.0 + s;
    beta_ = -0.5 + lambda / eps + 0.5 * s;
  }

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double beta() const noexcept { return beta_; }

  /// log h(v) - log h(0).
  double log_h(double v) const {
    const double x = c_ + eps_ * v;
    const double mu = model_.mu;
    return -mu * v + beta_ * std::log(x / c_) + specfun::log_kummer_u(a_, b_, mu * x / eps_) - log_u0();
  }

  /// h'(0) / h(0).
  double w0() const {
    const double mu = model_.mu;
    const double z0 = mu * c_ / eps_;
    const double ratio = std::exp(specfun::log_kummer_u(a_ + 1.0, b_ + 1.0, z0) - specfun::log_kummer_u(a_, b_, z0));
    return -mu + beta_ * eps_ / c_ - mu * a_ * ratio;
  }

  const Calibration& calibration() const {
    std::call_once(once_, [this] { calibrate(); });
    return calibration_;
  }

  RuinCurve curve(const std::vector<double>& grid) const {
    detail::require_grid(grid);
    const auto& cal = calibration();
    std::vector<double> rel;
    const auto log_s = tail(grid, &rel);
    auto out = detail::make_curve(model_, Method::exact);
    out.calibration = cal;
    if (cal.from_monte_carlo) out.warnings.push_back("amplitude calibrated against Monte Carlo");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      out.points.push_back(detail::make_point(grid[i], std::log(cal.gamma[0]) + log_s[i], rel[i] + s0_rel_ + 1e-11));
    }
    return out;
  }

  double psi(double u) const { return curve({u}).points.front().psi; }

 private:
  double log_u0() const { return specfun::log_kummer_u(a_, b_, model_.mu * c_ / eps_); }

  std::vector<double> tail(const std::vector<double>& grid, std::vector<double>* rel) const {
    const double lu0 = log_u0();
    const double mu = model_.mu;
    auto log_f = [&](double v) {
      const double x = c_ + eps_ * v;
      return -mu * v + beta_ * std::log(x / c_) + specfun::log_kummer_u(a_, b_, mu * x / eps_) - lu0;
    };
    return detail::log_tail_curve(log_f, grid, opt_.rel_tol, 1.0 / mu, rel);
  }

  void calibrate() const {
    std::vector<double> rel;
    const double lam = model_.lambda;
    const double s0 = std::exp(tail({0.0}, &rel)[0]);
    s0_rel_ = rel[0];
    const double t1 = lam * lam * s0;
    const double t2 = 2.0 * lam * c_ - c_ * eps_;
    const double t3 = -c_ * c_ * w0();
    const double bracket = t1 + t2 + t3;
    const double scale = std::abs(t1) + std::abs(t2) + std::abs(t3);
    const bool ill = !std::isfinite(bracket) || !(bracket > 1e-8 * scale) || lam * lam * s0 / bracket > 1.0;
    if (opt_.calibration == CalibrationMode::monte_carlo || (ill && opt_.monte_carlo_fallback)) {
      calibration_.gamma = detail::monte_carlo_amplitudes(model_, opt_, [this](double u) {
        return std::vector<double>{std::exp(tail({u}, nullptr)[0])};
      });
      calibration_.from_monte_carlo = true;
      calibration_.residual = std::abs(calibration_.gamma[0] * bracket - lam * lam) / (lam * lam);
      return;
    }
    if (ill) throw Error(ErrorKind::calibration, "exact", "normalisation at u = 0 is ill-conditioned");
    calibration_.gamma = {lam * lam / bracket};
    calibration_.residual = std::abs(calibration_.gamma[0] * bracket - lam * lam) / (lam * lam);
  }

  ModelSpec model_;
  ExactOptions opt_;
  double c_ = 0.0, eps_ = 0.0, a_ = 0.0, b_ = 0.0, beta_ = 0.0;
  mutable std::once_flag once_;
  mutable Calibration calibration_;
  mutable double s0_rel_ = 0.0;
};

inline RuinCurve ruin_erlang2exp_linear(double c, double eps, double lambda, double mu, const std::vector<double>& grid,
                                        const ExactOptions& opt = {}) {
  return Erlang2ExpLinear(c, eps, lambda, mu, opt).curve(grid);
}

inline double ruin_erlang2exp_linear(double c, double eps, double lambda, double mu, double u) {
  return Erlang2ExpLinear(c, eps, lambda, mu).psi(u);
}

// ---------------------------------------------------------------------------
// exponential interarrivals, Erlang(2) claims, p = c + eps u

/// psi = g_I s_I(u) + g_K s_K(u), s_J the tail integral of
/// h_J(v) = e^{-mu x / eps} x^kappa J_n(2 sqrt(lambda mu x) / eps), x = c + eps v,
/// J in {I, K}, kappa = -1/2 + lambda / (2 eps), n = -1 + lambda / eps.
/// Both solutions decay, so both amplitudes are fixed at u = 0.
class ExpErlang2Linear {
 public:
  ExpErlang2Linear(double c, double eps, double lambda, double mu, ExactOptions opt = {})
      : model_(ModelCase::exp_erlang2, lambda, mu, PremiumFunction::linear(c, eps)), opt_(opt) {
    model_.validate();
    c_ = c;
    eps_ = eps;
    kappa_ = -0.5 + lambda / (2.0 * eps);
    order_ = -1.0 + lambda / eps;
    integer_order_ = order_ >= 0.0 && std::abs(order_ - std::round(order_)) < 1e-12;
  }

  double order() const noexcept { return order_; }
  bool integer_order() const noexcept { return integer_order_; }

  double z_of(double v) const { return 2.0 * std::sqrt(model_.lambda * model_.mu * (c_ + eps_ * v)) / eps_; }

  /// log h_J(v) - log h_J(0); J = 0 for I, 1 for K.
  double log_h(int j, double v) const { return log_h_raw(j, v) - log_h_raw(j, 0.0); }

  /// h_J'(0) / h_J(0).
  double w0(int j) const {
    const double z = z_of(0.0);
    const double mu = model_.mu;
    double ratio = 0.0;
    if (j == 0) {
      ratio = specfun::bessel_i_scaled(order_ + 1.0, z) / specfun::bessel_i_scaled(order_, z) + order_ / z;
    } else {
      ratio = -specfun::bessel_k_scaled(order_ + 1.0, z) / specfun::bessel_k_scaled(order_, z) + order_ / z;
    }
    return -mu + kappa_ * eps_ / c_ + ratio * eps_ * z / (2.0 * c_);
  }

  const Calibration& calibration() const {
    std::call_once(once_, [this] { calibrate(); });
    return calibration_;
  }

  RuinCurve curve(const std::vector<double>& grid) const {
    detail::require_grid(grid);
    const auto& cal = calibration();
    std::vector<double> rel_i, rel_k;
    const auto si = tail(0, grid, &rel_i);
    const auto sk = tail(1, grid, &rel_k);
    auto out = detail::make_curve(model_, Method::exact);
    out.calibration = cal;
    if (!integer_order_) {
      out.warnings.push_back("Bessel order " + detail::format_number(order_) +
                             " is not a non-negative integer; real-order evaluation is best effort");
    }
    if (cal.from_monte_carlo) out.warnings.push_back("amplitudes calibrated against Monte Carlo");
    const std::vector<double> sign{cal.gamma[0] >= 0 ? 1.0 : -1.0, cal.gamma[1] >= 0 ? 1.0 : -1.0};
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double li = std::log(std::abs(cal.gamma[0])) + si[i];
      const double lk = std::log(std::abs(cal.gamma[1])) + sk[i];
      const double lp = detail::log_signed_sum(sign, {li, lk});
      const double rel = (std::exp(li - lp) * (rel_i[i] + s0_rel_) + std::exp(lk - lp) * (rel_k[i] + s0_rel_)) + 1e-11;
      out.points.push_back(detail::make_point(grid[i], lp, rel));
    }
    return out;
  }

  double psi(double u) const { return curve({u}).points.front().psi; }

 private:
  double log_h_raw(int j, double v) const {
    const double x = c_ + eps_ * v;
    const double z = z_of(v);
    const double base = -model_.mu * x / eps_ + kappa_ * std::log(x);
    if (j == 0) return base + std::log(specfun::bessel_i_scaled(order_, z)) + z;
    return base + std::log(specfun::bessel_k_scaled(order_, z)) - z;
  }

  std::vector<double> tail(int j, const std::vector<double>& grid, std::vector<double>* rel) const {
    const double h0 = log_h_raw(j, 0.0);
    auto log_f = [&](double v) { return log_h_raw(j, v) - h0; };
    return detail::log_tail_curve(log_f, grid, opt_.rel_tol, eps_ / model_.mu + 1.0 / model_.mu, rel);
  }

  void calibrate() const {
    const double lam = model_.lambda;
    std::vector<double> rel_i, rel_k;
    const double si = std::exp(tail(0, {0.0}, &rel_i)[0]);
    const double sk = std::exp(tail(1, {0.0}, &rel_k)[0]);
    s0_rel_ = std::max(rel_i[0], rel_k[0]);
    // g_I (lam s_I + c) + g_K (lam s_K + c) = lam
    // g_I (c w_I - (lam - eps)) + g_K (c w_K - (lam - eps)) = 0
    const double a11 = lam * si + c_, a12 = lam * sk + c_;
    const double a21 = c_ * w0(0) - (lam - eps_), a22 = c_ * w0(1) - (lam - eps_);
    const double det = a11 * a22 - a12 * a21;
    const double norm = (std::abs(a11) + std::abs(a12)) * (std::abs(a21) + std::abs(a22));
    const bool ill = !std::isfinite(det) || !(std::abs(det) > 1e-10 * norm);
    if (opt_.calibration == CalibrationMode::monte_carlo || (ill && opt_.monte_carlo_fallback)) {
      calibration_.gamma = detail::monte_carlo_amplitudes(model_, opt_, [this](double u) {
        return std::vector<double>{std::exp(tail(0, {u}, nullptr)[0]), std::exp(tail(1, {u}, nullptr)[0])};
      });
      calibration_.from_monte_carlo = true;
    } else {
      if (ill) throw Error(ErrorKind::calibration, "exact", "the two conditions at u = 0 are singular");
      calibration_.gamma = {lam * a22 / det, -lam * a21 / det};
    }
    const auto& g = calibration_.gamma;
    calibration_.residual =
        std::abs(g[0] * a11 + g[1] * a12 - lam) / lam + std::abs(g[0] * a21 + g[1] * a22) / (std::abs(a21) + std::abs(a22));
  }

  ModelSpec model_;
  ExactOptions opt_;
  double c_ = 0.0, eps_ = 0.0, kappa_ = 0.0, order_ = 0.0;
  bool integer_order_ = false;
  mutable std::once_flag once_;
  mutable Calibration calibration_;
  mutable double s0_rel_ = 0.0;
};

inline RuinCurve ruin_experlang2_linear(double c, double eps, double lambda, double mu, const std::vector<double>& grid,
                                        const ExactOptions& opt = {}) {
  return ExpErlang2Linear(c, eps, lambda, mu, opt).curve(grid);
}

inline double ruin_experlang2_linear(double c, double eps, double lambda, double mu, double u) {
  return ExpErlang2Linear(c, eps, lambda, mu).psi(u);
}

}  // namespace ruinprob
