#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ruinprob/curve.hpp"
#include "ruinprob/detail/logmath.hpp"
#include "ruinprob/error.hpp"
#include "ruinprob/exact.hpp"
#include "ruinprob/model.hpp"
#include "ruinprob/odecore.hpp"
#include "ruinprob/specfun.hpp"

namespace ruinprob {

enum class EnvelopeClass { p1, p2, linear, constant };

inline std::string_view to_string(EnvelopeClass c) {
  switch (c) {
    case EnvelopeClass::p1: return "P1";
    case EnvelopeClass::p2: return "P2";
    case EnvelopeClass::linear: return "linear";
    case EnvelopeClass::constant: return "constant";
  }
  return "unknown";
}

/// Unnormalised large-u form of psi, up to a constant to be fitted.
struct AsymptoticForm {
  ModelCase model_case = ModelCase::exp_exp;
  EnvelopeClass premium_class = EnvelopeClass::constant;
  /// log of the leading (slowest decaying) term; this is what gets fitted.
  std::function<double(double)> log_envelope;
  /// Every term of the form, leading term first. Terms after the first
  /// carry constants the fit does not resolve.
  std::vector<std::function<double(double)>> log_terms;
  std::optional<double> fitted_constant;
  std::pair<double, double> fit_window{0.0, 0.0};
  /// exp(max - min) - 1 of log(reference / envelope) on the window.
  double spread = std::numeric_limits<double>::quiet_NaN();

  double envelope(double u) const { return std::exp(log_envelope(u)); }

  /// log of fitted_constant * envelope(u).
  double log_asymptote(double u) const {
    if (!fitted_constant) throw Error(ErrorKind::invalid_argument, "analysis", "constant has not been fitted");
    return std::log(*fitted_constant) + log_envelope(u);
  }
};

namespace detail {

inline EnvelopeClass envelope_class(const PremiumFunction& p) {
  if (p.is_constant()) return EnvelopeClass::constant;
  if (p.is_linear()) return EnvelopeClass::linear;
  return classify_premium(p) == PremiumClass::p1 ? EnvelopeClass::p1 : EnvelopeClass::p2;
}

// log of the tail integral of e^{log_f} over [u, inf).
inline std::function<double(double)> log_tail_of(std::function<double(double)> log_f, double scale) {
  return [log_f = std::move(log_f), scale](double u) {
    return specfun::log_integrate_to_infinity(log_f, u, 1e-10, scale).log_value;
  };
}

inline std::function<double(double)> stable_tail(const OdeCoefficients& k, int index, double scale) {
  auto integrand = std::make_shared<StableIntegrand>(k, index);
  return log_tail_of([integrand](double y) { return integrand->log_value(y); }, scale);
}

inline std::function<double(double)> exponential_term(double rho) {
  return [rho](double u) { return rho * u - std::log(-rho); };
}

}  // namespace detail

/// 1/z - e^z E1(z), evaluated without cancellation for large z.
inline double e1_deficit(double z) {
  if (z > 40.0) {
    // Asymptotic series 1/z^2 - 2/z^3 + 6/z^4 - ..., cut at its smallest term.
    double term = 1.0 / (z * z);
    double sum = term;
    for (int k = 2; k < 60; ++k) {
      const double next = -term * k / z;
      if (std::abs(next) > std::abs(term)) break;
      term = next;
      sum += term;
      if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
  }
  return 1.0 / z - specfun::scaled_exponential_integral_e1(z);
}

/// log of e^{-mu u} (1/x - (mu/eps) e^{mu c/eps} E1(mu x / eps)), x = c + eps u:
/// the large-u form of the erlang2-exp linear-premium solution obtained from
/// the Kummer representation. Proportional to the tail integral of
/// e^{-mu y} x(y)^{-2}.
inline double log_kummer_envelope(double c, double eps, double mu, double u) {
  const double x = c + eps * u;
  const double z = mu * x / eps;
  return -mu * u + std::log(mu / eps) + std::log(e1_deficit(z));
}

/// Envelope of psi for a model; hypothesis_violation when no stable
/// envelope exists.
inline AsymptoticForm envelope(const ModelSpec& m) {
  m.validate();
  AsymptoticForm f;
  f.model_case = m.model_case;
  f.premium_class = detail::envelope_class(m.premium);
  const auto& p = m.premium;
  const double lam = m.lambda, mu = m.mu;
  const bool bounded = f.premium_class == EnvelopeClass::constant || f.premium_class == EnvelopeClass::p1;
  const double c_inf = p.limit_at_infinity();

  switch (m.model_case) {
    case ModelCase::exp_exp: {
      if (bounded && !(mu - lam / c_inf > 0.0)) {
        throw Error(ErrorKind::hypothesis_violation, "analysis", "exp-exp envelope needs mu > lambda / p(inf)");
      }
      std::function<double(double)> big_lambda;
      if (p.is_constant()) {
        big_lambda = [lam, c = p.c()](double u) { return lam * u / c; };
      } else if (p.is_linear()) {
        big_lambda = [lam, c = p.c(), e = p.eps()](double u) { return lam / e * std::log1p(e * u / c); };
      } else {
        auto cum = std::make_shared<specfun::CumulativeIntegral>([p, lam](double y) { return lam / p(y); }, 1.0, 1e-12);
        big_lambda = [cum](double u) { return (*cum)(u); };
      }
      if (bounded) {
        f.log_envelope = [mu, big_lambda](double u) { return -mu * u + big_lambda(u); };
      } else {
        f.log_envelope = [mu, big_lambda, p](double u) { return -mu * u + big_lambda(u) - std::log(p(u)); };
      }
      break;
    }
    case ModelCase::erlang2_exp: {
      if (bounded) {
        const auto r = hat_roots(lam, mu, c_inf);
        if (!(r.rho1 < 0.0)) {
          throw Error(ErrorKind::hypothesis_violation, "analysis",
                      "2c/lambda < 1/mu at c = p(inf): both asymptotic special solutions are unstable");
        }
        f.log_envelope = detail::exponential_term(r.rho1);
      } else if (p.is_linear()) {
        const double c = p.c(), eps = p.eps();
        f.log_envelope = detail::log_tail_of(
            [mu, c, eps](double y) { return -mu * y - 2.0 * std::log1p(eps * y / c); }, 1.0 / mu);
      } else {
        f.log_envelope = detail::stable_tail(OdeCoefficients(m), 1, 1.0 / mu);
      }
      break;
    }
    case ModelCase::exp_erlang2: {
      if (bounded) {
        const auto r = tilde_roots(lam, mu, c_inf);
        if (r.rho2 < 0.0) {
          f.log_envelope = detail::exponential_term(r.rho2);
          f.log_terms = {f.log_envelope, detail::exponential_term(r.rho1)};
        } else if (r.rho1 < 0.0) {
          f.log_envelope = detail::exponential_term(r.rho1);
        } else {
          throw Error(ErrorKind::hypothesis_violation, "analysis", "no negative characteristic root at p(inf)");
        }
      } else if (p.is_linear()) {
        const double c = p.c(), eps = p.eps();
        auto branch = [=](double sign) {
          return detail::log_tail_of(
              [=](double y) {
                const double x = c + eps * y;
                return -mu * y + sign * 2.0 / eps * (std::sqrt(lam * mu * x) - std::sqrt(lam * mu * c)) +
                       (-0.75 + lam / (2.0 * eps)) * std::log(x / c);
              },
              1.0 / mu);
        };
        f.log_envelope = branch(+1.0);
        f.log_terms = {f.log_envelope, branch(-1.0)};
      } else {
        const OdeCoefficients k(m);
        f.log_envelope = detail::stable_tail(k, 2, 1.0 / mu);
        f.log_terms = {f.log_envelope, detail::stable_tail(k, 1, 1.0 / mu)};
      }
      break;
    }
  }
  if (f.log_terms.empty()) f.log_terms = {f.log_envelope};
  return f;
}

/// Constant of `form` as the geometric mean of reference / envelope over the
/// window. The default window is [u1, 2 u1], u1 the first reserve where the
/// reference falls below 1e-4.
inline AsymptoticForm fit_constant(AsymptoticForm form, const RuinCurve& reference,
                                   std::optional<std::pair<double, double>> window = std::nullopt) {
  if (reference.points.empty()) throw Error(ErrorKind::invalid_argument, "analysis", "reference curve is empty");
  if (!window) {
    const auto it = std::find_if(reference.points.begin(), reference.points.end(),
                                 [](const RuinPoint& pt) { return pt.psi < 1e-4; });
    if (it == reference.points.end()) {
      throw Error(ErrorKind::invalid_argument, "analysis", "reference never drops below 1e-4; extend the grid");
    }
    window = std::make_pair(it->u, 2.0 * it->u);
  }
  const auto [lo, hi] = *window;
  if (!(hi > lo) || reference.points.back().u < hi) {
    throw Error(ErrorKind::invalid_argument, "analysis",
                "reference curve must extend to the end of the fit window " + detail::format_number(hi));
  }
  std::vector<double> logs;
  for (const auto& pt : reference.points) {
    if (pt.u < lo || pt.u > hi) continue;
    const double r = pt.log_psi - form.log_envelope(pt.u);
    if (!std::isfinite(r)) throw Error(ErrorKind::fit, "analysis", "envelope or reference vanishes on the window");
    logs.push_back(r);
  }
  if (logs.size() < 2) throw Error(ErrorKind::invalid_argument, "analysis", "fewer than two reference points in window");
  double mean = 0.0;
  for (double v : logs) mean += v;
  mean /= static_cast<double>(logs.size());
  const auto [mn, mx] = std::minmax_element(logs.begin(), logs.end());
  form.spread = std::expm1(*mx - *mn);
  form.fit_window = *window;
  if (form.spread > 0.10) {
    throw Error(ErrorKind::fit, "analysis",
                "reference / envelope varies by " + detail::format_number(100.0 * form.spread) +
                    "% on the window; the asymptotic regime is not reached");
  }
  form.fitted_constant = std::exp(mean);
  return form;
}

struct CompareRow {
  double u = 0.0;
  double psi_linear = 0.0;
  double psi_constant = 0.0;
  double ratio = 0.0;
  double log_ratio = 0.0;
};

struct CompareTable {
  std::vector<CompareRow> rows;
  std::vector<std::string> warnings;
};

/// psi for p = c + eps u against psi for p = c on the same grid. When the
/// constant-premium model has no net profit its ruin is certain and
/// psi_constant = 1.
inline CompareTable compare_linear_vs_constant(ModelCase mc, double c, double eps, double lambda, double mu,
                                               const std::vector<double>& grid) {
  require_sorted_reserves(grid, "analysis");
  CompareTable t;
  RuinCurve lin;
  switch (mc) {
    case ModelCase::exp_exp: lin = ruin_exp_exp_linear(c, eps, lambda, mu, grid); break;
    case ModelCase::erlang2_exp: lin = ruin_erlang2exp_linear(c, eps, lambda, mu, grid); break;
    case ModelCase::exp_erlang2: lin = ruin_experlang2_linear(c, eps, lambda, mu, grid); break;
  }
  t.warnings = lin.warnings;
  std::optional<ConstantPremiumSolution> constant;
  try {
    constant = ruin_constant_premium(mc, c, lambda, mu);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::safe_load && e.kind() != ErrorKind::boundary) throw;
    t.warnings.push_back("constant premium " + detail::format_number(c) +
                         " has no net profit; its ruin probability is 1");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CompareRow r;
    r.u = grid[i];
    r.psi_linear = lin.points[i].psi;
    const double log_const = constant ? constant->log_psi(grid[i]) : 0.0;
    r.psi_constant = std::exp(log_const);
    r.log_ratio = lin.points[i].log_psi - log_const;
    r.ratio = std::exp(r.log_ratio);
    t.rows.push_back(r);
  }
  return t;
}

}  // namespace ruinprob
