#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <utility>

#include "ruinprob/error.hpp"
#include "ruinprob/model.hpp"
#include "ruinprob/specfun/cumulative_integral.hpp"

namespace ruinprob {

/// Coefficients of h'' + q1(u) h' + q0(u) h = 0 for h = psi'.
///
/// erlang2-exp: the third-order equation divided by p^2.
/// exp-erlang2: divided by p.
class OdeCoefficients {
 public:
  explicit OdeCoefficients(ModelSpec m) : m_(std::move(m)) {
    m_.validate();
    if (m_.model_case == ModelCase::exp_exp) {
      throw Error(ErrorKind::unsupported_case, "odecore",
                  "exp-exp reduces to a first-order equation; use the closed forms in exact");
    }
  }

  const ModelSpec& model() const noexcept { return m_; }
  ModelCase model_case() const noexcept { return m_.model_case; }
  bool constant() const noexcept { return m_.premium.is_constant(); }
  bool analytic_derivatives() const noexcept { return m_.premium.has_analytic_derivatives(); }

  double q1(double u) const {
    const auto& p = m_.premium;
    const double pv = p(u);
    const double dp = p.d1(u);
    if (m_.model_case == ModelCase::erlang2_exp) return (2.0 * dp - 2.0 * m_.lambda) / pv + m_.mu;
    return (2.0 * dp - m_.lambda) / pv + 2.0 * m_.mu;
  }

  double q0(double u) const {
    const auto& p = m_.premium;
    const double pv = p(u);
    const double dp = p.d1(u);
    const double lam = m_.lambda;
    const double mu = m_.mu;
    if (m_.model_case == ModelCase::erlang2_exp) {
      return (lam * lam - 2.0 * lam * dp) / (pv * pv) - 2.0 * lam * mu / pv;
    }
    return (p.d2(u) + 2.0 * mu * dp - 2.0 * mu * lam) / pv + mu * mu;
  }

  /// dq1/du; needs closed-form premium derivatives.
  double dq1(double u) const {
    const auto& p = m_.premium;
    const double pv = p(u);
    const double dp = p.d1(u);
    const double d2p = p.d2(u);
    const double lam = m_.lambda;
    if (m_.model_case == ModelCase::erlang2_exp) {
      return 2.0 * d2p / pv - 2.0 * dp * dp / (pv * pv) + 2.0 * lam * dp / (pv * pv);
    }
    return 2.0 * d2p / pv - 2.0 * dp * dp / (pv * pv) + lam * dp / (pv * pv);
  }

  /// dq0/du; the exp-erlang2 form involves p'''.
  double dq0(double u) const {
    const auto& p = m_.premium;
    const double pv = p(u);
    const double dp = p.d1(u);
    const double d2p = p.d2(u);
    const double lam = m_.lambda;
    const double mu = m_.mu;
    const double p2 = pv * pv;
    if (m_.model_case == ModelCase::erlang2_exp) {
      return -2.0 * lam * lam * dp / (p2 * pv) - 2.0 * lam * (d2p / p2 - 2.0 * dp * dp / (p2 * pv)) +
             2.0 * lam * mu * dp / p2;
    }
    return p.d3(u) / pv - d2p * dp / p2 + 2.0 * mu * (d2p / pv - dp * dp / p2) + 2.0 * mu * lam * dp / p2;
  }

 private:
  ModelSpec m_;
};

inline OdeCoefficients build_coefficients(const ModelSpec& m) { return OdeCoefficients(m); }

struct RootPair {
  double rho1 = 0.0;  // smaller root
  double rho2 = 0.0;  // larger root
};

/// Real roots of rho^2 + q1 rho + q0 = 0 with rho1 <= rho2. The root of
/// larger magnitude is formed first and the other from the product q0.
inline RootPair quadratic_roots(double q1, double q0) {
  const double disc = q1 * q1 - 4.0 * q0;
  if (!(disc >= 0.0)) {
    throw Error(ErrorKind::complex_roots, "odecore",
                "characteristic discriminant " + detail::format_number(disc) + " is negative");
  }
  const double sq = std::sqrt(disc);
  RootPair r;
  if (q1 > 0.0) {
    r.rho1 = 0.5 * (-q1 - sq);
    r.rho2 = q0 / r.rho1;
  } else {
    r.rho2 = 0.5 * (-q1 + sq);
    r.rho1 = r.rho2 != 0.0 ? q0 / r.rho2 : 0.0;
  }
  return r;
}

inline RootPair char_roots(const OdeCoefficients& k, double u) { return quadratic_roots(k.q1(u), k.q0(u)); }

inline double root_value(const OdeCoefficients& k, int index, double u) {
  const auto r = char_roots(k, u);
  return index == 1 ? r.rho1 : r.rho2;
}

namespace detail {

inline void check_root_index(int index) {
  if (index != 1 && index != 2) throw Error(ErrorKind::invalid_argument, "odecore", "root index must be 1 or 2");
}

inline double root_slope_denominator(const OdeCoefficients& k, int index, double u, double rho) {
  const double d = 2.0 * rho + k.q1(u);
  if (std::abs(d) < 1e-12) {
    throw Error(ErrorKind::degenerate_root, "odecore",
                "roots coincide at u = " + format_number(u) + " (|2 rho + q1| < 1e-12)");
  }
  (void)index;
  return d;
}

}  // namespace detail

/// d rho_i / du. Closed form for built-in premiums, finite differences
/// with step max(1e-6 u, 1e-8) otherwise (one-sided near u = 0).
inline double root_derivative(const OdeCoefficients& k, int index, double u) {
  detail::check_root_index(index);
  const double rho = root_value(k, index, u);
  if (k.constant()) return 0.0;
  if (k.analytic_derivatives()) {
    const double d = detail::root_slope_denominator(k, index, u, rho);
    return -(k.dq1(u) * rho + k.dq0(u)) / d;
  }
  const double h = std::max(1e-6 * u, 1e-8);
  if (u < h) {
    return (-3.0 * rho + 4.0 * root_value(k, index, u + h) - root_value(k, index, u + 2.0 * h)) / (2.0 * h);
  }
  return (root_value(k, index, u + h) - root_value(k, index, u - h)) / (2.0 * h);
}

/// First-order correction rho_i^(1) = -rho_i' / (2 rho_i + q1).
inline double root_correction(const OdeCoefficients& k, int index, double u) {
  detail::check_root_index(index);
  const double rho = root_value(k, index, u);
  const double d = detail::root_slope_denominator(k, index, u, rho);
  if (k.constant()) return 0.0;
  return -root_derivative(k, index, u) / d;
}

/// Roots of the erlang2-exp characteristic equation at constant premium c.
inline RootPair hat_roots(double lambda, double mu, double c) {
  return quadratic_roots(mu - 2.0 * lambda / c, (lambda * lambda - 2.0 * lambda * mu * c) / (c * c));
}

/// Roots of the exp-erlang2 characteristic equation at constant premium c.
inline RootPair tilde_roots(double lambda, double mu, double c) {
  return quadratic_roots(2.0 * mu - lambda / c, mu * mu - 2.0 * mu * lambda / c);
}

/// Root functions and corrections of one model, plus the constant-premium
/// roots at c = p(inf) when that level is finite.
class CharRoots {
 public:
  explicit CharRoots(OdeCoefficients k) : k_(std::move(k)) {
    const double c = k_.model().premium.limit_at_infinity();
    if (std::isfinite(c)) {
      const auto& m = k_.model();
      limit_ = m.model_case == ModelCase::erlang2_exp ? hat_roots(m.lambda, m.mu, c) : tilde_roots(m.lambda, m.mu, c);
      has_limit_ = true;
    }
  }

  double rho(int index, double u) const {
    detail::check_root_index(index);
    return root_value(k_, index, u);
  }
  double correction(int index, double u) const { return root_correction(k_, index, u); }
  bool has_limit_roots() const noexcept { return has_limit_; }
  /// Constant-premium roots at p(inf); only meaningful when has_limit_roots().
  const RootPair& limit_roots() const noexcept { return limit_; }
  const OdeCoefficients& coefficients() const noexcept { return k_; }

 private:
  OdeCoefficients k_;
  RootPair limit_{};
  bool has_limit_ = false;
};

/// y -> exp{ integral over [0, y] of (rho_i + rho_i^(1)) }, kept in log form.
/// The inner integral is cached on a unit grid and extended on demand.
class StableIntegrand {
 public:
  StableIntegrand(const OdeCoefficients& k, int index, double tol = 1e-11) : index_(index) {
    detail::check_root_index(index);
    if (k.constant()) {
      rate_ = root_value(k, index, 0.0);
      return;
    }
    auto shared = std::make_shared<OdeCoefficients>(k);
    auto g = [shared, index](double z) {
      return root_value(*shared, index, z) + root_correction(*shared, index, z);
    };
    cumulative_ = std::make_shared<specfun::CumulativeIntegral>(g, 1.0, tol);
  }

  double log_value(double y) const {
    if (!cumulative_) return rate_ * y;
    return (*cumulative_)(y);
  }
  double operator()(double y) const { return std::exp(log_value(y)); }
  int index() const noexcept { return index_; }

 private:
  int index_;
  double rate_ = 0.0;
  std::shared_ptr<specfun::CumulativeIntegral> cumulative_;
};

inline StableIntegrand stable_integrand(const OdeCoefficients& k, int index, double tol = 1e-11) {
  return StableIntegrand(k, index, tol);
}

}  // namespace ruinprob
