#pragma once

#include <cmath>
#include <limits>

#include "ruinprob/error.hpp"

namespace ruinprob::specfun {

/// log|Gamma(x)| without touching the global `signgam`.
inline double log_gamma(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

/// 1 / Gamma(x), zero at the poles.
inline double reciprocal_gamma(double x) {
  if (x <= 0.0 && x == std::floor(x)) return 0.0;
  if (x > 170.0) return std::exp(-log_gamma(x));
  return 1.0 / std::tgamma(x);
}

namespace detail {

inline constexpr double kEps = std::numeric_limits<double>::epsilon();
inline constexpr double kTiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
inline constexpr int kMaxIter = 100000;

// log of the regularized lower incomplete gamma P(eta, x), power series.
inline double log_lower_regularized_series(double x, double eta) {
  double term = 1.0 / eta;
  double sum = term;
  for (int k = 1; k < kMaxIter; ++k) {
    term *= x / (eta + k);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) {
      return std::log(sum) - x + eta * std::log(x) - log_gamma(eta);
    }
  }
  throw Error(ErrorKind::non_convergence, "specfun", "incomplete gamma series did not converge");
}

// log Gamma(x, eta) by the modified Lentz continued fraction.
inline double log_upper_gamma_cf(double x, double eta) {
  double b = x + 1.0 - eta;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - eta);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return std::log(h) - x + eta * std::log(x);
  }
  throw Error(ErrorKind::non_convergence, "specfun", "incomplete gamma continued fraction did not converge");
}

// Large-x asymptotic series x^(eta-1) e^-x sum_k (eta-1)...(eta-k) / x^k.
// Returns NaN when the series cannot reach full precision.
inline double log_upper_gamma_asymptotic(double x, double eta) {
  double term = 1.0;
  double sum = 1.0;
  double prev = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= (eta - k) / x;
    if (term == 0.0) break;
    if (std::abs(term) > std::abs(prev)) return std::numeric_limits<double>::quiet_NaN();
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps * 0.5) break;
    prev = term;
  }
  return std::log(sum) + (eta - 1.0) * std::log(x) - x;
}

}  // namespace detail

/// log Gamma(x, eta) = log of the integral of t^(eta-1) e^-t over [x, inf).
inline double log_upper_incomplete_gamma(double x, double eta) {
  if (!(eta > 0.0) || !(x >= 0.0) || !std::isfinite(eta)) {
    throw Error(ErrorKind::domain, "specfun", "upper incomplete gamma needs x >= 0 and eta > 0");
  }
  if (x == 0.0) return log_gamma(eta);
  if (x > 60.0 && x > 4.0 * eta * eta) {
    const double v = detail::log_upper_gamma_asymptotic(x, eta);
    if (std::isfinite(v)) return v;
  }
  if (x < eta + 1.0) {
    const double log_p = detail::log_lower_regularized_series(x, eta);
    return log_gamma(eta) + std::log1p(-std::exp(log_p));
  }
  return detail::log_upper_gamma_cf(x, eta);
}

inline double upper_incomplete_gamma(double x, double eta) {
  return std::exp(log_upper_incomplete_gamma(x, eta));
}

/// e^x E1(x) for x > 0.
inline double scaled_exponential_integral_e1(double x) {
  if (!(x > 0.0)) throw Error(ErrorKind::domain, "specfun", "E1 needs x > 0");
  if (x < 1.0) {
    constexpr double euler = 0.57721566490153286061;
    double sum = 0.0;
    double fact = 1.0;
    for (int k = 1; k < 200; ++k) {
      fact *= -x / k;
      const double del = -fact / k;
      sum += del;
      if (std::abs(del) < std::abs(sum) * detail::kEps) break;
    }
    return std::exp(x) * (-euler - std::log(x) + sum);
  }
  double b = x + 1.0;
  double c = 1.0 / detail::kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < detail::kMaxIter; ++i) {
    const double an = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < detail::kEps) return h;
  }
  throw Error(ErrorKind::non_convergence, "specfun", "E1 continued fraction did not converge");
}

inline double exponential_integral_e1(double x) { return std::exp(-x) * scaled_exponential_integral_e1(x); }

}  // namespace ruinprob::specfun
