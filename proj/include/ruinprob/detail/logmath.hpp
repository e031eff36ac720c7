#pragma once

#include <cmath>
#include <limits>

namespace ruinprob::detail {

inline double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

/// log(exp(a) - exp(b)) for a >= b.
inline double log_sub_exp(double a, double b) {
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a + std::log(-std::expm1(b - a));
}

inline double safe_exp(double x) { return x < -745.0 ? 0.0 : std::exp(x); }

}  // namespace ruinprob::detail
