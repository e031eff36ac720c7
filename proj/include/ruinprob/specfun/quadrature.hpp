#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <vector>

#include "ruinprob/error.hpp"

namespace ruinprob::specfun {

struct QuadratureResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  std::size_t evaluations = 0;
};

struct QuadratureOptions {
  double abs_tol = 1e-12;
  double rel_tol = 0.0;
  std::size_t max_evaluations = 200000;
  // Length scale of the [a, inf) -> [0, 1) map t = a + scale * s / (1 - s).
  double scale = 1.0;
  bool throw_on_failure = true;
};

namespace detail {

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a = 0.0;
  double b = 0.0;
  double value = 0.0;
  double error = 0.0;
  bool operator<(const Segment& other) const { return error < other.error; }
};

inline double checked(double v) {
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::domain, "specfun", "integrand returned a non-finite value");
  }
  return v;
}

template <class F>
Segment gk15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = checked(f(center));
  double resg = fc * kWg[3];
  double resk = fc * kWgk[7];
  double resabs = std::abs(resk);
  std::array<double, 7> fv1{};
  std::array<double, 7> fv2{};
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    fv1[j] = checked(f(center - dx));
    fv2[j] = checked(f(center + dx));
    const double sum = fv1[j] + fv2[j];
    resk += kWgk[j] * sum;
    resabs += kWgk[j] * (std::abs(fv1[j]) + std::abs(fv2[j]));
    if (j % 2 == 1) resg += kWg[j / 2] * sum;
  }
  const double reskh = resk * 0.5;
  double resasc = kWgk[7] * std::abs(fc - reskh);
  for (int j = 0; j < 7; ++j) {
    resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
  }
  const double ah = std::abs(half);
  resk *= half;
  resabs *= ah;
  resasc *= ah;
  double err = std::abs((resk - resg * half));
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
    err = std::max(50.0 * eps * resabs, err);
  }
  return {a, b, resk, err};
}

template <class F>
QuadratureResult adaptive(F& f, double a, double b, const QuadratureOptions& opt) {
  std::priority_queue<Segment> heap;
  std::vector<Segment> frozen;
  Segment first = gk15(f, a, b);
  std::size_t evals = 15;
  double total = first.value;
  double total_err = first.error;
  heap.push(first);

  auto target = [&] { return std::max(opt.abs_tol, opt.rel_tol * std::abs(total)); };
  while (!heap.empty() && total_err > target() && evals < opt.max_evaluations) {
    Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b) ||
        std::abs(worst.b - worst.a) < 1e-15 * std::max(std::abs(worst.a), std::abs(worst.b))) {
      frozen.push_back(worst);
      continue;
    }
    Segment left = gk15(f, worst.a, mid);
    Segment right = gk15(f, mid, worst.b);
    evals += 30;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }

  // Resum to shed the drift of the running totals.
  std::vector<Segment> all = std::move(frozen);
  while (!heap.empty()) {
    all.push_back(heap.top());
    heap.pop();
  }
  std::sort(all.begin(), all.end(), [](const Segment& x, const Segment& y) { return x.a < y.a; });
  total = 0.0;
  total_err = 0.0;
  for (const auto& s : all) {
    total += s.value;
    total_err += s.error;
  }
  QuadratureResult out{total, total_err, evals};
  if (opt.throw_on_failure && total_err > std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
    throw Error(ErrorKind::non_convergence, "specfun",
                "quadrature error estimate " + std::to_string(total_err) +
                    " stagnated above tolerance after " + std::to_string(evals) + " evaluations");
  }
  return out;
}

}  // namespace detail

/// Adaptive Gauss-Kronrod quadrature over a finite interval.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
  if (a == b) return {0.0, 0.0, 1};
  auto fn = [&f](double t) { return static_cast<double>(f(t)); };
  return detail::adaptive(fn, a, b, opt);
}

/// Integral over [a, inf). The half line is mapped onto [0, 1) through
/// t = a + scale * s / (1 - s) and integrated adaptively; the mapped
/// integrand must vanish (not overflow) as t grows.
template <class F>
QuadratureResult integrate_to_infinity(F&& f, double a, const QuadratureOptions& opt) {
  if (!(opt.scale > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "specfun", "quadrature scale must be positive");
  }
  const double scale = opt.scale;
  auto mapped = [&f, a, scale](double s) -> double {
    const double one_minus = 1.0 - s;
    const double t = a + scale * s / one_minus;
    const double v = f(t);
    if (v == 0.0) return 0.0;
    return v * scale / (one_minus * one_minus);
  };
  return detail::adaptive(mapped, 0.0, 1.0, opt);
}

template <class F>
QuadratureResult integrate_to_infinity(F&& f, double a, double tol) {
  if (!(tol > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "specfun", "quadrature tolerance must be positive");
  }
  QuadratureOptions opt;
  opt.abs_tol = tol;
  opt.rel_tol = 0.0;
  return integrate_to_infinity(std::forward<F>(f), a, opt);
}

/// log of the integral of exp(log_f) over [a, inf), evaluated relative to
/// log_f(a) so that tails far below the double range stay representable.
struct LogQuadratureResult {
  double log_value = 0.0;
  double rel_error_estimate = 0.0;
  std::size_t evaluations = 0;
};

template <class LogF>
LogQuadratureResult log_integrate_to_infinity(LogF&& log_f, double a, double rel_tol, double scale = 1.0) {
  const double anchor = log_f(a);
  if (!std::isfinite(anchor)) {
    throw Error(ErrorKind::domain, "specfun", "log-integrand is not finite at the lower limit");
  }
  QuadratureOptions opt;
  opt.abs_tol = 0.0;
  opt.rel_tol = rel_tol;
  opt.scale = scale;
  auto f = [&log_f, anchor](double t) {
    const double e = log_f(t) - anchor;
    return e < -745.0 ? 0.0 : std::exp(e);
  };
  const auto r = integrate_to_infinity(f, a, opt);
  if (!(r.value > 0.0)) {
    throw Error(ErrorKind::domain, "specfun", "tail integral is not positive");
  }
  return {anchor + std::log(r.value), r.abs_error_estimate / r.value, r.evaluations};
}

}  // namespace ruinprob::specfun
