#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "ruinprob/error.hpp"

namespace ruinprob::detail {

struct DopriOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_init = 0.0;  // 0 picks a starting step automatically
  double h_max = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 50'000'000;
  ErrorKind failure = ErrorKind::stiffness;
  const char* module = "bvp";
};

struct DopriStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  double t_end = 0.0;
  bool stopped_early = false;
};

/// Dormand-Prince 5(4) with FSAL and standard step control. Integrates from
/// t0 towards t1 (either direction). `observe(t, y, dydt)` runs at t0 and
/// after every accepted step; returning false stops the integration there.
/// Non-finite stages count as a rejected step.
template <std::size_t N, class F, class Obs>
DopriStats dopri5(F&& f, double t0, double t1, std::array<double, N>& y, const DopriOptions& o, Obs&& observe) {
  using State = std::array<double, N>;
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  DopriStats stats;
  stats.t_end = t0;
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  State k1{}, k2{}, k3{}, k4{}, k5{}, k6{}, k7{}, tmp{}, ynew{};
  f(t0, y, k1);
  if (!observe(t0, y, k1)) {
    stats.stopped_early = true;
    return stats;
  }
  if (span == 0.0) return stats;

  auto norm_of = [&](const State& v, const State& scale_a, const State& scale_b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = o.atol + o.rtol * std::max(std::abs(scale_a[i]), std::abs(scale_b[i]));
      acc += (v[i] / sc) * (v[i] / sc);
    }
    return std::sqrt(acc / static_cast<double>(N));
  };

  double h = o.h_init;
  if (!(h > 0.0)) {
    const double d0 = norm_of(y, y, y);
    const double d1 = norm_of(k1, y, y);
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min(h, 0.1 * span);
  }
  h = std::min({h, o.h_max, span});

  double t = t0;
  std::size_t steps = 0;
  while (dir * (t1 - t) > 0.0) {
    if (++steps > o.max_steps) {
      throw Error(o.failure, o.module, "step budget exhausted at t = " + std::to_string(t));
    }
    const double remaining = std::abs(t1 - t);
    bool last = false;
    if (h >= remaining) {
      h = remaining;
      last = true;
    }
    const double hs = dir * h;
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + hs * a21 * k1[i];
    f(t + c2 * hs, tmp, k2);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
    f(t + c3 * hs, tmp, k3);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    f(t + c4 * hs, tmp, k4);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    f(t + c5 * hs, tmp, k5);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const double t_next = last ? t1 : t + hs;
    f(t_next, tmp, k6);
    for (std::size_t i = 0; i < N; ++i)
      ynew[i] = y[i] + hs * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    f(t_next, ynew, k7);
    State err{};
    bool finite = true;
    for (std::size_t i = 0; i < N; ++i) {
      err[i] = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      finite = finite && std::isfinite(ynew[i]) && std::isfinite(k7[i]);
    }
    const double en = finite ? norm_of(err, y, ynew) : std::numeric_limits<double>::infinity();
    if (en <= 1.0) {
      t = t_next;
      y = ynew;
      k1 = k7;
      ++stats.accepted;
      stats.t_end = t;
      if (!observe(t, y, k1)) {
        stats.stopped_early = true;
        return stats;
      }
      const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      h = std::min(h * fac, o.h_max);
    } else {
      ++stats.rejected;
      const double fac = std::isfinite(en) ? std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.9) : 0.25;
      h *= fac;
    }
    if (h < 1e-14 * std::max(1.0, std::abs(t))) {
      throw Error(o.failure, o.module, "step size underflow at t = " + std::to_string(t));
    }
  }
  return stats;
}

}  // namespace ruinprob::detail
