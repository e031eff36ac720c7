#pragma once

#include <cmath>
#include <limits>
#include <numbers>

#include "ruinprob/error.hpp"
#include "ruinprob/specfun/gamma.hpp"

namespace ruinprob::specfun {

/// Exponentially scaled pair e^-z I_nu(z) and e^z K_nu(z) for nu >= 0,
/// together with the order-(nu + 1) values needed for derivatives.
struct ScaledBesselIK {
  double i_scaled = 0.0;
  double k_scaled = 0.0;
  double i_next_scaled = 0.0;
  double k_next_scaled = 0.0;
};

namespace detail {

// gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu), gam2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2.
struct TemmeGammas {
  double gam1, gam2, gampl, gammi;
};

inline TemmeGammas temme_gammas(double mu) {
  TemmeGammas g{};
  g.gampl = reciprocal_gamma(1.0 + mu);
  g.gammi = reciprocal_gamma(1.0 - mu);
  g.gam2 = 0.5 * (g.gammi + g.gampl);
  if (std::abs(mu) < 1e-2) {
    // Taylor coefficients of 1/Gamma(1+x) = sum c_k x^k; gam1 keeps the odd part.
    constexpr double c1 = 0.5772156649015328606;
    constexpr double c3 = -0.0420026350340952355;
    constexpr double c5 = -0.0421977345555443367;
    constexpr double c7 = 0.0072189432466630995;
    const double m2 = mu * mu;
    g.gam1 = -(c1 + m2 * (c3 + m2 * (c5 + m2 * c7)));
  } else {
    g.gam1 = (g.gammi - g.gampl) / (2.0 * mu);
  }
  return g;
}

// Hankel expansion of the scaled pair for large z. Returns false when the
// series does not reach full precision.
inline bool bessel_ik_asymptotic(double nu, double z, double& i_scaled, double& k_scaled) {
  const double m = 4.0 * nu * nu;
  double term = 1.0;
  double sum_k = 1.0;
  double sum_i = 1.0;
  double prev = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (m - odd * odd) / (k * 8.0 * z);
    if (std::abs(term) > std::abs(prev) && k > 1) return false;
    sum_k += term;
    sum_i += (k % 2 == 0 ? term : -term);
    if (std::abs(term) < 0.5 * kEps) {
      k_scaled = std::sqrt(std::numbers::pi / (2.0 * z)) * sum_k;
      i_scaled = sum_i / std::sqrt(2.0 * std::numbers::pi * z);
      return true;
    }
    if (term == 0.0) break;
    prev = term;
  }
  if (term == 0.0) {
    k_scaled = std::sqrt(std::numbers::pi / (2.0 * z)) * sum_k;
    i_scaled = sum_i / std::sqrt(2.0 * std::numbers::pi * z);
    return true;
  }
  return false;
}

// Temme's series (x < 2) or Steed's continued fraction (x >= 2) for K_mu,
// CF1 plus downward recurrence for I'/I, Wronskian to recover I.
inline ScaledBesselIK bessel_ik_temme(double nu, double x) {
  constexpr double xmin = 2.0;
  constexpr int max_iter = 100000;
  const int nl = static_cast<int>(nu + 0.5);
  const double xmu = nu - nl;
  const double xmu2 = xmu * xmu;
  const double xi = 1.0 / x;
  const double xi2 = 2.0 * xi;

  double h = nu * xi;
  if (h < kTiny) h = kTiny;
  double b = xi2 * nu;
  double d = 0.0;
  double c = h;
  int i = 0;
  for (; i < max_iter; ++i) {
    b += xi2;
    d = 1.0 / (b + d);
    c = b + 1.0 / c;
    const double del = c * d;
    h = del * h;
    if (std::abs(del - 1.0) < kEps) break;
  }
  if (i >= max_iter) throw Error(ErrorKind::non_convergence, "specfun", "Bessel CF1 did not converge");

  double ril = kTiny;
  double ripl = h * ril;
  const double ril1 = ril;
  const double rip1 = ripl;
  double fact = nu * xi;
  for (int l = nl - 1; l >= 0; --l) {
    const double ritemp = fact * ril + ripl;
    fact -= xi;
    ripl = fact * ritemp + ril;
    ril = ritemp;
  }
  const double f = ripl / ril;

  double rkmu = 0.0;
  double rk1 = 0.0;
  if (x < xmin) {
    const double x2 = 0.5 * x;
    const double pimu = std::numbers::pi * xmu;
    const double fct = std::abs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu);
    d = -std::log(x2);
    double e = xmu * d;
    const double fact2 = std::abs(e) < kEps ? 1.0 : std::sinh(e) / e;
    const TemmeGammas g = temme_gammas(xmu);
    double ff = fct * (g.gam1 * std::cosh(e) + g.gam2 * fact2 * d);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / g.gampl;
    double q = 0.5 / (e * g.gammi);
    c = 1.0;
    d = x2 * x2;
    double sum1 = p;
    for (i = 1; i <= max_iter; ++i) {
      ff = (i * ff + p + q) / (i * static_cast<double>(i) - xmu2);
      c *= d / i;
      p /= (i - xmu);
      q /= (i + xmu);
      const double del = c * ff;
      sum += del;
      const double del1 = c * (p - i * ff);
      sum1 += del1;
      if (std::abs(del) < std::abs(sum) * kEps) break;
    }
    if (i > max_iter) throw Error(ErrorKind::non_convergence, "specfun", "Bessel K series did not converge");
    // Scale by e^x so both branches return e^x K.
    const double ex = std::exp(x);
    rkmu = sum * ex;
    rk1 = sum1 * xi2 * ex;
  } else {
    b = 2.0 * (1.0 + x);
    d = 1.0 / b;
    h = d;
    double delh = d;
    double q1 = 0.0;
    double q2 = 1.0;
    const double a1 = 0.25 - xmu2;
    double q = a1;
    c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    for (i = 1; i < max_iter; ++i) {
      a -= 2 * i;
      c = -a * c / (i + 1.0);
      const double qnew = (q1 - b * q2) / a;
      q1 = q2;
      q2 = qnew;
      q += c * qnew;
      b += 2.0;
      d = 1.0 / (b + a * d);
      delh = (b * d - 1.0) * delh;
      h += delh;
      const double dels = q * delh;
      s += dels;
      if (std::abs(dels / s) < kEps) break;
    }
    if (i >= max_iter) throw Error(ErrorKind::non_convergence, "specfun", "Bessel CF2 did not converge");
    h = a1 * h;
    rkmu = std::sqrt(std::numbers::pi / (2.0 * x)) / s;
    rk1 = rkmu * (xmu + x + 0.5 - h) * xi;
  }
  const double rkmup = xmu * xi * rkmu - rk1;
  // Wronskian I K' - I' K = -1/x; with K scaled by e^x, I comes out scaled by e^-x.
  const double rimu = xi / (f * rkmu - rkmup);
  ScaledBesselIK out;
  out.i_scaled = (rimu * ril1) / ril;
  const double rip = (rimu * rip1) / ril;
  for (int k = 1; k <= nl; ++k) {
    const double rktemp = (xmu + k) * xi2 * rk1 + rkmu;
    rkmu = rk1;
    rk1 = rktemp;
  }
  out.k_scaled = rkmu;
  out.k_next_scaled = rk1;
  // I_{nu+1} = I'_nu - (nu/x) I_nu.
  out.i_next_scaled = rip - nu * xi * out.i_scaled;
  return out;
}

}  // namespace detail

/// Scaled modified Bessel functions of non-negative real order.
inline ScaledBesselIK bessel_ik_scaled(double nu, double z) {
  if (!(z > 0.0)) throw Error(ErrorKind::domain, "specfun", "Bessel functions need z > 0");
  if (!(nu >= 0.0)) throw Error(ErrorKind::domain, "specfun", "bessel_ik_scaled needs nu >= 0");
  if (z > 30.0 && z > (nu + 1.0) * (nu + 1.0)) {
    ScaledBesselIK out;
    if (detail::bessel_ik_asymptotic(nu, z, out.i_scaled, out.k_scaled) &&
        detail::bessel_ik_asymptotic(nu + 1.0, z, out.i_next_scaled, out.k_next_scaled)) {
      return out;
    }
  }
  return detail::bessel_ik_temme(nu, z);
}

/// e^z K_nu(z); symmetric in nu.
inline double bessel_k_scaled(double nu, double z) { return bessel_ik_scaled(std::abs(nu), z).k_scaled; }

/// e^-z I_nu(z) for any real order, using I_{-v} = I_v + (2/pi) sin(v pi) K_v.
inline double bessel_i_scaled(double nu, double z) {
  const auto ik = bessel_ik_scaled(std::abs(nu), z);
  if (nu >= 0.0 || std::abs(nu) == std::floor(std::abs(nu))) return ik.i_scaled;
  const double v = -nu;
  return ik.i_scaled + (2.0 / std::numbers::pi) * std::sin(v * std::numbers::pi) * ik.k_scaled * std::exp(-2.0 * z);
}

inline double bessel_k(double nu, double z) { return bessel_k_scaled(nu, z) * std::exp(-z); }

inline double bessel_i(double nu, double z) { return bessel_i_scaled(nu, z) * std::exp(z); }

}  // namespace ruinprob::specfun
