#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <vector>

#include "ruinprob/error.hpp"
#include "ruinprob/specfun/quadrature.hpp"

namespace ruinprob::specfun {

/// F(y) = integral of g over [0, y] for y >= 0. Values at the nodes
/// 0, step, 2 step, ... are cached as they are first needed; a query
/// integrates only from the nearest node below. Safe to share between threads.
class CumulativeIntegral {
 public:
  CumulativeIntegral(std::function<double(double)> g, double step, double abs_tol)
      : g_(std::move(g)), step_(step), tol_(abs_tol) {
    if (!(step > 0.0) || !(abs_tol > 0.0)) {
      throw Error(ErrorKind::invalid_argument, "specfun", "cumulative integral needs step > 0 and tol > 0");
    }
    nodes_.push_back(0.0);
  }

  double operator()(double y) const {
    if (!(y >= 0.0)) throw Error(ErrorKind::domain, "specfun", "cumulative integral needs y >= 0");
    const auto k = static_cast<std::size_t>(std::floor(y / step_));
    double base = 0.0;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      while (nodes_.size() <= k) {
        const double a = step_ * static_cast<double>(nodes_.size() - 1);
        nodes_.push_back(nodes_.back() + segment(a, a + step_));
      }
      base = nodes_[k];
    }
    const double a = step_ * static_cast<double>(k);
    return base + segment(a, y);
  }

  double step() const noexcept { return step_; }

 private:
  double segment(double a, double b) const {
    if (b <= a) return 0.0;
    QuadratureOptions opt;
    opt.abs_tol = tol_ * (b - a) / step_;
    opt.rel_tol = 1e-14;
    return integrate(g_, a, b, opt).value;
  }

  std::function<double(double)> g_;
  double step_;
  double tol_;
  mutable std::mutex mutex_;
  mutable std::vector<double> nodes_;
};

}  // namespace ruinprob::specfun
