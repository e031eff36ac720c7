#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ruinprob/error.hpp"
#include "ruinprob/model.hpp"

namespace ruinprob {

enum class Method { exact, bvp, mc, asymptotic };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::exact: return "exact";
    case Method::bvp: return "bvp";
    case Method::mc: return "mc";
    case Method::asymptotic: return "asymptotic";
  }
  return "unknown";
}

struct RuinPoint {
  double u = 0.0;
  double psi = 0.0;
  /// log psi, kept separately because deep tails underflow psi itself.
  double log_psi = 0.0;
  double err = 0.0;
};

/// Amplitudes fixed at u = 0, with the residual of the conditions used.
struct Calibration {
  std::vector<double> gamma;
  double residual = 0.0;
  bool from_monte_carlo = false;
};

struct RuinCurve {
  std::vector<RuinPoint> points;
  Method method = Method::exact;
  ModelSpec model;
  Calibration calibration;
  std::vector<std::string> warnings;
};

enum class GridSpacing { uniform, geometric };

inline GridSpacing parse_spacing(std::string_view s) {
  if (s == "uniform") return GridSpacing::uniform;
  if (s == "geometric") return GridSpacing::geometric;
  throw Error(ErrorKind::invalid_argument, "cli", "spacing must be 'uniform' or 'geometric'");
}

/// `points` reserves from start to stop inclusive. Geometric spacing is
/// geometric in 1 + u so that a grid may start at zero.
inline std::vector<double> make_grid(double start, double stop, std::size_t points,
                                     GridSpacing spacing = GridSpacing::uniform) {
  if (points == 0) throw Error(ErrorKind::invalid_argument, "cli", "reserve grid is empty");
  if (!(start >= 0.0) || !(stop >= start) || !std::isfinite(stop)) {
    throw Error(ErrorKind::invalid_argument, "cli", "reserve grid needs 0 <= start <= stop");
  }
  std::vector<double> g(points);
  if (points == 1) {
    g[0] = start;
    return g;
  }
  const double n = static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / n;
    if (spacing == GridSpacing::uniform) {
      g[i] = start + (stop - start) * t;
    } else {
      g[i] = (1.0 + start) * std::pow((1.0 + stop) / (1.0 + start), t) - 1.0;
    }
  }
  g.back() = stop;
  return g;
}

inline void require_sorted_reserves(const std::vector<double>& grid, std::string_view module) {
  if (grid.empty()) throw Error(ErrorKind::invalid_argument, module, "reserve grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0) || !std::isfinite(grid[i])) {
      throw Error(ErrorKind::invalid_argument, module, "reserves must be finite and non-negative");
    }
    if (i > 0 && grid[i] < grid[i - 1]) {
      throw Error(ErrorKind::invalid_argument, module, "reserve grid must be non-decreasing");
    }
  }
}

}  // namespace ruinprob
