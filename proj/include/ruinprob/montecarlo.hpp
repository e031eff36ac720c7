#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "ruinprob/detail/dopri5.hpp"
#include "ruinprob/error.hpp"
#include "ruinprob/model.hpp"

namespace ruinprob {

/// Philox4x32-10 block function (Salmon et al. counter-based generator).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(0xD2511F53u) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(0xCD9E8D57u) * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }
};

/// Uniforms for one path: key = seed, counter = (block index, 0, path index).
class PathStream {
 public:
  PathStream(std::uint64_t seed, std::uint64_t path)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        path_lo_(static_cast<std::uint32_t>(path)),
        path_hi_(static_cast<std::uint32_t>(path >> 32)) {}

  /// 53-bit uniform in the open interval (0, 1).
  double uniform() {
    if (used_ == 4) refill();
    const std::uint64_t a = buf_[used_] >> 5;
    const std::uint64_t b = buf_[used_ + 1] >> 6;
    used_ += 2;
    return (static_cast<double>((a << 26) | b) + 0.5) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

 private:
  void refill() {
    buf_ = Philox4x32::block({counter_++, 0u, path_lo_, path_hi_}, key_);
    used_ = 0;
  }

  Philox4x32::Key key_;
  std::uint32_t path_lo_;
  std::uint32_t path_hi_;
  std::uint32_t counter_ = 0;
  Philox4x32::Counter buf_{};
  int used_ = 4;
};

/// Surplus above which a path is treated as escaped for good.
inline constexpr double kEscapeSurplus = 1e15;

/// Flow of du/dt = p(u) by adaptive Dormand-Prince, relative tolerance 1e-10.
/// Returns +inf once the surplus passes kEscapeSurplus, or when the step
/// size collapses above 1e10 (a premium that explodes in finite time).
inline double flow_map_numeric(const PremiumFunction& p, double u, double t) {
  if (!(t >= 0.0)) throw Error(ErrorKind::invalid_argument, "montecarlo", "flow time must be non-negative");
  if (t == 0.0) return u;
  std::array<double, 1> y{u};
  detail::DopriOptions opt;
  opt.rtol = 1e-10;
  opt.atol = 1e-10 * std::max(1.0, std::abs(u));
  opt.failure = ErrorKind::flow_integration;
  opt.module = "montecarlo";
  bool escaped = false;
  double last = u;
  try {
    detail::dopri5<1>([&p](double, const std::array<double, 1>& s, std::array<double, 1>& d) { d[0] = p(s[0]); }, 0.0, t,
                      y, opt, [&](double, const std::array<double, 1>& s, const std::array<double, 1>&) {
                        last = s[0];
                        escaped = s[0] > kEscapeSurplus;
                        return !escaped;
                      });
  } catch (const Error&) {
    if (last > 1e10) return std::numeric_limits<double>::infinity();
    throw;
  }
  return escaped ? std::numeric_limits<double>::infinity() : y[0];
}

/// Surplus after time t without claims.
inline double flow_map(const PremiumFunction& p, double u, double t) {
  if (!(t >= 0.0)) throw Error(ErrorKind::invalid_argument, "montecarlo", "flow time must be non-negative");
  if (p.is_constant()) return u + p.c() * t;
  if (p.is_linear()) {
    const double eps = p.eps();
    return u + (u + p.c() / eps) * std::expm1(eps * t);
  }
  return flow_map_numeric(p, u, t);
}

struct SimulationResult {
  double u = 0.0;
  double psi_hat = 0.0;
  double half_width_95 = 0.0;
  std::uint64_t n_paths = 0;
  double horizon = 0.0;
  std::uint64_t ruined_paths = 0;
  /// Ruins in the second half of the horizon.
  std::uint64_t late_ruins = 0;
  /// Set when late ruins exceed 0.1% of ruined paths.
  bool truncation_flag = false;
  std::uint64_t seed = 0;
};

struct SimulationOptions {
  std::uint64_t n_paths = 100000;
  std::uint64_t seed = 1;
  /// 0 picks 100 / lambda and doubles it until the late-ruin flag clears.
  double horizon = 0.0;
  /// 0 uses every hardware thread. The result does not depend on it.
  unsigned workers = 0;
  int max_horizon_doublings = 6;
};

namespace detail {

struct PathOutcome {
  bool ruined = false;
  bool late = false;
};

inline PathOutcome simulate_path(const ModelSpec& m, double u, double horizon, PathStream rng) {
  const bool erlang_arrivals = m.model_case == ModelCase::erlang2_exp;
  const bool erlang_claims = m.model_case == ModelCase::exp_erlang2;
  double t = 0.0;
  double x = u;
  for (;;) {
    double tau = rng.exponential(m.lambda);
    if (erlang_arrivals) tau += rng.exponential(m.lambda);
    double claim = rng.exponential(m.mu);
    if (erlang_claims) claim += rng.exponential(m.mu);
    if (t + tau > horizon) return {};
    t += tau;
    x = flow_map(m.premium, x, tau);
    if (!(x < kEscapeSurplus)) return {};
    x -= claim;
    if (x < 0.0) return {true, t > 0.5 * horizon};
  }
}

inline unsigned resolve_workers(unsigned requested, std::uint64_t n_paths) {
  unsigned w = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::uint64_t>(w, std::max<std::uint64_t>(1, n_paths)));
}

inline void validate_simulation(const ModelSpec& m, double horizon, std::uint64_t n_paths) {
  m.validate();
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error(ErrorKind::invalid_argument, "montecarlo", "horizon must be positive and finite");
  }
  if (n_paths < 1) throw Error(ErrorKind::invalid_argument, "montecarlo", "need at least one path");
}

inline SimulationResult summarize(double u, std::uint64_t n, double horizon, std::uint64_t ruined, std::uint64_t late,
                                  std::uint64_t seed) {
  SimulationResult r;
  r.u = u;
  r.n_paths = n;
  r.horizon = horizon;
  r.ruined_paths = ruined;
  r.late_ruins = late;
  r.seed = seed;
  r.psi_hat = static_cast<double>(ruined) / static_cast<double>(n);
  r.half_width_95 = 1.96 * std::sqrt(r.psi_hat * (1.0 - r.psi_hat) / static_cast<double>(n));
  r.truncation_flag = ruined > 0 && static_cast<double>(late) > 1e-3 * static_cast<double>(ruined);
  return r;
}

}  // namespace detail

/// Ruin frequencies on a reserve grid with common random numbers: path i
/// uses the same substream at every reserve, so indicators are coupled.
inline std::vector<SimulationResult> simulate_ruin_grid(const ModelSpec& m, const std::vector<double>& grid,
                                                        double horizon, std::uint64_t n_paths, std::uint64_t seed,
                                                        unsigned workers = 0) {
  detail::validate_simulation(m, horizon, n_paths);
  for (double u : grid) {
    if (!(u >= 0.0) || !std::isfinite(u)) throw Error(ErrorKind::invalid_argument, "montecarlo", "reserves must be >= 0");
  }
  const std::size_t nu = grid.size();
  const unsigned nw = detail::resolve_workers(workers, n_paths);
  std::vector<std::vector<std::uint64_t>> ruined(nw, std::vector<std::uint64_t>(nu, 0));
  std::vector<std::vector<std::uint64_t>> late(nw, std::vector<std::uint64_t>(nu, 0));
  std::vector<std::exception_ptr> failures(nw);
  auto work = [&](unsigned w) {
    try {
      const std::uint64_t begin = n_paths * w / nw;
      const std::uint64_t end = n_paths * (w + 1) / nw;
      for (std::uint64_t path = begin; path < end; ++path) {
        const PathStream stream(seed, path);
        for (std::size_t j = 0; j < nu; ++j) {
          const auto out = detail::simulate_path(m, grid[j], horizon, stream);
          ruined[w][j] += out.ruined;
          late[w][j] += out.late;
        }
      }
    } catch (...) {
      failures[w] = std::current_exception();
    }
  };
  if (nw == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < nw; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  std::vector<SimulationResult> out;
  out.reserve(nu);
  for (std::size_t j = 0; j < nu; ++j) {
    std::uint64_t r = 0, l = 0;
    for (unsigned w = 0; w < nw; ++w) {
      r += ruined[w][j];
      l += late[w][j];
    }
    out.push_back(detail::summarize(grid[j], n_paths, horizon, r, l, seed));
  }
  return out;
}

inline SimulationResult simulate_ruin(const ModelSpec& m, double u, double horizon, std::uint64_t n_paths,
                                      std::uint64_t seed, unsigned workers = 0) {
  return simulate_ruin_grid(m, {u}, horizon, n_paths, seed, workers).front();
}

inline double default_horizon(const ModelSpec& m) { return 50.0 * std::max(1.0 / m.lambda, 2.0 / m.lambda); }

/// Grid simulation with the horizon doubled until no reserve raises the
/// late-ruin flag (or the doubling budget runs out, leaving it raised).
inline std::vector<SimulationResult> simulate_ruin_auto(const ModelSpec& m, const std::vector<double>& grid,
                                                        const SimulationOptions& opt) {
  double horizon = opt.horizon > 0.0 ? opt.horizon : default_horizon(m);
  for (int k = 0;; ++k) {
    auto res = simulate_ruin_grid(m, grid, horizon, opt.n_paths, opt.seed, opt.workers);
    const bool flagged = std::any_of(res.begin(), res.end(), [](const SimulationResult& r) { return r.truncation_flag; });
    if (!flagged || opt.horizon > 0.0 || k >= opt.max_horizon_doublings) return res;
    horizon *= 2.0;
  }
}

}  // namespace ruinprob
