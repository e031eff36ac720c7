#pragma once

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ruinprob/ruinprob.hpp"

namespace ruinprob::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

struct RunConfig {
  std::string command = "compute";
  std::string model_case = "exp-exp";
  double lambda = 1.0;
  double mu = 2.0;
  std::string premium = "const:1";
  /// start:stop:points, or a single reserve.
  std::string u = "0:10:11";
  std::string spacing = "uniform";
  /// auto | exact | bvp | mc
  std::string method = "auto";
  double tol = 1e-8;
  double rel_tol = 1e-11;
  double u_max = 0.0;
  std::uint64_t n = 100000;
  std::uint64_t seed = 1;
  double horizon = 0.0;
  unsigned workers = 0;
  std::string output;

  bool operator==(const RunConfig&) const = default;
};

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

inline std::vector<double> parse_grid(const std::string& text, const std::string& spacing) {
  const auto sp = parse_spacing(spacing);
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw Error(ErrorKind::invalid_argument, "cli", "bad number '" + s + "' in --u");
    return v;
  };
  if (parts.size() == 1 && !parts[0].empty()) return {number(parts[0])};
  if (parts.size() != 3) throw Error(ErrorKind::invalid_argument, "cli", "--u expects start:stop:points, got '" + text + "'");
  const double points = number(parts[2]);
  if (!(points >= 0.0) || points != std::floor(points)) {
    throw Error(ErrorKind::invalid_argument, "cli", "point count in --u must be a non-negative integer");
  }
  return make_grid(number(parts[0]), number(parts[1]), static_cast<std::size_t>(points), sp);
}

inline ModelSpec model_of(const RunConfig& cfg) {
  return ModelSpec(parse_model_case(cfg.model_case), cfg.lambda, cfg.mu, parse_premium(cfg.premium));
}

inline void write_provenance(std::ostream& out, const RunConfig& cfg, const std::vector<std::string>& warnings = {}) {
  out << "# ruinprob " << RUINPROB_VERSION << "\n";
  out << "# command=" << cfg.command << " case=" << cfg.model_case << " lambda=" << fmt(cfg.lambda)
      << " mu=" << fmt(cfg.mu) << " premium=" << cfg.premium << " method=" << cfg.method << "\n";
  out << "# seed=" << cfg.seed << " n=" << cfg.n << " tol=" << fmt(cfg.tol) << "\n";
  for (const auto& w : warnings) out << "# warning: " << w << "\n";
}

inline SimulationOptions simulation_options(const RunConfig& cfg) {
  SimulationOptions opt;
  opt.n_paths = cfg.n;
  opt.seed = cfg.seed;
  opt.horizon = cfg.horizon;
  opt.workers = cfg.workers;
  return opt;
}

inline RuinCurve exact_curve(const ModelSpec& m, const RunConfig& cfg, const std::vector<double>& grid, bool required) {
  const auto& p = m.premium;
  ExactOptions opt;
  opt.rel_tol = cfg.rel_tol;
  opt.workers = cfg.workers;
  if (p.is_constant()) return ruin_constant_premium(m.model_case, p.c(), m.lambda, m.mu).curve(grid);
  switch (m.model_case) {
    case ModelCase::exp_exp:
      if (p.is_linear()) return ruin_exp_exp_linear(p.c(), p.eps(), m.lambda, m.mu, grid);
      return ruin_exp_exp_general(p, m.lambda, m.mu, grid, opt);
    case ModelCase::erlang2_exp:
      if (p.is_linear()) return ruin_erlang2exp_linear(p.c(), p.eps(), m.lambda, m.mu, grid, opt);
      break;
    case ModelCase::exp_erlang2:
      if (p.is_linear()) return ruin_experlang2_linear(p.c(), p.eps(), m.lambda, m.mu, grid, opt);
      break;
  }
  if (required) {
    throw Error(ErrorKind::unsupported_case, "cli",
                "no closed form for " + std::string(to_string(m.model_case)) + " with premium " + p.spec());
  }
  BvpConfig bc;
  bc.tol = cfg.tol;
  bc.u_max = cfg.u_max;
  return solve_ruin(m, bc, grid);
}

inline RuinCurve compute_curve(const RunConfig& cfg) {
  const auto m = model_of(cfg);
  const auto grid = parse_grid(cfg.u, cfg.spacing);
  if (cfg.method == "auto") return exact_curve(m, cfg, grid, false);
  if (cfg.method == "exact") return exact_curve(m, cfg, grid, true);
  if (cfg.method == "bvp") {
    BvpConfig bc;
    bc.tol = cfg.tol;
    bc.u_max = cfg.u_max;
    return solve_ruin(m, bc, grid);
  }
  if (cfg.method == "mc") {
    RuinCurve c;
    c.method = Method::mc;
    c.model = m;
    for (const auto& r : simulate_ruin_auto(m, grid, simulation_options(cfg))) {
      c.points.push_back({r.u, r.psi_hat, std::log(r.psi_hat), r.half_width_95});
      if (r.truncation_flag) c.warnings.push_back("late ruins near the horizon at u = " + fmt(r.u));
    }
    return c;
  }
  throw Error(ErrorKind::invalid_argument, "cli", "method must be auto, exact, bvp or mc");
}

inline void cmd_compute(const RunConfig& cfg, std::ostream& out) {
  const auto c = compute_curve(cfg);
  write_provenance(out, cfg, c.warnings);
  out << "u,psi,err,method\n";
  for (const auto& p : c.points) out << fmt(p.u) << "," << fmt(p.psi) << "," << fmt(p.err) << "," << to_string(c.method) << "\n";
}

inline void cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const auto m = model_of(cfg);
  const auto res = simulate_ruin_auto(m, parse_grid(cfg.u, cfg.spacing), simulation_options(cfg));
  write_provenance(out, cfg);
  out << "u,psi_hat,ci95,n,horizon,truncated\n";
  for (const auto& r : res) {
    out << fmt(r.u) << "," << fmt(r.psi_hat) << "," << fmt(r.half_width_95) << "," << r.n_paths << ","
        << fmt(r.horizon) << "," << (r.truncation_flag ? 1 : 0) << "\n";
  }
}

inline void cmd_roots(const RunConfig& cfg, std::ostream& out) {
  const auto m = model_of(cfg);
  const auto verdict = safe_load_check(m);
  write_provenance(out, cfg);
  out << "quantity,value\n";
  out << "case," << to_string(m.model_case) << "\n";
  out << "premium_limit," << fmt(verdict.c) << "\n";
  if (std::isfinite(verdict.c)) {
    const double c = verdict.c;
    switch (m.model_case) {
      case ModelCase::exp_exp: out << "sigma," << fmt(m.lambda / c - m.mu) << "\n"; break;
      case ModelCase::erlang2_exp: {
        const auto r = hat_roots(m.lambda, m.mu, c);
        out << "rho_hat_1," << fmt(r.rho1) << "\nrho_hat_2," << fmt(r.rho2) << "\n";
        break;
      }
      case ModelCase::exp_erlang2: {
        const auto r = tilde_roots(m.lambda, m.mu, c);
        out << "rho_tilde_1," << fmt(r.rho1) << "\nrho_tilde_2," << fmt(r.rho2) << "\n";
        break;
      }
    }
  }
  out << "safe_load," << (verdict.satisfied ? "satisfied" : "violated") << "\n";
  out << "margin," << fmt(verdict.margin) << "\n";
  out << "regime," << to_string(verdict.regime) << "\n";
}

inline void cmd_compare(const RunConfig& cfg, std::ostream& out) {
  const auto m = model_of(cfg);
  if (!m.premium.is_linear()) {
    throw Error(ErrorKind::invalid_argument, "cli", "compare needs a linear premium linear:<c>,<eps>");
  }
  const auto t = compare_linear_vs_constant(m.model_case, m.premium.c(), m.premium.eps(), m.lambda, m.mu,
                                            parse_grid(cfg.u, cfg.spacing));
  write_provenance(out, cfg, t.warnings);
  out << "u,psi_linear,psi_const,ratio\n";
  for (const auto& r : t.rows) {
    out << fmt(r.u) << "," << fmt(r.psi_linear) << "," << fmt(r.psi_constant) << "," << fmt(r.ratio) << "\n";
  }
}

/// Deterministic solution against simulation. Returns the number of
/// reserves where they disagree.
inline std::size_t cmd_check(const RunConfig& cfg, std::ostream& out) {
  auto det = cfg;
  if (det.method == "auto" || det.method == "mc") det.method = "auto";
  const auto c = compute_curve(det);
  const auto sim = simulate_ruin_auto(model_of(cfg), parse_grid(cfg.u, cfg.spacing), simulation_options(cfg));
  write_provenance(out, cfg, c.warnings);
  out << "u,psi,err,method,psi_hat,ci95,agree\n";
  std::size_t bad = 0;
  for (std::size_t i = 0; i < sim.size(); ++i) {
    const auto& p = c.points[i];
    const auto& r = sim[i];
    // 3 standard errors, using the deterministic psi for the variance.
    const double se = std::sqrt(p.psi * (1.0 - p.psi) / static_cast<double>(r.n_paths));
    const bool ok = std::abs(p.psi - r.psi_hat) <= 3.0 * se + p.err + 1.0 / static_cast<double>(r.n_paths);
    bad += !ok;
    out << fmt(p.u) << "," << fmt(p.psi) << "," << fmt(p.err) << "," << to_string(c.method) << "," << fmt(r.psi_hat)
        << "," << fmt(r.half_width_95) << "," << (ok ? 1 : 0) << "\n";
  }
  return bad;
}

/// Runs one command; errors become messages on `err` and an exit code.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.command == "compute") {
      cmd_compute(cfg, out);
    } else if (cfg.command == "simulate") {
      cmd_simulate(cfg, out);
    } else if (cfg.command == "roots") {
      cmd_roots(cfg, out);
    } else if (cfg.command == "compare") {
      cmd_compare(cfg, out);
    } else if (cfg.command == "check") {
      if (const auto bad = cmd_check(cfg, out)) {
        err << "check: " << bad << " reserve(s) where the solution and the simulation disagree\n";
        return kExitNumerical;
      }
    } else {
      err << "unknown command '" << cfg.command << "'\n";
      return kExitUsage;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::invalid_argument ? kExitUsage : kExitNumerical;
  }
  return kExitOk;
}

inline void add_options(CLI::App& app, RunConfig& cfg) {
  app.add_option("command", cfg.command, "compute | simulate | roots | compare | check")
      ->check(CLI::IsMember({"compute", "simulate", "roots", "compare", "check"}));
  app.add_option("--case", cfg.model_case, "exp-exp | erlang2-exp | exp-erlang2")->capture_default_str();
  app.add_option("--lambda", cfg.lambda, "arrival rate")->capture_default_str();
  app.add_option("--mu", cfg.mu, "claim rate")->capture_default_str();
  // Config files split unquoted values on commas; join them back.
  app.add_option("--premium", cfg.premium, "const:c | linear:c,eps | poly:c,e1[,e2...] | ratl:c,a")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::Join)
      ->capture_default_str();
  app.add_option("--u", cfg.u, "reserve grid start:stop:points, or one reserve")->capture_default_str();
  app.add_option("--spacing", cfg.spacing, "uniform | geometric")->capture_default_str();
  app.add_option("--method", cfg.method, "auto | exact | bvp | mc")->capture_default_str();
  app.add_option("--tol", cfg.tol, "absolute tolerance of the boundary value solver")->capture_default_str();
  app.add_option("--rel-tol", cfg.rel_tol, "relative tolerance of closed-form quadratures")->capture_default_str();
  app.add_option("--u-max", cfg.u_max, "truncation reserve of the solver, 0 for automatic")->capture_default_str();
  app.add_option("--n", cfg.n, "Monte Carlo paths")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Monte Carlo seed")->capture_default_str();
  app.add_option("--horizon", cfg.horizon, "simulation horizon, 0 for automatic")->capture_default_str();
  app.add_option("--workers", cfg.workers, "threads, 0 for all")->capture_default_str();
  app.add_option("-o,--output", cfg.output, "write CSV here instead of stdout");
  app.set_config("--config", "", "read key = value settings; flags override them");
}

/// Settings as a config file that parses back to the same RunConfig.
inline std::string dump_config(const RunConfig& cfg) {
  auto exact = [](double v) { return detail::format_number(v); };
  std::ostringstream s;
  s << "# ruinprob " << RUINPROB_VERSION << "\n";
  s << "command = \"" << cfg.command << "\"\n";
  s << "case = \"" << cfg.model_case << "\"\n";
  s << "lambda = " << exact(cfg.lambda) << "\n";
  s << "mu = " << exact(cfg.mu) << "\n";
  s << "premium = \"" << cfg.premium << "\"\n";
  s << "u = \"" << cfg.u << "\"\n";
  s << "spacing = \"" << cfg.spacing << "\"\n";
  s << "method = \"" << cfg.method << "\"\n";
  s << "tol = " << exact(cfg.tol) << "\n";
  s << "rel-tol = " << exact(cfg.rel_tol) << "\n";
  s << "u-max = " << exact(cfg.u_max) << "\n";
  s << "n = " << cfg.n << "\n";
  s << "seed = " << cfg.seed << "\n";
  s << "horizon = " << exact(cfg.horizon) << "\n";
  s << "workers = " << cfg.workers << "\n";
  if (!cfg.output.empty()) s << "output = \"" << cfg.output << "\"\n";
  return s.str();
}

/// Whole program: parse, then run or dump. Returns the exit code.
inline int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ruin probabilities for renewal risk models with surplus-dependent premiums"};
  RunConfig cfg;
  add_options(app, cfg);
  bool dump = false;
  app.add_flag("--dump-config", dump, "print the effective settings as a config file and exit");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }
  if (dump) {
    out << dump_config(cfg);
    return kExitOk;
  }
  auto usage_on_error = [&](int code) {
    if (code == kExitUsage) err << app.help();
    return code;
  };
  if (cfg.output.empty()) return usage_on_error(run(cfg, out, err));
  std::ostringstream buf;
  const int code = run(cfg, buf, err);
  if (code == kExitOk || code == kExitNumerical) {
    std::ofstream f(cfg.output, std::ios::binary);
    if (!f) {
      err << "error: cannot write " << cfg.output << "\n";
      return kExitUsage;
    }
    f << buf.str();
  }
  return usage_on_error(code);
}

}  // namespace ruinprob::cli
