#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ruinprob/error.hpp"

namespace ruinprob {

enum class PremiumKind { constant, linear, polynomial, bounded_p1, custom_p1, custom_p2 };

enum class PremiumClass { p1, p2, constant };

inline std::string_view to_string(PremiumClass c) {
  switch (c) {
    case PremiumClass::p1: return "P1";
    case PremiumClass::p2: return "P2";
    case PremiumClass::constant: return "constant";
  }
  return "unknown";
}

namespace detail {

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Premium rate p(u) as a function of the current reserve.
///
/// Built-in shapes have closed-form derivatives up to third order. Custom
/// premiums must provide p, p' and p''; p''' is then unavailable and callers
/// fall back to finite differences where they need it.
class PremiumFunction {
 public:
  using Fn = std::function<double(double)>;

  static PremiumFunction constant(double c) {
    require_positive(c, "constant premium c");
    return PremiumFunction(PremiumKind::constant, c, {});
  }

  static PremiumFunction linear(double c, double eps) {
    require_positive(c, "linear premium c");
    require_positive(eps, "linear premium eps");
    return PremiumFunction(PremiumKind::linear, c, {eps});
  }

  /// c + e1 u + e2 u^2 + ... with every coefficient positive.
  static PremiumFunction polynomial(double c, std::vector<double> eps) {
    require_positive(c, "polynomial premium c");
    if (eps.empty()) throw Error(ErrorKind::invalid_argument, "model", "polynomial premium needs at least one coefficient");
    for (double e : eps) require_positive(e, "polynomial premium coefficient");
    return PremiumFunction(PremiumKind::polynomial, c, std::move(eps));
  }

  /// c + a / (1 + u): bounded, tends to c with p' = O(1/u^2).
  static PremiumFunction rational(double c, double a) {
    require_positive(c, "rational premium c");
    if (!std::isfinite(a) || !(c + a > 0.0)) {
      throw Error(ErrorKind::invalid_argument, "model", "rational premium needs c + a > 0");
    }
    return PremiumFunction(PremiumKind::bounded_p1, c, {a});
  }

  /// User-supplied premium. `limit` is p(inf) for P1 premiums; NaN lets the
  /// classifier estimate it.
  static PremiumFunction custom(PremiumClass declared, Fn p, Fn dp, Fn d2p,
                                double limit = std::numeric_limits<double>::quiet_NaN()) {
    if (declared == PremiumClass::constant) {
      throw Error(ErrorKind::invalid_argument, "model", "use PremiumFunction::constant for constant premiums");
    }
    if (!p || !dp || !d2p) {
      throw Error(ErrorKind::invalid_argument, "model", "custom premiums need p, p' and p''");
    }
    PremiumFunction f(declared == PremiumClass::p1 ? PremiumKind::custom_p1 : PremiumKind::custom_p2, 0.0, {});
    f.custom_ = std::make_shared<Custom>(Custom{std::move(p), std::move(dp), std::move(d2p), limit});
    for (double u : {0.0, 1e-3, 1.0, 10.0, 1e2, 1e3, 1e4, 1e5, 1e6}) {
      const double v = f.value(u);
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw Error(ErrorKind::invalid_argument, "model", "custom premium must be positive and finite on u >= 0");
      }
    }
    f.c_ = f.value(0.0);
    return f;
  }

  PremiumKind kind() const noexcept { return kind_; }
  bool is_custom() const noexcept { return custom_ != nullptr; }
  bool is_constant() const noexcept { return kind_ == PremiumKind::constant; }
  bool is_linear() const noexcept { return kind_ == PremiumKind::linear; }

  /// p(0) for every kind; the constant term c for built-ins.
  double c() const noexcept { return c_; }
  /// eps for linear, e1..el for polynomial, a for rational.
  const std::vector<double>& coefficients() const noexcept { return coef_; }
  double eps() const { return coef_.at(0); }

  double operator()(double u) const { return value(u); }

  double value(double u) const {
    switch (kind_) {
      case PremiumKind::constant: return c_;
      case PremiumKind::linear: return c_ + coef_[0] * u;
      case PremiumKind::polynomial: return c_ + u * horner(u, 0);
      case PremiumKind::bounded_p1: return c_ + coef_[0] / (1.0 + u);
      default: return custom_->p(u);
    }
  }

  /// k-th derivative, 1 <= k <= 3.
  double derivative(int k, double u) const {
    if (k < 1 || k > 3) throw Error(ErrorKind::invalid_argument, "model", "derivative order must be 1, 2 or 3");
    switch (kind_) {
      case PremiumKind::constant: return 0.0;
      case PremiumKind::linear: return k == 1 ? coef_[0] : 0.0;
      case PremiumKind::polynomial: return horner(u, k);
      case PremiumKind::bounded_p1: {
        const double x = 1.0 + u;
        const double a = coef_[0];
        if (k == 1) return -a / (x * x);
        if (k == 2) return 2.0 * a / (x * x * x);
        return -6.0 * a / (x * x * x * x);
      }
      default:
        if (k == 1) return custom_->dp(u);
        if (k == 2) return custom_->d2p(u);
        throw Error(ErrorKind::unsupported_case, "model", "custom premiums provide no third derivative");
    }
  }

  double d1(double u) const { return derivative(1, u); }
  double d2(double u) const { return derivative(2, u); }
  double d3(double u) const { return derivative(3, u); }

  /// True when derivatives of every order up to three are closed-form.
  bool has_analytic_derivatives() const noexcept { return custom_ == nullptr; }

  /// p(inf): finite for constant and P1 premiums, +inf for P2.
  double limit_at_infinity() const {
    switch (kind_) {
      case PremiumKind::constant:
      case PremiumKind::bounded_p1: return c_;
      case PremiumKind::linear:
      case PremiumKind::polynomial:
      case PremiumKind::custom_p2: return std::numeric_limits<double>::infinity();
      case PremiumKind::custom_p1:
        return std::isnan(custom_->limit) ? custom_->p(1e12) : custom_->limit;
    }
    return std::numeric_limits<double>::quiet_NaN();
  }

  /// The declared class, before any probing.
  PremiumClass declared_class() const noexcept {
    switch (kind_) {
      case PremiumKind::constant: return PremiumClass::constant;
      case PremiumKind::bounded_p1:
      case PremiumKind::custom_p1: return PremiumClass::p1;
      default: return PremiumClass::p2;
    }
  }

  /// Text in the `const:`, `linear:`, `poly:`, `ratl:` grammar; "custom" otherwise.
  std::string spec() const {
    std::string s;
    switch (kind_) {
      case PremiumKind::constant: return "const:" + detail::format_number(c_);
      case PremiumKind::linear: s = "linear:"; break;
      case PremiumKind::polynomial: s = "poly:"; break;
      case PremiumKind::bounded_p1: s = "ratl:"; break;
      default: return "custom";
    }
    s += detail::format_number(c_);
    for (double e : coef_) s += "," + detail::format_number(e);
    return s;
  }

 private:
  struct Custom {
    Fn p, dp, d2p;
    double limit;
  };

  PremiumFunction(PremiumKind kind, double c, std::vector<double> coef)
      : kind_(kind), c_(c), coef_(std::move(coef)) {}

  static void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::invalid_argument, "model", std::string(what) + " must be positive and finite");
    }
  }

  // k = 0: sum_i e_i u^(i-1). k >= 1: k-th derivative of sum_i e_i u^i.
  double horner(double u, int k) const {
    const int l = static_cast<int>(coef_.size());
    const int shift = k == 0 ? 1 : k;
    double out = 0.0;
    for (int i = l; i >= shift; --i) {
      double f = 1.0;
      for (int j = 0; j < k; ++j) f *= i - j;
      out = out * u + f * coef_[i - 1];
    }
    return out;
  }

  PremiumKind kind_;
  double c_;
  std::vector<double> coef_;
  std::shared_ptr<const Custom> custom_;
};

/// Parses `const:<c>`, `linear:<c>,<eps>`, `poly:<c>,<e1>[,<e2>...]`, `ratl:<c>,<a>`.
inline PremiumFunction parse_premium(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorKind::invalid_argument, "model", "premium spec '" + std::string(text) + "' lacks a ':'");
  }
  const std::string head(text.substr(0, colon));
  std::vector<double> nums;
  std::stringstream ss{std::string(text.substr(colon + 1))};
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used == 0 || used != item.size()) {
      throw Error(ErrorKind::invalid_argument, "model", "bad number '" + item + "' in premium spec");
    }
    nums.push_back(v);
  }
  auto arity = [&](std::size_t n) {
    if (nums.size() != n) {
      throw Error(ErrorKind::invalid_argument, "model",
                  "premium '" + head + "' takes " + std::to_string(n) + " parameter(s)");
    }
  };
  if (head == "const") {
    arity(1);
    return PremiumFunction::constant(nums[0]);
  }
  if (head == "linear") {
    arity(2);
    return PremiumFunction::linear(nums[0], nums[1]);
  }
  if (head == "poly") {
    if (nums.size() < 2) throw Error(ErrorKind::invalid_argument, "model", "poly premium needs c and at least e1");
    return PremiumFunction::polynomial(nums[0], std::vector<double>(nums.begin() + 1, nums.end()));
  }
  if (head == "ratl") {
    arity(2);
    return PremiumFunction::rational(nums[0], nums[1]);
  }
  throw Error(ErrorKind::invalid_argument, "model", "unknown premium kind '" + head + "'");
}

/// Interarrival / claim distribution pair.
enum class ModelCase {
  exp_exp,      // Exp(lambda) interarrivals, Exp(mu) claims
  erlang2_exp,  // Erlang(2, lambda) interarrivals, Exp(mu) claims
  exp_erlang2,  // Exp(lambda) interarrivals, Erlang(2, mu) claims
};

inline std::string_view to_string(ModelCase c) {
  switch (c) {
    case ModelCase::exp_exp: return "exp-exp";
    case ModelCase::erlang2_exp: return "erlang2-exp";
    case ModelCase::exp_erlang2: return "exp-erlang2";
  }
  return "unknown";
}

inline ModelCase parse_model_case(std::string_view s) {
  if (s == "exp-exp") return ModelCase::exp_exp;
  if (s == "erlang2-exp") return ModelCase::erlang2_exp;
  if (s == "exp-erlang2") return ModelCase::exp_erlang2;
  throw Error(ErrorKind::invalid_argument, "model",
              "unknown case '" + std::string(s) + "' (expected exp-exp, erlang2-exp or exp-erlang2)");
}

struct ModelSpec {
  ModelCase model_case = ModelCase::exp_exp;
  double lambda = 1.0;
  double mu = 1.0;
  PremiumFunction premium = PremiumFunction::constant(1.0);

  ModelSpec() = default;
  ModelSpec(ModelCase k, double lam, double m, PremiumFunction p)
      : model_case(k), lambda(lam), mu(m), premium(std::move(p)) {
    validate();
  }

  void validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw Error(ErrorKind::invalid_argument, "model", "lambda must be positive and finite");
    }
    if (!(mu > 0.0) || !std::isfinite(mu)) {
      throw Error(ErrorKind::invalid_argument, "model", "mu must be positive and finite");
    }
  }

  double mean_interarrival() const { return model_case == ModelCase::erlang2_exp ? 2.0 / lambda : 1.0 / lambda; }
  double mean_claim() const { return model_case == ModelCase::exp_erlang2 ? 2.0 / mu : 1.0 / mu; }
};

namespace detail {

inline constexpr double kProbeGrid[] = {1e0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6};

struct ProbeResult {
  bool p1_candidate;
  bool p2_candidate;
};

inline ProbeResult probe_premium(const PremiumFunction& p) {
  const bool p2 = p(1e6) / p(1e3) > 10.0;
  double early = 0.0;
  double late = 0.0;
  for (double u : kProbeGrid) {
    const double g = u * u * std::abs(p.d1(u));
    if (!std::isfinite(g)) return {false, p2};
    (u <= 1e3 ? early : late) = std::max(u <= 1e3 ? early : late, g);
  }
  return {late <= 10.0 * early + 1e-9, p2};
}

}  // namespace detail

/// Premium class, with the probe-grid check applied to every premium.
inline PremiumClass classify_premium(const PremiumFunction& p) {
  const auto probe = detail::probe_premium(p);
  const PremiumClass declared = p.declared_class();
  bool consistent = true;
  switch (declared) {
    case PremiumClass::constant: consistent = probe.p1_candidate && !probe.p2_candidate; break;
    case PremiumClass::p1: consistent = probe.p1_candidate && !probe.p2_candidate; break;
    case PremiumClass::p2: consistent = probe.p2_candidate && !probe.p1_candidate; break;
  }
  if (!consistent) {
    throw Error(ErrorKind::classification, "model",
                "premium declared " + std::string(to_string(declared)) + " but probes on u = 1..1e6 indicate " +
                    (probe.p2_candidate ? "polynomial growth" : probe.p1_candidate ? "a bounded premium" : "neither class"));
  }
  return declared;
}

enum class SafeLoadRegime {
  net_profit,         // exp-exp or erlang2-exp with positive drift
  unstable,           // erlang2-exp with 2c/lambda < 1/mu: both roots positive
  one_negative_root,  // exp-erlang2 with lambda > mu c / 2
  two_negative_roots, // exp-erlang2 with lambda < mu c / 2
  unbounded_premium,  // P2: premium outgrows any claim intensity
};

inline std::string_view to_string(SafeLoadRegime r) {
  switch (r) {
    case SafeLoadRegime::net_profit: return "net-profit";
    case SafeLoadRegime::unstable: return "unstable";
    case SafeLoadRegime::one_negative_root: return "one-negative-root";
    case SafeLoadRegime::two_negative_roots: return "two-negative-roots";
    case SafeLoadRegime::unbounded_premium: return "unbounded-premium";
  }
  return "unknown";
}

struct SafeLoadReport {
  bool satisfied = false;
  /// Signed distance of the defining inequality; positive when it holds.
  double margin = 0.0;
  SafeLoadRegime regime = SafeLoadRegime::net_profit;
  /// Premium level the inequality was evaluated at, p(inf).
  double c = 0.0;
};

/// Net-profit check at the limiting premium level c = p(inf).
///
/// exp-exp: lambda / (c mu) < 1. erlang2-exp: 2c / lambda > 1 / mu.
/// exp-erlang2: lambda < mu c / 2, which is also where both characteristic
/// roots are negative; for lambda > mu c / 2 only one root is negative and
/// ruin is certain.
inline SafeLoadReport safe_load_check(const ModelSpec& m) {
  m.validate();
  const PremiumClass cls = classify_premium(m.premium);
  SafeLoadReport r;
  if (cls == PremiumClass::p2) {
    r.satisfied = true;
    r.margin = std::numeric_limits<double>::infinity();
    r.regime = SafeLoadRegime::unbounded_premium;
    r.c = std::numeric_limits<double>::infinity();
    return r;
  }
  const double c = m.premium.limit_at_infinity();
  const double lam = m.lambda;
  const double mu = m.mu;
  r.c = c;
  switch (m.model_case) {
    case ModelCase::exp_exp:
      r.margin = 1.0 - lam / (c * mu);
      r.regime = SafeLoadRegime::net_profit;
      break;
    case ModelCase::erlang2_exp:
      r.margin = 2.0 * c / lam - 1.0 / mu;
      r.regime = r.margin > 0.0 ? SafeLoadRegime::net_profit : SafeLoadRegime::unstable;
      break;
    case ModelCase::exp_erlang2:
      r.margin = mu * c / 2.0 - lam;
      r.regime = r.margin > 0.0 ? SafeLoadRegime::two_negative_roots : SafeLoadRegime::one_negative_root;
      break;
  }
  if (std::abs(r.margin) < 1e-12) {
    throw Error(ErrorKind::boundary, "model",
                "safe-load inequality holds with equality for " + std::string(to_string(m.model_case)) +
                    " at c = " + detail::format_number(c) + "; the asymptotic results exclude this boundary");
  }
  r.satisfied = r.margin > 0.0;
  return r;
}

}  // namespace ruinprob
