#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ruinprob {

/// Failure categories raised across the library. The CLI maps
/// `invalid_argument` to a configuration error and everything else to a
/// numerical failure.
enum class ErrorKind {
  invalid_argument,
  domain,
  non_convergence,
  classification,
  safe_load,
  boundary,
  unsupported_case,
  complex_roots,
  degenerate_root,
  divergence,
  overflow,
  calibration,
  truncation,
  stiffness,
  flow_integration,
  hypothesis_violation,
  fit,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::domain: return "domain";
    case ErrorKind::non_convergence: return "non-convergence";
    case ErrorKind::classification: return "classification-ambiguous";
    case ErrorKind::safe_load: return "safe-load-violation";
    case ErrorKind::boundary: return "boundary";
    case ErrorKind::unsupported_case: return "unsupported-case";
    case ErrorKind::complex_roots: return "complex-roots";
    case ErrorKind::degenerate_root: return "degenerate-root";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::overflow: return "overflow";
    case ErrorKind::calibration: return "calibration-failure";
    case ErrorKind::truncation: return "truncation-too-small";
    case ErrorKind::stiffness: return "stiffness";
    case ErrorKind::flow_integration: return "flow-integration";
    case ErrorKind::hypothesis_violation: return "hypothesis-violation";
    case ErrorKind::fit: return "non-convergent-fit";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string_view module, const std::string& message)
      : std::runtime_error(std::string(module) + "/" + std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        module_(module) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorKind kind_;
  std::string module_;
};

}  // namespace ruinprob
