#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rehf {

/// Category carried by every library error; the CLI maps it to an exit code.
enum class ErrorCategory {
  Hypothesis,      // a theorem precondition does not hold
  NumericFailure,  // quadrature / eigensolver did not reach tolerance
  Branch,          // contour oracle left a non-negligible imaginary part
  Regime,          // perturbative extrapolation is not in its asymptotic regime
  Convergence,     // fixed-point iteration failed or diverged
  Resource,        // problem too large for the dense budget
  SpecValidation,  // inconsistent model parameters
  Config,          // bad user input
  Internal,        // broken invariant
};

std::string_view to_string(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

}  // namespace rehf
