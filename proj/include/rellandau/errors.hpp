#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rellandau {

/// Kernel evaluated at a coincident pair (rho = 0) without regularization.
class SingularPair : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid configuration or argument outside an operation's domain.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical invariant failed at run time (e.g. a PSD check).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A simulation step failed; carries the step index.
class StepError : public NumericError {
 public:
  StepError(std::uint64_t step, const std::string& what)
      : NumericError("step " + std::to_string(step) + ": " + what), step_(step) {}
  std::uint64_t step() const noexcept { return step_; }

 private:
  std::uint64_t step_;
};

}  // namespace rellandau
