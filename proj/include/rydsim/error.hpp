#pragma once

#include <stdexcept>
#include <string>

namespace rydsim {

// Configuration / input-validation failure.  The CLI maps this to exit
// code 2 and a machine-readable error JSON on stderr.  `pointer` is a JSON
// pointer to the offending field where one exists.
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& message, std::string pointer = "")
      : std::runtime_error(message), pointer_(std::move(pointer)) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

// Numerical failure (integrator underflow, tolerance not met, eigensolver
// breakdown, ambiguous adiabatic connection, ...).  CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violation on an operation (size caps, degenerate ground
// state where a unique one is required, invalid parameter ranges).  Also
// mapped to exit code 3 by the CLI.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rydsim
