#pragma once

#include <stdexcept>
#include <string>

namespace confstat {

// Error taxonomy maps onto the CLI exit codes: config 2, domain/geometry 3,
// solver non-convergence 4.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct DomainError : Error {
  using Error::Error;
};

struct GeometryError : Error {
  using Error::Error;
};

struct SolverError : Error {
  SolverError(const std::string& msg, double best_residual = 0.0)
      : Error(msg), best_residual(best_residual) {}
  double best_residual;
};

}  // namespace confstat
