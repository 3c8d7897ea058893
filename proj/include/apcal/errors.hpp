// Error taxonomy used by the library and mapped to CLI exit codes.
#pragma once

#include <stdexcept>
#include <string>

namespace apcal {

/// Invalid or inconsistent user-supplied configuration (bad values, unknown
/// keys, unit problems, infeasible scenario combinations).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A request the observation model cannot support: shape mismatches between
/// observations and the selected estimator, or a parameterization that the
/// available measurements cannot identify.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical degeneracy that invalidates a result (non-finite loss values,
/// ill-conditioned linear systems outside the recoverable regime).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace apcal
