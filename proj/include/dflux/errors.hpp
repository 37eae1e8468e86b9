/// Error types shared by all solver modules.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dflux {

/// Invalid parameter value (nonpositive tolerance, out-of-range argument, ...).
class ParameterError : public std::invalid_argument {
 public:
  explicit ParameterError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Grid construction or alignment violation.
class GridError : public std::invalid_argument {
 public:
  explicit GridError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Operands live on different grids.
class ShapeError : public std::invalid_argument {
 public:
  explicit ShapeError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Operation asked of a flux outside the supported family.
class UnsupportedFluxError : public std::invalid_argument {
 public:
  explicit UnsupportedFluxError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// An iterative solve ran out of budget; carries the residual history.
class NonconvergenceError : public std::runtime_error {
 public:
  NonconvergenceError(const std::string& msg, std::vector<double> residuals)
      : std::runtime_error(msg), residual_path(std::move(residuals)) {}
  std::vector<double> residual_path;
};

/// The contractive solver was called outside its q <= margin regime.
class MustUseExtendedSolverError : public std::runtime_error {
 public:
  explicit MustUseExtendedSolverError(const std::string& msg) : std::runtime_error(msg) {}
};

/// The epsilon schedule ran out before the Cauchy criterion tripped.
class ContinuationError : public std::runtime_error {
 public:
  ContinuationError(const std::string& msg, std::vector<double> gap_sequence)
      : std::runtime_error(msg), gaps(std::move(gap_sequence)) {}
  std::vector<double> gaps;
};

/// The semi-analytic backward-Euler oracle found no admissible splice.
class OracleFailure : public std::runtime_error {
 public:
  explicit OracleFailure(const std::string& msg) : std::runtime_error(msg) {}
};

/// A semigroup step failed; remembers which one.
class EvolutionError : public std::runtime_error {
 public:
  EvolutionError(const std::string& msg, int step_index_)
      : std::runtime_error(msg), step_index(step_index_) {}
  int step_index;
};

/// File read/write failure in the experiment runner.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dflux
