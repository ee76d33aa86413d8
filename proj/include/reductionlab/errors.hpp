#pragma once

#include <stdexcept>
#include <string>

namespace reductionlab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument violated a documented precondition or type invariant.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature ran out of refinement levels before two successive
/// estimates agreed to the requested relative tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last, double previous)
      : Error(what), last_(last), previous_(previous) {}

  double last_estimate() const noexcept { return last_; }
  double previous_estimate() const noexcept { return previous_; }

 private:
  double last_;
  double previous_;
};

/// The requested raster would exceed the cell budget.
class RasterizationExtentError : public Error {
 public:
  using Error::Error;
};

/// All couplings vanish: the superposition never decays, so reduction
/// probabilities are undefined.
class StableSuperpositionError : public Error {
 public:
  using Error::Error;
};

/// apply_trigger was called for a pair that cannot fire.
class InvalidTriggerError : public Error {
 public:
  using Error::Error;
};

/// Coupling matrix and the mass distributions it claims to describe disagree.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace reductionlab
