#pragma once

#include <stdexcept>
#include <string>

namespace mifb {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class PartitionError : public Error {
 public:
  using Error::Error;
};

class CapabilityError : public Error {
 public:
  using Error::Error;
};

class SymmetryError : public Error {
 public:
  using Error::Error;
};

class RankDeficiencyError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Iterative scheme failed to reach its tolerance; carries the best estimate
/// available when the iteration cap was hit.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best)
      : Error(what), best_estimate(best) {}
  double best_estimate;
};

class MonitorFailureError : public Error {
 public:
  MonitorFailureError(const std::string& what, long k) : Error(what), iteration(k) {}
  long iteration;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace mifb
