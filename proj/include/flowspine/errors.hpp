#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace flowspine {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class MalformedRecordError : public Error {
 public:
  using Error::Error;
};

class DuplicateNodeIdError : public Error {
 public:
  using Error::Error;
};

class NegativeWeightError : public Error {
 public:
  using Error::Error;
};

class NegativeValueError : public Error {
 public:
  using Error::Error;
};

class NoInEdgesError : public Error {
 public:
  using Error::Error;
};

class WeightNotIncidentError : public Error {
 public:
  using Error::Error;
};

class UnknownMetricError : public Error {
 public:
  using Error::Error;
};

class CoreTooSmallError : public Error {
 public:
  using Error::Error;
};

/// The per-component leak test failed: at least one strongly connected
/// component is fully owned by itself, so (I - A) may be singular.
class FrobeniusViolationError : public Error {
 public:
  FrobeniusViolationError(const std::string& msg,
                          std::vector<std::vector<std::uint32_t>> components)
      : Error(msg), components(std::move(components)) {}

  std::vector<std::vector<std::uint32_t>> components;  // node indices per offending SCC
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& msg, std::size_t iterations, double residual)
      : Error(msg), iterations(iterations), residual(residual) {}

  std::size_t iterations = 0;
  double residual = 0.0;
};

class BadThresholdError : public Error {
 public:
  using Error::Error;
};

class UnreachableThetaError : public Error {
 public:
  UnreachableThetaError(const std::string& msg, double max_theta)
      : Error(msg), max_theta(max_theta) {}

  double max_theta = 0.0;  // best achievable controlled-value fraction
};

class EmptyBackboneError : public Error {
 public:
  using Error::Error;
};

class EmptySubnetworkError : public Error {
 public:
  using Error::Error;
};

class RegionEExcludedError : public Error {
 public:
  using Error::Error;
};

}  // namespace flowspine
