#pragma once

#include <stdexcept>
#include <string>

namespace levyhedge {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A model or parameter constraint is violated (MMM admissibility, M > 4, ...).
class ConstraintError : public Error {
 public:
  using Error::Error;
};

// A complex argument lies outside the analyticity strip of a transform.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A Levy-measure moment required by a formula is infinite.
class IntegrabilityError : public Error {
 public:
  using Error::Error;
};

// A numerical approximation failed to reach its accuracy limit.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double estimate)
      : Error(what), estimate_(estimate) {}
  double estimate() const noexcept { return estimate_; }

 private:
  double estimate_;
};

// An improper integral does not decay fast enough to converge.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Monte Carlo sampler cannot handle the requested model.
class SamplingError : public Error {
 public:
  using Error::Error;
};

// Malformed input files or configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace levyhedge
