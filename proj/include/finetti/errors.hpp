#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace finetti {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// The test space admits no state at all.
class EmptyStateSpace : public Error {
 public:
  EmptyStateSpace() : Error("state space is empty: no assignment is normalized on every test") {}
};

class SizeLimitExceeded : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown (singular system, ill-conditioned basis, LP failure).
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Malformed input document. `location` is a JSON pointer or byte offset.
class ParseError : public Error {
 public:
  ParseError(std::string location, const std::string& message)
      : Error(location.empty() ? message : location + ": " + message), location_(std::move(location)) {}
  const std::string& location() const noexcept { return location_; }

 private:
  std::string location_;
};

/// Raised when an operation needs marginals that a signalling state does not
/// define. `source` lists the systems whose test choice leaks into `affected`.
class SignallingState : public Error {
 public:
  SignallingState(std::vector<std::size_t> source, std::vector<std::size_t> affected, double magnitude);
  const std::vector<std::size_t>& source() const noexcept { return source_; }
  const std::vector<std::size_t>& affected() const noexcept { return affected_; }
  double magnitude() const noexcept { return magnitude_; }

 private:
  std::vector<std::size_t> source_;
  std::vector<std::size_t> affected_;
  double magnitude_;
};

class ZeroProbabilityOutcome : public Error {
 public:
  using Error::Error;
};

class ZeroProbabilityObservation : public Error {
 public:
  using Error::Error;
};

/// One of the three exchangeability clauses (1 symmetry, 2 nonsignalling,
/// 3 marginal consistency) does not hold.
class ExchangeabilityViolation : public Error {
 public:
  ExchangeabilityViolation(int clause, const std::string& message)
      : Error("exchangeability clause " + std::to_string(clause) + ": " + message), clause_(clause) {}
  int clause() const noexcept { return clause_; }

 private:
  int clause_;
};

/// Renders a system list 1-based, e.g. "{1,3}".
std::string format_systems(const std::vector<std::size_t>& systems);

}  // namespace finetti
