#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pset {

/// Root of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside the domain of the operation.
class ParameterDomainError : public Error {
 public:
  using Error::Error;
};

/// The dominating rate (or the expected-size series) diverges.
class DivergentRateError : public Error {
 public:
  using Error::Error;
};

/// The counting sequence exceeds its declared bound at some level.
class BoundViolationError : public Error {
 public:
  BoundViolationError(std::uint64_t level, const std::string& what)
      : Error(what), level_(level) {}

  std::uint64_t level() const noexcept { return level_; }

 private:
  std::uint64_t level_;
};

/// A rejection loop ran out of attempts.
class RetriesExhaustedError : public Error {
 public:
  RetriesExhaustedError(std::uint64_t attempts, const std::string& what)
      : Error(what), attempts_(attempts) {}

  std::uint64_t attempts() const noexcept { return attempts_; }

 private:
  std::uint64_t attempts_;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class UnreachableTargetError : public Error {
 public:
  using Error::Error;
};

class NonConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace pset
