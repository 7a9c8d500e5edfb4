#pragma once

#include <stdexcept>
#include <string>

namespace oslab {

// Raised when an argument lies outside the mathematical domain of an operation
// (zero interior vector, non-positive dilation, invalid exponents, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Raised for malformed calls: empty inputs, out-of-range options.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Two grid functions live on different grids.
class GridMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A symbol could not be evaluated at a needed point; the message names it.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A sequence term cannot be represented on the grid. `limiting_n` is the
// largest n of the same family that still passes the guard (0 if none).
class UnderResolved : public std::runtime_error {
 public:
  UnderResolved(const std::string& what, long long offending_n, long long limiting_n)
      : std::runtime_error(what), offending_n_(offending_n), limiting_n_(limiting_n) {}
  long long offending_n() const noexcept { return offending_n_; }
  long long limiting_n() const noexcept { return limiting_n_; }

 private:
  long long offending_n_;
  long long limiting_n_;
};

// A computational size guard refused the request.
class CostGuard : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace oslab
