#pragma once

#include <stdexcept>
#include <string>

namespace chainbinom {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Request exceeds an implementation cap (scenario enumeration, counters).
class GuardError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

// An objective or likelihood produced a non-finite value where a finite one
// was required.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (CSV rows, missing covariates, empty
// datasets).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Design matrix without full column rank.
class SingularModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A quantity that does not exist for the given fit (e.g. a normal interval
// when the standard error is unavailable).
class UnavailableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace chainbinom
