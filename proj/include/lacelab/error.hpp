#pragma once

#include <stdexcept>
#include <string>

namespace lace {

// Base for every error raised by the library. Callers that only care about
// "something in the analysis failed" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A coefficient index beyond the model's horizon n_max.
class HorizonError : public Error {
 public:
  using Error::Error;
};

class BudgetError : public Error {
 public:
  using Error::Error;
};

// A required sample regime (or input column) is missing.
class RegimeUncoveredError : public Error {
 public:
  using Error::Error;
};

class IncompleteInputError : public Error {
 public:
  using Error::Error;
};

class NonFiniteError : public Error {
 public:
  using Error::Error;
};

// Division by a vanishing quantity (1 + c_n = 0, f_{i-1}(k) ~ 0, ...).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class NoRootError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace lace
