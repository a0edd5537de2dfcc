#pragma once

#include <stdexcept>
#include <string>

namespace qkdrate {

// Base for every error raised by the library. The CLI maps the two families
// below onto exit codes: input problems -> 1, numerical problems -> 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- invalid input ---------------------------------------------------------

class InputError : public Error {
 public:
  using Error::Error;
};

class DomainError : public InputError {
 public:
  using InputError::InputError;
};

class ArgumentError : public InputError {
 public:
  using InputError::InputError;
};

class InfeasibleQberError : public InputError {
 public:
  using InputError::InputError;
};

class DegenerateFilterError : public InputError {
 public:
  using InputError::InputError;
};

// Configuration problem with a dotted path to the offending field.
class ConfigError : public InputError {
 public:
  ConfigError(std::string field, const std::string& what)
      : InputError(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// ---- numerical problems ----------------------------------------------------

class NumericalError : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SupportError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConditioningError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class InsufficientCutoffError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class GaussianNotFaithful : public NumericalError {
 public:
  GaussianNotFaithful(double nu, const std::string& where)
      : NumericalError(where + ": Gaussian state is not faithful (symplectic eigenvalue " +
                       std::to_string(nu) + " <= 1 + 1e-9)"),
        nu_(nu) {}
  double symplectic_eigenvalue() const noexcept { return nu_; }

 private:
  double nu_;
};

}  // namespace qkdrate
