#pragma once

#include <stdexcept>
#include <string>

namespace ctepa {

// Malformed parameters or configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A quantity was requested outside the set where it is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The subcritical construction does not close for these parameters.
class InadmissibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Integration could not proceed (step underflow, CFL, coefficient bounds).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An internal consistency check failed.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace ctepa
