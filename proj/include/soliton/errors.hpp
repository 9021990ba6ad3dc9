#pragma once

#include <stdexcept>
#include <string>

namespace soliton {

// Argument outside the domain of the reduced ODE (s <= 0, alpha <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Parameters are valid but not of the form an operation requires.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A truncated series cannot meet the requested tolerance.
class PrecisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bracketing / shooting could not establish its preconditions.
class SearchFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// W^2 changes sign or vanishes on the evaluated part of a grid field.
class DegeneracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inconsistent run configuration (CLI, config file, quadrant masks).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace soliton
