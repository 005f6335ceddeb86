#pragma once

#include <stdexcept>
#include <string>

namespace mkv {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (r <= 0, q <= 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid or incomplete configuration. The message names the offending field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Quadrature or root finding failed to converge.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Time or index outside the horizon of a path.
class RangeError : public Error {
 public:
  using Error::Error;
};

// A simulated state became non-finite.
class SimulationError : public Error {
 public:
  using Error::Error;
};

// A sampled estimator had no usable samples.
class EstimationError : public Error {
 public:
  using Error::Error;
};

class RenderError : public Error {
 public:
  using Error::Error;
};

[[noreturn]] void throw_config(const std::string& field, const std::string& what);

}  // namespace mkv
