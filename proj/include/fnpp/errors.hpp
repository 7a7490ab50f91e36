#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fnpp {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A series or iteration ran out of terms before reaching its target.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature could not reach the requested tolerance.
class QuadratureFailure : public Error {
 public:
  QuadratureFailure(const std::string& what, double error_estimate,
                    std::vector<double> component_errors = {})
      : Error(what),
        error_estimate_(error_estimate),
        component_errors_(std::move(component_errors)) {}
  double error_estimate() const noexcept { return error_estimate_; }
  /// Error estimate per integrand component (empty for scalar integrands).
  const std::vector<double>& component_errors() const noexcept { return component_errors_; }

 private:
  double error_estimate_;
  std::vector<double> component_errors_;
};

/// Exact integer result does not fit the result type.
class OverflowError : public Error {
 public:
  using Error::Error;
};

/// Interval endpoints given in the wrong order (s > t).
class OrderError : public Error {
 public:
  using Error::Error;
};

/// Value beyond the range of a bounded function (e.g. y > sup Lambda).
class OutOfRange : public Error {
 public:
  using Error::Error;
};

/// Malformed time or operational-time grid.
class GridError : public Error {
 public:
  using Error::Error;
};

/// A subordinator path ends before crossing the requested level.
class PathTooShort : public Error {
 public:
  using Error::Error;
};

/// A computed variance came out negative beyond tolerance.
class NegativeVariance : public Error {
 public:
  using Error::Error;
};

/// Rate-spec or config text could not be parsed.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position, std::string expected)
      : Error(what), position_(position), expected_(std::move(expected)) {}
  std::size_t position() const noexcept { return position_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::string expected_;
};

/// Invalid experiment configuration (unknown key, bad value, missing field).
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error(field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace fnpp
