#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rwrkit {

// Validation failures (bad input, bad configuration). CLI exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class BoundsError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Numerical failures (non-convergence, divergence). CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(int source, double residual, int iterations)
      : NumericalError("RWR from source " + std::to_string(source) + " did not converge after " +
                       std::to_string(iterations) + " sweeps (residual " +
                       std::to_string(residual) + ")"),
        source_(source),
        residual_(residual) {}

  int source() const { return source_; }
  double residual() const { return residual_; }

 private:
  int source_;
  double residual_;
};

}  // namespace rwrkit
