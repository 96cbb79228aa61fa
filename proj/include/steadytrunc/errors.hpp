#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace steadytrunc {

// Base for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user input: model files, CLI arguments, malformed CSV.
class InputError : public Error {
 public:
  explicit InputError(const std::string& msg) : Error(msg) {}
};

// Model-file syntax or semantic error with source position.
class ParseError : public InputError {
 public:
  ParseError(int line, int col, const std::string& msg)
      : InputError("parse error at " + std::to_string(line) + ":" +
                   std::to_string(col) + ": " + msg),
        line(line),
        col(col) {}
  int line;
  int col;
};

// Numerical failure (non-convergence, residual out of tolerance, overflow).
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg, double residual = 0.0)
      : Error(msg), residual(residual) {}
  double residual;
};

// The redirected chain is reducible; carries the largest closed
// communicating class so the caller can restrict and retry.
class ReducibleChainError : public NumericError {
 public:
  ReducibleChainError(const std::string& msg, std::vector<int> closed_class)
      : NumericError(msg), closed_class(std::move(closed_class)) {}
  std::vector<int> closed_class;
};

// The supplied function fails a Lyapunov certificate check.
class LyapunovError : public Error {
 public:
  explicit LyapunovError(const std::string& msg) : Error(msg) {}
};

}  // namespace steadytrunc
