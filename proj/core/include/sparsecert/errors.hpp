#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sparsecert {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotPositiveSemidefinite : public Error {
 public:
  NotPositiveSemidefinite(double min_eigenvalue, double slack)
      : Error("matrix is not positive semidefinite: lambda_min = " +
              std::to_string(min_eigenvalue) + " < -" + std::to_string(slack)),
        min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class EmptyPattern : public Error {
 public:
  EmptyPattern() : Error("sparsity pattern is empty") {}
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// rho is outside the open consistency interval of a pattern.
class InconsistentRho : public Error {
 public:
  InconsistentRho(double rho, double lo, double hi)
      : Error("rho = " + std::to_string(rho) + " outside consistency interval (" +
              std::to_string(lo) + ", " + std::to_string(hi) + ")") {}
};

class InfeasibleWitness : public Error {
 public:
  using Error::Error;
};

class EmptySet : public Error {
 public:
  EmptySet() : Error("bound set is empty") {}
};

class DegeneratePivot : public Error {
 public:
  explicit DegeneratePivot(double pivot)
      : Error("|x'Bx| = " + std::to_string(pivot) + " is too close to zero") {}
};

class BudgetExceeded : public Error {
 public:
  BudgetExceeded(double requested, std::size_t budget)
      : Error("exhaustive search needs " + std::to_string(requested) +
              " enumerations, budget is " + std::to_string(budget)) {}
};

/// Input file could not be parsed. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : Error("parse error at line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class NotSquare : public Error {
 public:
  NotSquare(std::size_t rows, std::size_t cols)
      : Error("expected a square matrix, got " + std::to_string(rows) + "x" +
              std::to_string(cols)) {}
};

}  // namespace sparsecert
