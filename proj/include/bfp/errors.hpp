#pragma once

#include <stdexcept>
#include <string>

namespace bfp {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};

/// A pivot of the Cholesky factorization was nonpositive, i.e. the matrix is
/// singular or indefinite (typically a rank-deficient sample covariance).
class NotPositiveDefinite : public Error {
 public:
  explicit NotPositiveDefinite(const std::string& msg) : Error(msg) {}
};

/// An iterative kernel (Jacobi eigensolver, SPD retry loop) ran out of budget.
class ConvergenceFailure : public Error {
 public:
  explicit ConvergenceFailure(const std::string& msg) : Error(msg) {}
};

/// Sample data cannot produce positive definite covariances (N <= d,
/// identical rows, ...).
class DegenerateSample : public Error {
 public:
  explicit DegenerateSample(const std::string& msg) : Error(msg) {}
};

/// The secular-equation solver found no sign change inside its derived
/// bracket; indicates a bound-derivation bug, not bad data.
class BracketFailure : public Error {
 public:
  explicit BracketFailure(const std::string& msg) : Error(msg) {}
};

/// The cutting-lines loop hit its worst-case iteration bound without a
/// certificate. Must not occur on valid inputs.
class IterationBudgetExceeded : public Error {
 public:
  explicit IterationBudgetExceeded(const std::string& msg) : Error(msg) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

class RaggedRows : public ParseError {
 public:
  explicit RaggedRows(const std::string& msg) : ParseError(msg) {}
};

class NonFinite : public ParseError {
 public:
  explicit NonFinite(const std::string& msg) : ParseError(msg) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace bfp
