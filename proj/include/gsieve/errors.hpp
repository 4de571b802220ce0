#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gsieve {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Matrix/vector dimension mismatch.
struct DimensionMismatch : Error {
  using Error::Error;
};

/// An enumeration would exceed the configured element cap.
struct CapExceeded : Error {
  uint64_t cap;
  explicit CapExceeded(const std::string& what, uint64_t cap_) : Error(what), cap(cap_) {}
};

/// A word/ball enumeration would exceed the configured word budget.
struct BudgetExceeded : Error {
  uint64_t budget;
  explicit BudgetExceeded(const std::string& what, uint64_t budget_) : Error(what), budget(budget_) {}
};

/// A modulus failed the primality check.
struct NotPrime : Error {
  using Error::Error;
};

/// Group spec violates a structural invariant (asymmetric S, bad determinant, ...).
struct InvalidGroupSpec : Error {
  using Error::Error;
};

/// Sieve family applied to an incompatible group (e.g. Lagrangian family on SL_r).
struct FamilyMismatch : Error {
  using Error::Error;
};

/// Polynomial value is exactly zero where a nonzero value is required.
struct ZeroValue : Error {
  using Error::Error;
};

/// All tracked residues vanish and no exact matrix is available to decide f(g) = 0.
struct ZeroAmbiguity : Error {
  using Error::Error;
};

/// Power iteration failed to reach the requested residual.
struct NoConvergence : Error {
  double best_estimate;
  double residual;
  NoConvergence(const std::string& what, double best, double res)
      : Error(what), best_estimate(best), residual(res) {}
};

/// Config text rejected; line/column are 1-based, column 0 = whole line.
struct ConfigError : Error {
  int line;
  int column;
  ConfigError(const std::string& what, int line_, int column_ = 0)
      : Error(what), line(line_), column(column_) {}
};

}  // namespace gsieve
