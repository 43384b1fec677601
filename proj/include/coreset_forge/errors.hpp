#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace coreset_forge {

/// Base of every error the library throws. The CLI maps exit_code() to the
/// process exit status (2 for validation problems, 3 for numerical failure).
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 2; }
};

class IoError : public Error {
  using Error::Error;
};

class FormatError : public Error {
  using Error::Error;
};

/// A point violates the declared domain (sphere, simplex, finiteness).
class DomainError : public Error {
public:
  DomainError(const std::string& what, std::size_t row)
      : Error(what + " (row " + std::to_string(row) + ")"), row_(row) {}
  explicit DomainError(const std::string& what) : Error(what) {}

  /// First offending row, or npos when the error is not tied to a row.
  std::size_t row() const noexcept { return row_; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
  std::size_t row_ = npos;
};

class UnsupportedError : public Error {
  using Error::Error;
};

class NumericsError : public Error {
public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

class DimensionError : public Error {
  using Error::Error;
};

class BudgetError : public Error {
  using Error::Error;
};

class SizeError : public Error {
  using Error::Error;
};

class TargetError : public Error {
  using Error::Error;
};

class ParamError : public Error {
  using Error::Error;
};

} // namespace coreset_forge
