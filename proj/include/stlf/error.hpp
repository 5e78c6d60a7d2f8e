#pragma once

#include <stdexcept>
#include <string>

namespace stlf {

// Error categories double as CLI exit codes.
enum class ErrorKind : int {
  usage = 1,
  data = 2,
  numeric = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorKind::numeric, what) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

// Raised by the EMD stages when a series has too few extrema to build envelopes.
class InsufficientExtrema : public NumericError {
 public:
  explicit InsufficientExtrema(const std::string& what = "insufficient extrema")
      : NumericError(what) {}
};

class ShapeError : public NumericError {
 public:
  explicit ShapeError(const std::string& what) : NumericError("shape mismatch: " + what) {}
};

}  // namespace stlf
