#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace symstat {

enum class ErrorKind {
  InvalidArgument,
  InternalError,
  NotFound,
  ConstraintViolation,
  SingularSystem,
  NumericalFailure,
  GridMismatch,
  NoCrossing,
  LengthMismatch,
  Interrupted,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` tells callers which
/// contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& what);

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) raise(kind, what);
}

}  // namespace symstat
