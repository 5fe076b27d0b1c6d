#include "symstat/errors.hpp"

namespace symstat {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InternalError: return "InternalError";
    case ErrorKind::NotFound: return "NotFound";
    case ErrorKind::ConstraintViolation: return "ConstraintViolation";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::NoCrossing: return "NoCrossing";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::Interrupted: return "Interrupted";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void raise(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace symstat
