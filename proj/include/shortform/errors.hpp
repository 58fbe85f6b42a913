#pragma once

#include <stdexcept>
#include <string>

namespace shortform {

/// Failure taxonomy shared by every module. Validation errors blame the
/// input; the remaining kinds signal that two independent computation
/// paths disagreed and the result cannot be trusted.
enum class ErrorKind {
  NotHermitian,
  NotPsd,
  DimensionMismatch,
  NotARing,
  RingMismatch,
  AlgebraMismatch,
  NotRepresentable,
  PreconditionViolated,
  NoConvergence,
  InternalInconsistency,
  ParseError,
  InvalidArgument,
};

inline const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NotPsd: return "NotPsd";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotARing: return "NotARing";
    case ErrorKind::RingMismatch: return "RingMismatch";
    case ErrorKind::AlgebraMismatch: return "AlgebraMismatch";
    case ErrorKind::NotRepresentable: return "NotRepresentable";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::InternalInconsistency: return "InternalInconsistency";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

  /// True when the error is attributable to the caller's input rather
  /// than to a broken internal cross-check.
  bool is_validation() const {
    return kind_ != ErrorKind::InternalInconsistency &&
           kind_ != ErrorKind::NoConvergence;
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace shortform
