#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace parafreq {

enum class ErrorCode {
  TimeOutOfWindow,
  UnsupportedBackground,
  KernelNotPositive,
  ReprMismatch,
  NodeSingularity,
  DegreeTooLarge,
  ZeroSolution,
  DualFormMismatch,
  MonotonicityViolation,
  NotStationary,
  BoundViolation,
  IllConditioned,
  ConfigError,
  IoError,
  InvalidArgument,
};

inline constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::TimeOutOfWindow: return "TimeOutOfWindow";
    case ErrorCode::UnsupportedBackground: return "UnsupportedBackground";
    case ErrorCode::KernelNotPositive: return "KernelNotPositive";
    case ErrorCode::ReprMismatch: return "ReprMismatch";
    case ErrorCode::NodeSingularity: return "NodeSingularity";
    case ErrorCode::DegreeTooLarge: return "DegreeTooLarge";
    case ErrorCode::ZeroSolution: return "ZeroSolution";
    case ErrorCode::DualFormMismatch: return "DualFormMismatch";
    case ErrorCode::MonotonicityViolation: return "MonotonicityViolation";
    case ErrorCode::NotStationary: return "NotStationary";
    case ErrorCode::BoundViolation: return "BoundViolation";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const char* what) {
  if (!cond) fail(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace parafreq
