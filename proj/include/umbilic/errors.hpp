#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace umbilic {

enum class ErrorKind {
  InvalidArgument,
  ConfigError,
  NotPseudoconvex,
  TotallyDegenerate,
  SolveFailed,
  UnderResolved,
  ZeroOnContour,
  PhaseStepTooLarge,
  DomainError,
  TransitionSingular,
  SymmetryViolated,
  FormDisagreement,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Process exit code for each error class; 0 is reserved for success.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace umbilic
