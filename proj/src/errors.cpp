#include "umbilic/errors.hpp"

namespace umbilic {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::NotPseudoconvex: return "NotPseudoconvex";
    case ErrorKind::TotallyDegenerate: return "TotallyDegenerate";
    case ErrorKind::SolveFailed: return "SolveFailed";
    case ErrorKind::UnderResolved: return "UnderResolved";
    case ErrorKind::ZeroOnContour: return "ZeroOnContour";
    case ErrorKind::PhaseStepTooLarge: return "PhaseStepTooLarge";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::TransitionSingular: return "TransitionSingular";
    case ErrorKind::SymmetryViolated: return "SymmetryViolated";
    case ErrorKind::FormDisagreement: return "FormDisagreement";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigError: return 2;
    case ErrorKind::InvalidArgument: return 3;
    case ErrorKind::NotPseudoconvex: return 4;
    case ErrorKind::TotallyDegenerate: return 5;
    case ErrorKind::SolveFailed: return 6;
    case ErrorKind::UnderResolved: return 7;
    case ErrorKind::ZeroOnContour: return 8;
    case ErrorKind::PhaseStepTooLarge: return 9;
    case ErrorKind::DomainError: return 10;
    case ErrorKind::TransitionSingular: return 11;
    case ErrorKind::SymmetryViolated: return 12;
    case ErrorKind::FormDisagreement: return 13;
    case ErrorKind::IoError: return 14;
  }
  return 1;
}

}  // namespace umbilic
