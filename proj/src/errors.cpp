#include "liftguard/errors.hpp"

namespace liftguard {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimension: return "dimension";
    case ErrorKind::kArgument: return "argument";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kModel: return "model";
    case ErrorKind::kNumeric: return "numeric";
    case ErrorKind::kPrecondition: return "precondition";
    case ErrorKind::kCapability: return "capability";
    case ErrorKind::kConfiguration: return "configuration";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimension:
    case ErrorKind::kArgument:
    case ErrorKind::kParse:
    case ErrorKind::kModel:
      return 2;
    case ErrorKind::kCapability:
      return 3;
    case ErrorKind::kNumeric:
    case ErrorKind::kPrecondition:
      return 4;
    case ErrorKind::kConfiguration:
      return 5;
  }
  return 1;
}

}  // namespace liftguard
