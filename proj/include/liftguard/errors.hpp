#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace liftguard {

enum class ErrorKind {
  kDimension,
  kArgument,
  kParse,
  kModel,
  kNumeric,
  kPrecondition,
  kCapability,
  kConfiguration,
};

std::string_view to_string(ErrorKind kind);

/// Process exit code for the command-line contract:
/// 2 parse/validation, 3 capability, 4 numeric failure, 5 configuration.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string detail = {})
      : std::runtime_error(message), kind_(kind), detail_(std::move(detail)) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Optional machine-readable payload (JSON text), e.g. candidate zero sets.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message,
                              std::string detail = {}) {
  throw Error(kind, message, std::move(detail));
}

}  // namespace liftguard
