#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lexsimp {

/// Broad failure classes. The CLI maps each to its own exit code.
enum class ErrorCode {
  kInvalidArgument,
  kParse,
  kMissingResource,
  kSchemaMismatch,
  kNumeric,
  kIo,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lexsimp
