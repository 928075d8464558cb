#include "lexsimp/error.hpp"

namespace lexsimp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kMissingResource: return "missing_resource";
    case ErrorCode::kSchemaMismatch: return "schema_mismatch";
    case ErrorCode::kNumeric: return "numeric";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace lexsimp
