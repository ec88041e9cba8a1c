#include "strandkit/common.hpp"

namespace strandkit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::sizing: return "sizing";
    case ErrorCode::out_of_chart: return "out_of_chart";
    case ErrorCode::degenerate: return "degenerate";
    case ErrorCode::io: return "io";
    case ErrorCode::bad_magic: return "bad_magic";
    case ErrorCode::truncated: return "truncated";
    case ErrorCode::count_overflow: return "count_overflow";
    case ErrorCode::unsupported_version: return "unsupported_version";
    case ErrorCode::parse: return "parse";
  }
  return "unknown";
}

}  // namespace strandkit
