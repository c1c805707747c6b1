#include "ncdkit/error.hpp"

namespace ncdkit {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::alphabet_violation: return "alphabet_violation";
    case ErrorKind::truncated_stream: return "truncated_stream";
    case ErrorKind::corrupt_stream: return "corrupt_stream";
    case ErrorKind::degenerate_distribution: return "degenerate_distribution";
    case ErrorKind::size_limit: return "size_limit";
    case ErrorKind::bridge: return "bridge";
    case ErrorKind::protocol: return "protocol";
    case ErrorKind::timeout: return "timeout";
    case ErrorKind::empty_input: return "empty_input";
    case ErrorKind::degenerate_input: return "degenerate_input";
    case ErrorKind::dimension_mismatch: return "dimension_mismatch";
    case ErrorKind::parse: return "parse";
    case ErrorKind::schema: return "schema";
    case ErrorKind::insufficient_population: return "insufficient_population";
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::io: return "io";
    case ErrorKind::usage: return "usage";
  }
  return "unknown";
}

void raise(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace ncdkit
