#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ncdkit {

enum class ErrorKind {
  alphabet_violation,
  truncated_stream,
  corrupt_stream,
  degenerate_distribution,
  size_limit,
  bridge,
  protocol,
  timeout,
  empty_input,
  degenerate_input,
  dimension_mismatch,
  parse,
  schema,
  insufficient_population,
  invalid_argument,
  io,
  usage,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a kind so callers (the CLI in
// particular) can report it in machine-readable form.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& message);

}  // namespace ncdkit
