#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ncdkit/error.hpp"

namespace ncdkit::cli {

// Runs one command line (without the program name). Results go to `out`;
// failures are written to `err` as a single JSON object and mapped to a
// nonzero exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int exit_code(ErrorKind kind) noexcept;

}  // namespace ncdkit::cli
