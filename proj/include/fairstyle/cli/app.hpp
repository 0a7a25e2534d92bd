#pragma once

#include <iosfwd>
#include <string>

#include "fairstyle/core/error.hpp"

namespace fairstyle::cli {

/// Parses the command line and runs one subcommand. Library errors are
/// printed to `err` as {"error": {kind, message, field}} and mapped to a
/// nonzero exit code.
int run_cli(int argc, const char* const* argv, std::ostream& err);

int exit_code(ErrorKind kind);
std::string error_json(const Error& e);

}  // namespace fairstyle::cli
