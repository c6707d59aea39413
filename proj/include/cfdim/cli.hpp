#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cfdim/error.hpp"
#include "cfdim/verify.hpp"

namespace cfdim::cli {

inline constexpr const char* kSchema = "cfdim-cli/1";

enum ExitCode { kOk = 0, kCheckFailed = 1, kParseError = 2, kRangeError = 3, kBudgetError = 4 };

int exit_code_for(ErrorKind k);

// A fully resolved command: its config echo and rendered output.
struct Outcome {
  Json document;     // {schema, command, config, result}
  std::string csv;   // empty when the command has no table form
  int status = kOk;
};

// Runs a command from its config object (the "config" member of a previous
// output). Global settings inside the config are applied before running.
Outcome execute(const Json& config);

// Renders an outcome in the format named by its config.
std::string render(const Outcome& o);

// argv-style entry point; argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cfdim::cli
