#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fog {

// Exit codes of the command-line driver.
enum ExitCode : int {
    exit_ok = 0,          // pass, or equal up to the cutoff
    exit_negative = 1,    // distinguished, a failed check, or a blocked word
    exit_usage = 2,       // bad arguments, grammar or term text
    exit_cutoff = 3,      // an eq-level needed by the command is not below the cutoff
};

// Runs one subcommand; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fog
