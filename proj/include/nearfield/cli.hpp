#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace nearfield {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitIo = 3,
    kExitDivergence = 4,
};

// Entry point behind the command-line tool. args excludes the program name.
// Subcommands: gen-data, theory, train, eval. Flags: --config PATH, --seed U64,
// --out DIR, --set key=value (repeatable), --threads N, --precision single|double.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nearfield
