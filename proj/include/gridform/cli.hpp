#pragma once

namespace gridform {

// Entry point behind the gridform binary: subcommands simulate, sweep, check,
// envelope. Returns the process exit code: 0 success, 2 validation/usage
// error, 3 simulation divergence.
int run_cli(int argc, const char* const* argv);

}  // namespace gridform
