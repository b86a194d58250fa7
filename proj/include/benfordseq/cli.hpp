#pragma once

namespace benfordseq {

// Full command-line front end (subcommands gen, analyze, decompose, predict,
// montecarlo). Exposed as a function so tests can drive it in-process.
// Returns the process exit code: 0 success, 1 --expect mismatch,
// 2 usage/parse problem, 3 numeric failure.
int cli_main(int argc, const char* const* argv);

}  // namespace benfordseq
