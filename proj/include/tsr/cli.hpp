#pragma once

namespace tsr {

// Full command-line entry point (synth / pairs / train / eval / infer /
// recover / render). Returns the process exit code: 0 on success, nonzero
// with a diagnostic on stderr otherwise.
int run_cli(int argc, const char* const* argv);

}  // namespace tsr
