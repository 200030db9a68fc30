#pragma once

namespace repoloc::cli {

// Full command-line entry point; returns the process exit code.
// 0 = success, 1 = task-level failure, 2 = environment/input failure.
int run_cli(int argc, const char* const* argv);

} // namespace repoloc::cli
