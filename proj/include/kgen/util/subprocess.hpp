#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace kgen::util {

struct CommandSpec {
    std::vector<std::string> argv;  // argv[0] resolved via PATH
    std::filesystem::path cwd;      // empty: inherit
    int timeout_ms = 0;             // 0: no limit
};

struct CommandResult {
    int exit_code = -1;
    int term_signal = 0;
    bool timed_out = false;
    std::string out;
    std::string err;

    bool ok() const { return !timed_out && term_signal == 0 && exit_code == 0; }
};

/// Runs a child process, capturing stdout/stderr. On timeout the child is
/// killed with SIGKILL and `timed_out` is set.
CommandResult run_command(const CommandSpec& spec);

}  // namespace kgen::util
