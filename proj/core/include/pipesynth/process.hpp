#pragma once

#include <filesystem>
#include <string>

namespace pipesynth {

struct ProcessOutcome {
    int exit_code = -1;
    bool signaled = false;
    bool timed_out = false;
    double duration = 0.0;
};

/// Runs `command` through /bin/sh in its own process group with stdout and
/// stderr redirected to files. The whole group is killed once `timeout`
/// seconds elapse.
ProcessOutcome run_shell(const std::string& command, const std::filesystem::path& cwd, double timeout,
                         const std::filesystem::path& stdout_path, const std::filesystem::path& stderr_path);

/// Wraps `s` in single quotes for /bin/sh.
std::string shell_quote(const std::string& s);

}  // namespace pipesynth
