#include "pipesynth/process.hpp"

#include <chrono>
#include <csignal>
#include <thread>

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include "pipesynth/error.hpp"

namespace pipesynth {

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out.push_back(c);
    }
    return out + "'";
}

ProcessOutcome run_shell(const std::string& command, const std::filesystem::path& cwd, double timeout,
                         const std::filesystem::path& stdout_path, const std::filesystem::path& stderr_path) {
    const std::string cwd_s = cwd.string(), out_s = stdout_path.string(), err_s = stderr_path.string();
    const int out_fd = ::open(out_s.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    const int err_fd = ::open(err_s.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (out_fd < 0 || err_fd < 0) {
        if (out_fd >= 0) ::close(out_fd);
        if (err_fd >= 0) ::close(err_fd);
        throw Error(ErrorCode::IoError, "cannot create logs in " + stdout_path.parent_path().string());
    }

    const auto start = std::chrono::steady_clock::now();
    const pid_t pid = ::fork();
    if (pid < 0) {
        ::close(out_fd);
        ::close(err_fd);
        throw Error(ErrorCode::IoError, "fork failed");
    }
    if (pid == 0) {
        ::setpgid(0, 0);
        ::dup2(out_fd, STDOUT_FILENO);
        ::dup2(err_fd, STDERR_FILENO);
        const int null_fd = ::open("/dev/null", O_RDONLY);
        if (null_fd >= 0) ::dup2(null_fd, STDIN_FILENO);
        if (::chdir(cwd_s.c_str()) != 0) ::_exit(127);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::setpgid(pid, pid);
    ::close(out_fd);
    ::close(err_fd);

    ProcessOutcome r;
    int status = 0;
    const auto deadline = start + std::chrono::duration<double>(timeout);
    auto pause = std::chrono::milliseconds(1);
    while (true) {
        const pid_t w = ::waitpid(pid, &status, WNOHANG);
        if (w == pid) break;
        if (w < 0) throw Error(ErrorCode::IoError, "waitpid failed");
        if (std::chrono::steady_clock::now() >= deadline) {
            ::kill(-pid, SIGKILL);
            ::waitpid(pid, &status, 0);
            r.timed_out = true;
            break;
        }
        std::this_thread::sleep_for(pause);
        pause = std::min(pause * 2, std::chrono::milliseconds(20));
    }
    // Reap anything the shell left behind in its group.
    if (!r.timed_out) ::kill(-pid, SIGKILL);
    r.duration = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
    if (WIFSIGNALED(status)) r.signaled = true;
    return r;
}

}  // namespace pipesynth
