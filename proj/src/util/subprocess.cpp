#include "kgen/util/subprocess.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <thread>

namespace kgen::util {

namespace {

// Drains an fd into a string without blocking the child on a full pipe:
// the parent reads both pipes between waitpid polls.
void drain(int fd, std::string& sink) {
    char buf[4096];
    for (;;) {
        ssize_t n = ::read(fd, buf, sizeof(buf));
        if (n > 0) {
            sink.append(buf, static_cast<std::size_t>(n));
        } else {
            break;  // EAGAIN, EOF or error
        }
    }
}

void set_nonblocking(int fd) {
    int flags = ::fcntl(fd, F_GETFL, 0);
    ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

}  // namespace

CommandResult run_command(const CommandSpec& spec) {
    if (spec.argv.empty()) throw std::invalid_argument("run_command: empty argv");

    int out_pipe[2], err_pipe[2];
    if (::pipe(out_pipe) != 0 || ::pipe(err_pipe) != 0) {
        throw std::runtime_error("run_command: pipe failed");
    }

    pid_t pid = ::fork();
    if (pid < 0) throw std::runtime_error("run_command: fork failed");

    if (pid == 0) {
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::dup2(err_pipe[1], STDERR_FILENO);
        ::close(out_pipe[0]);
        ::close(out_pipe[1]);
        ::close(err_pipe[0]);
        ::close(err_pipe[1]);
        if (!spec.cwd.empty() && ::chdir(spec.cwd.c_str()) != 0) _exit(127);
        std::vector<char*> argv;
        argv.reserve(spec.argv.size() + 1);
        for (const auto& a : spec.argv) argv.push_back(const_cast<char*>(a.c_str()));
        argv.push_back(nullptr);
        ::execvp(argv[0], argv.data());
        ::fprintf(stderr, "exec failed: %s: %s\n", argv[0], std::strerror(errno));
        _exit(127);
    }

    ::close(out_pipe[1]);
    ::close(err_pipe[1]);
    set_nonblocking(out_pipe[0]);
    set_nonblocking(err_pipe[0]);

    CommandResult result;
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::milliseconds(spec.timeout_ms > 0 ? spec.timeout_ms : 0);
    int status = 0;
    for (;;) {
        drain(out_pipe[0], result.out);
        drain(err_pipe[0], result.err);
        pid_t r = ::waitpid(pid, &status, WNOHANG);
        if (r == pid) break;
        if (r < 0) {
            status = 0;
            break;
        }
        if (spec.timeout_ms > 0 && std::chrono::steady_clock::now() >= deadline) {
            result.timed_out = true;
            ::kill(pid, SIGKILL);
            ::waitpid(pid, &status, 0);
            break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
    drain(out_pipe[0], result.out);
    drain(err_pipe[0], result.err);
    ::close(out_pipe[0]);
    ::close(err_pipe[0]);

    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        result.term_signal = WTERMSIG(status);
        result.exit_code = -1;
    }
    return result;
}

}  // namespace kgen::util
