#pragma once

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <map>
#include <string>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "time.hpp"

namespace adctf {

struct ProcessResult {
    bool spawn_failed = false;
    bool timed_out = false;
    bool signalled = false;
    int exit_code = -1;
    std::string out; // stdout
    std::string err; // stderr
    millis elapsed_ms = 0;
};

// Runs argv[0] with the given arguments and extra environment, collecting
// stdout/stderr until exit or deadline. On timeout the whole process group is
// killed so hung checkers cannot leak children.
inline ProcessResult run_process(const std::vector<std::string>& argv,
                                 const std::map<std::string, std::string>& extra_env,
                                 millis timeout_ms) {
    ProcessResult res;
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&t0]() {
        return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                                     t0)
            .count();
    };

    int out_pipe[2], err_pipe[2];
    if (pipe(out_pipe) != 0) {
        res.spawn_failed = true;
        return res;
    }
    if (pipe(err_pipe) != 0) {
        close(out_pipe[0]);
        close(out_pipe[1]);
        res.spawn_failed = true;
        return res;
    }

    pid_t pid = fork();
    if (pid < 0) {
        for (int fd : {out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) close(fd);
        res.spawn_failed = true;
        return res;
    }

    if (pid == 0) {
        setpgid(0, 0);
        dup2(out_pipe[1], STDOUT_FILENO);
        dup2(err_pipe[1], STDERR_FILENO);
        for (int fd : {out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) close(fd);
        for (const auto& [k, v] : extra_env) setenv(k.c_str(), v.c_str(), 1);
        std::vector<char*> cargv;
        cargv.reserve(argv.size() + 1);
        for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
        cargv.push_back(nullptr);
        execvp(cargv[0], cargv.data());
        _exit(127);
    }

    close(out_pipe[1]);
    close(err_pipe[1]);
    fcntl(out_pipe[0], F_SETFL, O_NONBLOCK);
    fcntl(err_pipe[0], F_SETFL, O_NONBLOCK);

    bool out_open = true, err_open = true;
    auto drain = [](int fd, std::string& into, bool& open_flag) {
        char buf[4096];
        for (;;) {
            ssize_t n = read(fd, buf, sizeof(buf));
            if (n > 0) {
                into.append(buf, static_cast<std::size_t>(n));
            } else if (n == 0) {
                open_flag = false;
                return;
            } else {
                if (errno == EAGAIN || errno == EWOULDBLOCK) return;
                if (errno == EINTR) continue;
                open_flag = false;
                return;
            }
        }
    };

    while (out_open || err_open) {
        millis remaining = timeout_ms - elapsed();
        if (remaining <= 0) {
            res.timed_out = true;
            kill(-pid, SIGKILL);
            kill(pid, SIGKILL);
            break;
        }
        struct pollfd fds[2];
        nfds_t n = 0;
        if (out_open) fds[n++] = {out_pipe[0], POLLIN, 0};
        if (err_open) fds[n++] = {err_pipe[0], POLLIN, 0};
        int rc = poll(fds, n, static_cast<int>(std::min<millis>(remaining, 200)));
        if (rc < 0 && errno != EINTR) break;
        drain(out_pipe[0], res.out, out_open);
        drain(err_pipe[0], res.err, err_open);
    }
    drain(out_pipe[0], res.out, out_open);
    drain(err_pipe[0], res.err, err_open);
    close(out_pipe[0]);
    close(err_pipe[0]);

    int status = 0;
    while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (WIFEXITED(status)) {
        res.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        res.signalled = true;
        res.exit_code = 128 + WTERMSIG(status);
    }
    res.elapsed_ms = elapsed();
    return res;
}

} // namespace adctf
