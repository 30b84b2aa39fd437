#include "layerfix/core/process.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "layerfix/core/error.hpp"

namespace layerfix {
namespace {

using Clock = std::chrono::steady_clock;

struct Pipe {
    int fds[2] = {-1, -1};
    Pipe() {
        if (::pipe2(fds, O_CLOEXEC) != 0) throw Error(ErrorKind::io, std::string("pipe: ") + std::strerror(errno));
    }
};

void close_fd(int& fd) {
    if (fd >= 0) ::close(fd);
    fd = -1;
}

int decode_status(int status) {
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
    return -1;
}

// Forks and execs argv with the three pipe ends wired to stdin/stdout/stderr.
int spawn(const std::vector<std::string>& argv, const std::filesystem::path& cwd, Pipe& in, Pipe& out, Pipe& err) {
    if (argv.empty()) throw Error(ErrorKind::config, "process: empty command");
    // A child exiting early must surface as EPIPE, not kill the parent.
    ::signal(SIGPIPE, SIG_IGN);
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    const std::string dir = cwd.string();

    // The child reports a failed chdir/exec as an errno on this pipe; a
    // successful exec closes it.
    Pipe status;
    const pid_t pid = ::fork();
    if (pid < 0) {
        close_fd(status.fds[0]);
        close_fd(status.fds[1]);
        throw Error(ErrorKind::io, std::string("fork: ") + std::strerror(errno));
    }
    if (pid == 0) {
        ::dup2(in.fds[0], STDIN_FILENO);
        ::dup2(out.fds[1], STDOUT_FILENO);
        ::dup2(err.fds[1], STDERR_FILENO);
        ::setpgid(0, 0);
        if (dir.empty() || ::chdir(dir.c_str()) == 0) ::execvp(args[0], args.data());
        const int code = errno;
        [[maybe_unused]] auto ignored = ::write(status.fds[1], &code, sizeof code);
        _exit(127);
    }
    ::setpgid(pid, pid);
    close_fd(status.fds[1]);
    int code = 0;
    ssize_t n = 0;
    do {
        n = ::read(status.fds[0], &code, sizeof code);
    } while (n < 0 && errno == EINTR);
    close_fd(status.fds[0]);
    if (n == static_cast<ssize_t>(sizeof code)) {
        int ignored_status = 0;
        ::waitpid(pid, &ignored_status, 0);
        for (int* fd : {&in.fds[0], &in.fds[1], &out.fds[0], &out.fds[1], &err.fds[0], &err.fds[1]}) close_fd(*fd);
        throw Error(ErrorKind::io, "cannot start " + argv[0] + ": " + std::strerror(code));
    }
    close_fd(in.fds[0]);
    close_fd(out.fds[1]);
    close_fd(err.fds[1]);
    return pid;
}

void kill_group(int pid) {
    ::kill(-pid, SIGKILL);
    ::kill(pid, SIGKILL);
}

// Reads what is available; returns false on EOF.
bool read_some(int fd, std::string& sink) {
    char buf[65536];
    const ssize_t n = ::read(fd, buf, sizeof buf);
    if (n > 0) {
        sink.append(buf, static_cast<std::size_t>(n));
        return true;
    }
    return n < 0 && (errno == EINTR || errno == EAGAIN);
}

}  // namespace

ProcessOutput run_process(const std::vector<std::string>& argv, std::string_view input,
                          std::optional<std::chrono::milliseconds> timeout, const std::filesystem::path& cwd) {
    Pipe in, out, err;
    const int pid = spawn(argv, cwd, in, out, err);
    int in_fd = in.fds[1], out_fd = out.fds[0], err_fd = err.fds[0];
    ::fcntl(in_fd, F_SETFL, O_NONBLOCK);

    ProcessOutput result;
    std::size_t written = 0;
    if (input.empty()) close_fd(in_fd);
    const auto deadline = timeout ? Clock::now() + *timeout : Clock::time_point::max();

    while (out_fd >= 0 || err_fd >= 0) {
        pollfd fds[3];
        nfds_t count = 0;
        if (out_fd >= 0) fds[count++] = {out_fd, POLLIN, 0};
        if (err_fd >= 0) fds[count++] = {err_fd, POLLIN, 0};
        if (in_fd >= 0) fds[count++] = {in_fd, POLLOUT, 0};
        int wait_ms = -1;
        if (timeout) {
            const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
            if (left <= 0) {
                result.timed_out = true;
                kill_group(pid);
                break;
            }
            wait_ms = static_cast<int>(std::min<long long>(left, 1000));
        }
        if (::poll(fds, count, wait_ms) < 0 && errno != EINTR) break;
        for (nfds_t i = 0; i < count; ++i) {
            if (fds[i].revents == 0) continue;
            if (fds[i].fd == in_fd) {
                const ssize_t n = ::write(in_fd, input.data() + written, input.size() - written);
                if (n > 0) written += static_cast<std::size_t>(n);
                if (n < 0 && errno != EAGAIN && errno != EINTR) written = input.size();
                if (written >= input.size()) close_fd(in_fd);
            } else if (fds[i].fd == out_fd) {
                if (!read_some(out_fd, result.out)) close_fd(out_fd);
            } else if (fds[i].fd == err_fd) {
                if (!read_some(err_fd, result.err)) close_fd(err_fd);
            }
        }
    }
    close_fd(in_fd);
    close_fd(out_fd);
    close_fd(err_fd);
    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    result.exit_status = decode_status(status);
    return result;
}

LineChannel::LineChannel(const std::vector<std::string>& argv, const std::filesystem::path& cwd) {
    Pipe in, out, err;
    pid_ = spawn(argv, cwd, in, out, err);
    in_fd_ = in.fds[1];
    out_fd_ = out.fds[0];
    err_fd_ = err.fds[0];
    ::fcntl(err_fd_, F_SETFL, O_NONBLOCK);
}

LineChannel::~LineChannel() { terminate(); }

void LineChannel::send(std::string_view line) {
    std::string payload(line);
    payload.push_back('\n');
    std::size_t done = 0;
    while (done < payload.size()) {
        if (in_fd_ < 0) throw Error(ErrorKind::io, "channel closed");
        const ssize_t n = ::write(in_fd_, payload.data() + done, payload.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error(ErrorKind::io, std::string("write to child: ") + std::strerror(errno));
        }
        done += static_cast<std::size_t>(n);
    }
}

std::optional<std::string> LineChannel::receive(std::chrono::milliseconds timeout) {
    const auto deadline = Clock::now() + timeout;
    while (true) {
        if (const auto nl = out_buffer_.find('\n'); nl != std::string::npos) {
            std::string line = out_buffer_.substr(0, nl);
            out_buffer_.erase(0, nl + 1);
            return line;
        }
        if (eof_ || out_fd_ < 0) return std::nullopt;
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
        if (left <= 0) return std::nullopt;
        pollfd fds[2] = {{out_fd_, POLLIN, 0}, {err_fd_, POLLIN, 0}};
        if (::poll(fds, err_fd_ >= 0 ? 2 : 1, static_cast<int>(std::min<long long>(left, 1000))) < 0 && errno != EINTR) {
            return std::nullopt;
        }
        if (err_fd_ >= 0 && fds[1].revents) drain_stderr();
        if (fds[0].revents && !read_some(out_fd_, out_buffer_)) eof_ = true;
    }
}

void LineChannel::drain_stderr() {
    while (err_fd_ >= 0) {
        char buf[4096];
        const ssize_t n = ::read(err_fd_, buf, sizeof buf);
        if (n > 0) {
            err_buffer_.append(buf, static_cast<std::size_t>(n));
            continue;
        }
        if (n == 0) close_fd(err_fd_);
        break;
    }
}

bool LineChannel::alive() {
    if (pid_ < 0) return false;
    // A closed stdout makes the child unusable even if it has not exited yet.
    if (eof_) {
        drain_stderr();
        terminate();
        return false;
    }
    int status = 0;
    if (::waitpid(pid_, &status, WNOHANG) == pid_) {
        pid_ = -1;
        return false;
    }
    return true;
}

void LineChannel::terminate() {
    close_fd(in_fd_);
    if (pid_ > 0) {
        kill_group(pid_);
        int status = 0;
        while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
        }
        pid_ = -1;
    }
    close_fd(out_fd_);
    close_fd(err_fd_);
}

std::string LineChannel::diagnostics() {
    drain_stderr();
    return err_buffer_;
}

}  // namespace layerfix
