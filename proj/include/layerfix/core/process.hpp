#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace layerfix {

struct ProcessOutput {
    int exit_status = -1;  // exit code, or 128 + signal
    std::string out;
    std::string err;
    bool timed_out = false;
};

/// Runs argv[0] (PATH lookup) to completion, feeding `input` on stdin.
/// The child is killed when `timeout` elapses. Error{io} if it cannot start.
ProcessOutput run_process(const std::vector<std::string>& argv, std::string_view input = {},
                          std::optional<std::chrono::milliseconds> timeout = std::nullopt,
                          const std::filesystem::path& cwd = {});

/// Long-lived child speaking a line protocol over stdin/stdout. Stderr is
/// collected for diagnostics. Not thread-safe; one conversation at a time.
class LineChannel {
public:
    explicit LineChannel(const std::vector<std::string>& argv, const std::filesystem::path& cwd = {});
    ~LineChannel();
    LineChannel(const LineChannel&) = delete;
    LineChannel& operator=(const LineChannel&) = delete;

    /// Writes `line` plus '\n'. Error{io} if the child has gone away.
    void send(std::string_view line);

    /// Next stdout line without its terminator; nullopt on timeout or EOF.
    std::optional<std::string> receive(std::chrono::milliseconds timeout);

    /// False once the child exited or closed its stdout.
    [[nodiscard]] bool alive();
    /// Kills the child and reaps it. Idempotent.
    void terminate();
    /// Stderr captured so far.
    std::string diagnostics();

private:
    void drain_stderr();

    int pid_ = -1;
    int in_fd_ = -1;
    int out_fd_ = -1;
    int err_fd_ = -1;
    std::string out_buffer_;
    std::string err_buffer_;
    bool eof_ = false;
};

}  // namespace layerfix
