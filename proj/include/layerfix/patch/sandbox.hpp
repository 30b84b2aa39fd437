#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "layerfix/core/json.hpp"
#include "layerfix/core/process.hpp"

namespace layerfix::patch {

/// Replacement of lines [start_line, end_line] of `file`. A null
/// `new_source` leaves the file untouched (used by trace jobs, which only
/// need the span to locate the function).
struct PatchSpec {
    std::string file;
    int start_line = 0;
    int end_line = 0;
    std::optional<std::string> new_source;

    bool operator==(const PatchSpec&) const = default;
};

enum class SandboxAction { run_tests, trace };

struct SandboxJob {
    SandboxAction action = SandboxAction::run_tests;
    std::string workdir;
    std::optional<PatchSpec> patch;  // absent: run the checkout as is
    std::vector<std::string> tests;  // test ids or selectors (a file path, or "." for the whole suite)
    double timeout_s = 300.0;

    bool operator==(const SandboxJob&) const = default;
};

struct TestResult {
    std::string id;
    bool passed = false;
    std::string failure_text;

    bool operator==(const TestResult&) const = default;
};

struct TracedVariable {
    std::string name;
    std::string value;
    std::string type;

    bool operator==(const TracedVariable&) const = default;
};

/// Status strings on the wire: "ok", "timeout", "splice_error", "crash",
/// "error" (malformed request).
struct SandboxResponse {
    std::string status = "ok";
    std::vector<TestResult> tests;
    double duration_s = 0.0;
    std::vector<TracedVariable> variables;  // trace jobs
    std::string note;                       // trace: e.g. function never reached
    std::string error;                      // diagnostics for non-ok statuses

    [[nodiscard]] bool ok() const noexcept { return status == "ok"; }
    bool operator==(const SandboxResponse&) const = default;
};

Json job_to_json(const SandboxJob& job);
/// Error{parse} naming the offending field.
SandboxJob job_from_json(const Json& j);
Json response_to_json(const SandboxResponse& response, SandboxAction action);
SandboxResponse response_from_json(const Json& j);

/// Executes sandbox jobs. Implementations may be called from several
/// threads; each job names its own working copy.
class Sandbox {
public:
    virtual ~Sandbox() = default;
    virtual SandboxResponse run(const SandboxJob& job) = 0;
};

/// Talks to an external agent over the line protocol. One agent process is
/// started per working copy with the checkout path appended to `command`;
/// jobs on the same working copy are serialized. A job that outlives its
/// timeout plus `grace` kills the agent and yields status "timeout"; an
/// agent that dies mid-job yields "crash".
class ProcessSandbox final : public Sandbox {
public:
    explicit ProcessSandbox(std::vector<std::string> command, std::chrono::seconds grace = std::chrono::seconds(10));
    ~ProcessSandbox() override;

    SandboxResponse run(const SandboxJob& job) override;

private:
    struct Agent;
    Agent& agent_for(const std::string& workdir);

    std::vector<std::string> command_;
    std::chrono::seconds grace_;
    std::mutex mutex_;
    std::vector<std::unique_ptr<Agent>> agents_;
};

/// Deterministic stand-in for tests. Jobs without a patch report the
/// configured initially-failing tests as failing and everything else as
/// passing. Patched jobs are classified by the first rule whose marker
/// occurs in the new source; unmatched patches behave like no patch.
class ScriptedSandbox final : public Sandbox {
public:
    enum class Outcome { pass_all, unchanged, regress, timeout, crash, splice_error };

    struct Rule {
        std::string marker;
        Outcome outcome = Outcome::pass_all;
    };

    ScriptedSandbox(std::vector<std::string> initially_failing, std::vector<Rule> rules,
                    std::vector<TracedVariable> trace_variables = {});

    SandboxResponse run(const SandboxJob& job) override;
    [[nodiscard]] int jobs_run() const noexcept { return jobs_.load(); }

private:
    std::vector<std::string> initially_failing_;
    std::vector<Rule> rules_;
    std::vector<TracedVariable> trace_variables_;
    std::atomic<int> jobs_{0};
};

/// Adapts a callable; handy for one-off behaviours in tests.
class FunctionSandbox final : public Sandbox {
public:
    explicit FunctionSandbox(std::function<SandboxResponse(const SandboxJob&)> fn) : fn_(std::move(fn)) {}
    SandboxResponse run(const SandboxJob& job) override { return fn_(job); }

private:
    std::function<SandboxResponse(const SandboxJob&)> fn_;
};

}  // namespace layerfix::patch
