#include "layerfix/patch/sandbox.hpp"

#include <algorithm>
#include <cmath>

#include "layerfix/core/error.hpp"

namespace layerfix::patch {
namespace {

template <class T>
T field(const Json& j, const char* name, const char* context) {
    const auto it = j.find(name);
    if (it == j.end()) throw Error(ErrorKind::parse, std::string(context) + ": missing field \"" + name + "\"");
    try {
        return it->get<T>();
    } catch (const Json::exception&) {
        throw Error(ErrorKind::parse, std::string(context) + ": field \"" + name + "\" has the wrong type");
    }
}

std::string_view action_name(SandboxAction action) {
    return action == SandboxAction::trace ? "trace" : "run_tests";
}

}  // namespace

Json job_to_json(const SandboxJob& job) {
    Json j{{"action", action_name(job.action)}, {"workdir", job.workdir}, {"tests", job.tests}, {"timeout_s", job.timeout_s}};
    if (job.patch) {
        j["patch"] = Json{{"file", job.patch->file},
                          {"start_line", job.patch->start_line},
                          {"end_line", job.patch->end_line},
                          {"new_source", optional_to_json(job.patch->new_source)}};
    } else {
        j["patch"] = nullptr;
    }
    return j;
}

SandboxJob job_from_json(const Json& j) {
    if (!j.is_object()) throw Error(ErrorKind::parse, "sandbox job: not an object");
    SandboxJob job;
    const auto action = field<std::string>(j, "action", "sandbox job");
    if (action == "run_tests") job.action = SandboxAction::run_tests;
    else if (action == "trace") job.action = SandboxAction::trace;
    else throw Error(ErrorKind::parse, "sandbox job: unknown action \"" + action + "\"");
    job.workdir = field<std::string>(j, "workdir", "sandbox job");
    job.tests = field<std::vector<std::string>>(j, "tests", "sandbox job");
    job.timeout_s = field<double>(j, "timeout_s", "sandbox job");
    if (const auto it = j.find("patch"); it != j.end() && !it->is_null()) {
        PatchSpec p;
        p.file = field<std::string>(*it, "file", "sandbox job patch");
        p.start_line = field<int>(*it, "start_line", "sandbox job patch");
        p.end_line = field<int>(*it, "end_line", "sandbox job patch");
        if (const auto src = it->find("new_source"); src != it->end() && !src->is_null()) {
            p.new_source = field<std::string>(*it, "new_source", "sandbox job patch");
        }
        job.patch = std::move(p);
    }
    return job;
}

Json response_to_json(const SandboxResponse& response, SandboxAction action) {
    Json j{{"status", response.status}};
    if (action == SandboxAction::trace) {
        Json vars = Json::array();
        for (const auto& v : response.variables) vars.push_back({{"name", v.name}, {"value", v.value}, {"type", v.type}});
        j["variables"] = std::move(vars);
        if (!response.note.empty()) j["note"] = response.note;
    } else {
        Json tests = Json::array();
        for (const auto& t : response.tests) {
            tests.push_back({{"id", t.id}, {"passed", t.passed}, {"failure_text", t.failure_text}});
        }
        j["tests"] = std::move(tests);
        j["duration_s"] = response.duration_s;
    }
    if (!response.error.empty()) j["error"] = response.error;
    return j;
}

SandboxResponse response_from_json(const Json& j) {
    if (!j.is_object()) throw Error(ErrorKind::parse, "sandbox response: not an object");
    SandboxResponse r;
    r.status = j.value("status", std::string("ok"));
    if (const auto it = j.find("tests"); it != j.end() && it->is_array()) {
        for (const auto& t : *it) {
            r.tests.push_back(TestResult{field<std::string>(t, "id", "sandbox test result"),
                                         field<bool>(t, "passed", "sandbox test result"),
                                         t.value("failure_text", std::string{})});
        }
    }
    if (const auto it = j.find("variables"); it != j.end() && it->is_array()) {
        for (const auto& v : *it) {
            r.variables.push_back(TracedVariable{field<std::string>(v, "name", "sandbox variable"),
                                                 field<std::string>(v, "value", "sandbox variable"),
                                                 v.value("type", std::string{})});
        }
    }
    r.duration_s = j.value("duration_s", 0.0);
    r.note = j.value("note", std::string{});
    r.error = j.value("error", std::string{});
    return r;
}

struct ProcessSandbox::Agent {
    std::string workdir;
    std::mutex mutex;
    std::unique_ptr<LineChannel> channel;
};

ProcessSandbox::ProcessSandbox(std::vector<std::string> command, std::chrono::seconds grace)
    : command_(std::move(command)), grace_(grace) {
    if (command_.empty()) throw Error(ErrorKind::config, "sandbox command is empty");
}

ProcessSandbox::~ProcessSandbox() = default;

ProcessSandbox::Agent& ProcessSandbox::agent_for(const std::string& workdir) {
    std::lock_guard lock(mutex_);
    for (auto& a : agents_) {
        if (a->workdir == workdir) return *a;
    }
    agents_.push_back(std::make_unique<Agent>());
    agents_.back()->workdir = workdir;
    return *agents_.back();
}

SandboxResponse ProcessSandbox::run(const SandboxJob& job) {
    Agent& agent = agent_for(job.workdir);
    std::lock_guard lock(agent.mutex);
    if (!agent.channel || !agent.channel->alive()) {
        auto argv = command_;
        argv.push_back(job.workdir);
        try {
            agent.channel = std::make_unique<LineChannel>(argv);
        } catch (const Error& e) {
            return SandboxResponse{"crash", {}, 0.0, {}, {}, e.what()};
        }
    }
    const auto budget = std::chrono::milliseconds(static_cast<long long>(std::ceil(job.timeout_s * 1000.0))) + grace_;
    try {
        agent.channel->send(job_to_json(job).dump());
    } catch (const Error& e) {
        const std::string diag = agent.channel->diagnostics();
        agent.channel.reset();
        return SandboxResponse{"crash", {}, 0.0, {}, {}, std::string(e.what()) + "\n" + diag};
    }
    const auto line = agent.channel->receive(budget);
    if (!line) {
        const bool alive = agent.channel->alive();
        const std::string diag = agent.channel->diagnostics();
        agent.channel.reset();
        if (alive) return SandboxResponse{"timeout", {}, job.timeout_s, {}, {}, "no response within budget\n" + diag};
        return SandboxResponse{"crash", {}, 0.0, {}, {}, "sandbox agent exited\n" + diag};
    }
    try {
        return response_from_json(Json::parse(*line));
    } catch (const std::exception& e) {
        return SandboxResponse{"crash", {}, 0.0, {}, {}, std::string("unreadable sandbox response: ") + e.what()};
    }
}

ScriptedSandbox::ScriptedSandbox(std::vector<std::string> initially_failing, std::vector<Rule> rules,
                                 std::vector<TracedVariable> trace_variables)
    : initially_failing_(std::move(initially_failing)), rules_(std::move(rules)),
      trace_variables_(std::move(trace_variables)) {}

SandboxResponse ScriptedSandbox::run(const SandboxJob& job) {
    ++jobs_;
    SandboxResponse response;
    if (job.action == SandboxAction::trace) {
        response.variables = trace_variables_;
        if (trace_variables_.empty()) response.note = "function not reached";
        return response;
    }
    Outcome outcome = Outcome::unchanged;
    if (job.patch && job.patch->new_source) {
        for (const auto& rule : rules_) {
            if (job.patch->new_source->find(rule.marker) != std::string::npos) {
                outcome = rule.outcome;
                break;
            }
        }
    }
    switch (outcome) {
        case Outcome::timeout: return SandboxResponse{"timeout", {}, job.timeout_s, {}, {}, "scripted timeout"};
        case Outcome::crash: return SandboxResponse{"crash", {}, 0.0, {}, {}, "scripted crash"};
        case Outcome::splice_error: return SandboxResponse{"splice_error", {}, 0.0, {}, {}, "scripted splice error"};
        default: break;
    }
    for (const auto& id : job.tests) {
        const bool target = std::find(initially_failing_.begin(), initially_failing_.end(), id) != initially_failing_.end();
        bool passed = !target;
        if (outcome == Outcome::pass_all) passed = true;
        if (outcome == Outcome::regress) passed = false;
        response.tests.push_back(TestResult{id, passed, passed ? "" : "AssertionError: scripted failure in " + id});
    }
    response.duration_s = 0.01;
    return response;
}

}  // namespace layerfix::patch
