#include "layerfix/core/types.hpp"

#include <algorithm>
#include <cctype>

#include "layerfix/core/error.hpp"

namespace layerfix {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::validation: return "validation";
        case ErrorKind::parse: return "parse";
        case ErrorKind::config: return "config";
        case ErrorKind::transport: return "transport";
        case ErrorKind::domain: return "domain";
        case ErrorKind::not_found: return "not_found";
        case ErrorKind::sandbox: return "sandbox";
        case ErrorKind::unbudgetable: return "unbudgetable";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

namespace {

constexpr std::array<std::string_view, 9> kBugTypeLabels = {
    "ProgramAnomaly", "Network",  "Configuration", "GuiRelated", "Performance",
    "PermissionDeprecation", "Database", "Security", "TestCode",
};

}  // namespace

std::string_view to_string(BugType type) noexcept {
    return kBugTypeLabels[static_cast<std::size_t>(type)];
}

std::optional<BugType> parse_bug_type(std::string_view label) noexcept {
    for (std::size_t i = 0; i < kBugTypeLabels.size(); ++i) {
        if (kBugTypeLabels[i] == label) return kAllBugTypes[i];
    }
    return std::nullopt;
}

std::string_view to_string(ValueKind kind) noexcept {
    return kind == ValueKind::runtime ? "runtime" : "angelic";
}

std::string_view to_string(Layer layer) noexcept {
    switch (layer) {
        case Layer::bug: return "L1";
        case Layer::repository: return "L2";
        case Layer::project: return "L3";
    }
    return "L?";
}

std::optional<Layer> parse_layer(std::string_view text) noexcept {
    if (text == "L1") return Layer::bug;
    if (text == "L2") return Layer::repository;
    if (text == "L3") return Layer::project;
    return std::nullopt;
}

bool is_commit_hash(std::string_view text) noexcept {
    return text.size() == 40 && std::all_of(text.begin(), text.end(), [](char ch) {
               return std::isdigit(static_cast<unsigned char>(ch)) || (ch >= 'a' && ch <= 'f');
           });
}

void validate(const FunctionSpan& span) {
    if (span.file_path.empty()) throw Error(ErrorKind::validation, "FunctionSpan: file_path is empty");
    if (span.start_line < 1) {
        throw Error(ErrorKind::validation,
                    "FunctionSpan: start_line " + std::to_string(span.start_line) + " < 1");
    }
    if (span.start_line > span.end_line) {
        throw Error(ErrorKind::validation, "FunctionSpan: start_line " + std::to_string(span.start_line) +
                                               " > end_line " + std::to_string(span.end_line));
    }
}

namespace {

[[noreturn]] void fail(const BugInstance& bug, std::string_view field, std::string_view reason) {
    throw Error(ErrorKind::validation,
                (bug.bug_id.empty() ? std::string("<no bug_id>") : bug.bug_id) + ": " + std::string(field) +
                    ": " + std::string(reason));
}

void validate_cases(const BugInstance& bug, const std::vector<ValueCase>& cases, ValueKind expected,
                    std::string_view field) {
    for (const auto& value_case : cases) {
        if (value_case.kind != expected) fail(bug, field, "case kind does not match list");
        if (value_case.variables.empty()) fail(bug, field, "case has no variables");
        for (const auto& var : value_case.variables) {
            if (var.name.empty()) fail(bug, field, "variable without a name");
            if (var.value.find('\0') != std::string::npos) fail(bug, field, "binary value");
        }
    }
}

}  // namespace

void validate(const BugInstance& bug) {
    if (bug.bug_id.empty()) fail(bug, "bug_id", "empty");
    if (bug.project.empty()) fail(bug, "project", "empty");
    if (!is_commit_hash(bug.buggy_commit)) fail(bug, "buggy_commit", "not a 40-hex commit hash");
    if (!is_commit_hash(bug.fix_commit)) fail(bug, "fix_commit", "not a 40-hex commit hash");
    if (bug.buggy_commit == bug.fix_commit) fail(bug, "fix_commit", "equals buggy_commit");
    try {
        validate(bug.span);
    } catch (const Error& e) {
        fail(bug, "span", e.what());
    }
    if (bug.failing_tests.empty()) fail(bug, "failing_tests", "empty");
    for (const auto& test : bug.failing_tests) {
        if (test.empty()) fail(bug, "failing_tests", "empty test id");
    }
    validate_cases(bug, bug.runtime_cases, ValueKind::runtime, "runtime_cases");
    validate_cases(bug, bug.angelic_cases, ValueKind::angelic, "angelic_cases");
}

void validate(const RepairOutcome& outcome) {
    if (outcome.n <= 0) {
        throw Error(ErrorKind::validation, outcome.bug_id + ": RepairOutcome n must be positive");
    }
    if (outcome.c < 0 || outcome.c > outcome.n) {
        throw Error(ErrorKind::validation, outcome.bug_id + ": RepairOutcome requires 0 <= c <= n");
    }
}

std::string attempt_ref(std::string_view bug_id, Layer layer, int sample_index) {
    return std::string(bug_id) + "/" + std::string(to_string(layer)) + "/" + std::to_string(sample_index);
}

}  // namespace layerfix
