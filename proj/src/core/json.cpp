#include "layerfix/core/json.hpp"

#include <fstream>
#include <sstream>

#include "layerfix/core/error.hpp"

namespace layerfix {

void to_json(Json& j, const FunctionSpan& span) {
    j = Json{{"file_path", span.file_path},
             {"qualified_name", span.qualified_name},
             {"start_line", span.start_line},
             {"end_line", span.end_line}};
}

void from_json(const Json& j, FunctionSpan& span) {
    span.file_path = j.at("file_path").get<std::string>();
    span.qualified_name = j.at("qualified_name").get<std::string>();
    span.start_line = j.at("start_line").get<int>();
    span.end_line = j.at("end_line").get<int>();
}

void to_json(Json& j, const VariableValue& value) {
    j = Json{{"name", value.name}, {"value", value.value}, {"type_name", value.type_name}};
}

void from_json(const Json& j, VariableValue& value) {
    value.name = j.at("name").get<std::string>();
    value.value = j.at("value").get<std::string>();
    value.type_name = j.value("type_name", std::string{});
}

void to_json(Json& j, const ValueCase& value_case) {
    j = Json{{"kind", to_string(value_case.kind)}, {"variables", value_case.variables}};
}

void from_json(const Json& j, ValueCase& value_case) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "runtime") {
        value_case.kind = ValueKind::runtime;
    } else if (kind == "angelic") {
        value_case.kind = ValueKind::angelic;
    } else {
        throw Error(ErrorKind::parse, "unknown value case kind '" + kind + "'");
    }
    value_case.variables = j.at("variables").get<std::vector<VariableValue>>();
}

Json optional_to_json(const std::optional<std::string>& text) {
    return text ? Json(*text) : Json(nullptr);
}

void to_json(Json& j, const BugInstance& bug) {
    j = Json{{"bug_id", bug.bug_id},
             {"project", bug.project},
             {"buggy_commit", bug.buggy_commit},
             {"fix_commit", bug.fix_commit},
             {"span", bug.span},
             {"failing_tests", bug.failing_tests},
             {"error_info", optional_to_json(bug.error_info)},
             {"runtime_cases", bug.runtime_cases},
             {"angelic_cases", bug.angelic_cases},
             {"issue_title", optional_to_json(bug.issue_title)},
             {"issue_body", optional_to_json(bug.issue_body)},
             {"bug_type", to_string(bug.bug_type)}};
}

void to_json(Json& j, const RepairOutcome& outcome) {
    j = Json{{"bug_id", outcome.bug_id},
             {"layer", to_string(outcome.layer)},
             {"n", outcome.n},
             {"c", outcome.c},
             {"attempts", outcome.attempt_refs}};
}

void from_json(const Json& j, RepairOutcome& outcome) {
    outcome.bug_id = j.at("bug_id").get<std::string>();
    const auto layer = parse_layer(j.at("layer").get<std::string>());
    if (!layer) throw Error(ErrorKind::parse, outcome.bug_id + ": unknown layer");
    outcome.layer = *layer;
    outcome.n = j.at("n").get<int>();
    outcome.c = j.at("c").get<int>();
    outcome.attempt_refs = j.value("attempts", std::vector<std::string>{});
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot read " + path.string());
    std::vector<Json> records;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            records.push_back(Json::parse(line));
        } catch (const Json::parse_error& e) {
            throw Error(ErrorKind::parse,
                        path.string() + ":" + std::to_string(line_no) + ": invalid JSON: " + e.what());
        }
    }
    return records;
}

JsonlAppender::JsonlAppender(const std::filesystem::path& path) : path_(path.string()) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    out_.open(path, std::ios::app | std::ios::binary);
    if (!out_) throw Error(ErrorKind::io, "cannot open " + path_ + " for appending");
}

void JsonlAppender::append(const Json& record) {
    const std::string line = record.dump() + "\n";
    std::lock_guard lock(mutex_);
    out_ << line;
    out_.flush();
    if (!out_) throw Error(ErrorKind::io, "write to " + path_ + " failed");
}

}  // namespace layerfix
