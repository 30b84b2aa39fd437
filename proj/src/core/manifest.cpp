#include "layerfix/core/manifest.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "layerfix/core/error.hpp"

namespace layerfix {

namespace {

[[noreturn]] void field_error(std::string_view bug_id, std::string_view field, std::string_view reason) {
    throw Error(ErrorKind::validation, std::string(bug_id.empty() ? "<no bug_id>" : bug_id) + ": " +
                                           std::string(field) + ": " + std::string(reason));
}

std::string required_string(const Json& record, std::string_view bug_id, const char* field) {
    const auto it = record.find(field);
    if (it == record.end() || !it->is_string()) field_error(bug_id, field, "missing or not a string");
    return it->get<std::string>();
}

std::optional<std::string> optional_string(const Json& record, std::string_view bug_id, const char* field) {
    const auto it = record.find(field);
    if (it == record.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) field_error(bug_id, field, "not a string or null");
    return it->get<std::string>();
}

std::vector<ValueCase> cases(const Json& record, std::string_view bug_id, const char* field) {
    const auto it = record.find(field);
    if (it == record.end() || it->is_null()) return {};
    try {
        return it->get<std::vector<ValueCase>>();
    } catch (const std::exception& e) {
        field_error(bug_id, field, e.what());
    }
}

void check_header(const Json& header) {
    if (!header.is_object() || header.value("format", std::string{}) != kManifestFormat) {
        throw Error(ErrorKind::parse, "manifest: first line must be a header with format \"" +
                                          std::string(kManifestFormat) + "\"");
    }
    if (header.value("version", 0) != kManifestVersion) {
        throw Error(ErrorKind::parse, "manifest: unsupported version");
    }
}

std::vector<BugInstance> finish(std::vector<BugInstance> bugs) {
    std::sort(bugs.begin(), bugs.end(),
              [](const BugInstance& a, const BugInstance& b) { return a.bug_id < b.bug_id; });
    for (std::size_t i = 1; i < bugs.size(); ++i) {
        if (bugs[i].bug_id == bugs[i - 1].bug_id) field_error(bugs[i].bug_id, "bug_id", "duplicate");
    }
    return bugs;
}

}  // namespace

BugInstance bug_from_json(const Json& record) {
    if (!record.is_object()) throw Error(ErrorKind::validation, "manifest record is not an object");
    BugInstance bug;
    bug.bug_id = record.contains("bug_id") && record["bug_id"].is_string() ? record["bug_id"].get<std::string>()
                                                                          : std::string{};
    if (bug.bug_id.empty()) field_error("", "bug_id", "missing");
    bug.project = required_string(record, bug.bug_id, "project");
    bug.buggy_commit = required_string(record, bug.bug_id, "buggy_commit");
    bug.fix_commit = required_string(record, bug.bug_id, "fix_commit");

    const auto span = record.find("span");
    if (span == record.end() || !span->is_object()) field_error(bug.bug_id, "span", "missing");
    try {
        bug.span = span->get<FunctionSpan>();
    } catch (const Json::exception& e) {
        field_error(bug.bug_id, "span", e.what());
    }

    const auto tests = record.find("failing_tests");
    if (tests == record.end() || !tests->is_array()) field_error(bug.bug_id, "failing_tests", "missing");
    for (const auto& test : *tests) {
        if (!test.is_string()) field_error(bug.bug_id, "failing_tests", "non-string entry");
        bug.failing_tests.push_back(test.get<std::string>());
    }

    bug.error_info = optional_string(record, bug.bug_id, "error_info");
    bug.runtime_cases = cases(record, bug.bug_id, "runtime_cases");
    bug.angelic_cases = cases(record, bug.bug_id, "angelic_cases");
    bug.issue_title = optional_string(record, bug.bug_id, "issue_title");
    bug.issue_body = optional_string(record, bug.bug_id, "issue_body");

    const auto label = required_string(record, bug.bug_id, "bug_type");
    const auto type = parse_bug_type(label);
    if (!type) field_error(bug.bug_id, "bug_type", "unknown label '" + label + "'");
    bug.bug_type = *type;

    validate(bug);
    return bug;
}

std::vector<BugInstance> parse_manifest(std::string_view text) {
    std::vector<BugInstance> bugs;
    std::istringstream in{std::string(text)};
    std::string line;
    bool header_seen = false;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json record;
        try {
            record = Json::parse(line);
        } catch (const Json::parse_error& e) {
            throw Error(ErrorKind::parse, "manifest line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!header_seen) {
            check_header(record);
            header_seen = true;
            continue;
        }
        bugs.push_back(bug_from_json(record));
    }
    if (!header_seen) throw Error(ErrorKind::parse, "manifest: missing header line");
    return finish(std::move(bugs));
}

std::vector<BugInstance> load_manifest(const std::filesystem::path& path) {
    return parse_manifest(read_file(path));
}

std::string serialize_manifest(std::span<const BugInstance> bugs) {
    std::string out = Json{{"format", kManifestFormat}, {"version", kManifestVersion}}.dump();
    out += '\n';
    for (const auto& bug : bugs) {
        out += Json(bug).dump();
        out += '\n';
    }
    return out;
}

void save_manifest(const std::filesystem::path& path, std::span<const BugInstance> bugs) {
    write_file(path, serialize_manifest(bugs));
}

std::map<BugType, int> taxonomy_counts(std::span<const BugInstance> bugs) {
    std::map<BugType, int> counts;
    for (const auto type : kAllBugTypes) counts[type] = 0;
    for (const auto& bug : bugs) ++counts[bug.bug_type];
    return counts;
}

}  // namespace layerfix
