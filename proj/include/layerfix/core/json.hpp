#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "layerfix/core/types.hpp"

namespace layerfix {

using Json = nlohmann::json;

void to_json(Json& j, const FunctionSpan& span);
void from_json(const Json& j, FunctionSpan& span);
void to_json(Json& j, const VariableValue& value);
void from_json(const Json& j, VariableValue& value);
void to_json(Json& j, const ValueCase& value_case);
void from_json(const Json& j, ValueCase& value_case);
void to_json(Json& j, const BugInstance& bug);
void to_json(Json& j, const RepairOutcome& outcome);
void from_json(const Json& j, RepairOutcome& outcome);

/// Optional text as JSON: absent -> null.
Json optional_to_json(const std::optional<std::string>& text);

/// Reads every non-empty line of a line-delimited JSON file. Parse failures
/// raise Error{parse} with the 1-based line number.
std::vector<Json> read_jsonl(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// Thread-safe append-only JSONL writer; every record is flushed before
/// append returns.
class JsonlAppender {
public:
    explicit JsonlAppender(const std::filesystem::path& path);
    void append(const Json& record);

private:
    std::mutex mutex_;
    std::ofstream out_;
    std::string path_;
};

}  // namespace layerfix
