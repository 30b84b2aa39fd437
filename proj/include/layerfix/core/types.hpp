#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace layerfix {

/// Bug categories of the Catolino taxonomy. All nine are accepted on input
/// even though only six occur in the reference dataset.
enum class BugType {
    program_anomaly,
    network,
    configuration,
    gui_related,
    performance,
    permission_deprecation,
    database,
    security,
    test_code,
};

inline constexpr std::array<BugType, 9> kAllBugTypes = {
    BugType::program_anomaly, BugType::network,     BugType::configuration,
    BugType::gui_related,     BugType::performance, BugType::permission_deprecation,
    BugType::database,        BugType::security,    BugType::test_code,
};

/// Manifest label, e.g. "ProgramAnomaly".
std::string_view to_string(BugType type) noexcept;
std::optional<BugType> parse_bug_type(std::string_view label) noexcept;

struct FunctionSpan {
    std::string file_path;       // repo-relative
    std::string qualified_name;  // dotted, e.g. "Scheduler.add_task"
    int start_line = 0;          // 1-based, inclusive
    int end_line = 0;            // 1-based, inclusive

    bool operator==(const FunctionSpan&) const = default;
};

/// Throws Error{validation} naming the violated FunctionSpan invariant.
void validate(const FunctionSpan& span);

enum class ValueKind { runtime, angelic };

std::string_view to_string(ValueKind kind) noexcept;

struct VariableValue {
    std::string name;
    std::string value;  // rendered text
    std::string type_name;

    bool operator==(const VariableValue&) const = default;
};

struct ValueCase {
    ValueKind kind = ValueKind::runtime;
    std::vector<VariableValue> variables;

    bool operator==(const ValueCase&) const = default;
};

struct BugInstance {
    std::string bug_id;
    std::string project;
    std::string buggy_commit;
    std::string fix_commit;
    FunctionSpan span;
    std::vector<std::string> failing_tests;
    std::optional<std::string> error_info;
    std::vector<ValueCase> runtime_cases;
    std::vector<ValueCase> angelic_cases;
    std::optional<std::string> issue_title;
    std::optional<std::string> issue_body;
    BugType bug_type = BugType::program_anomaly;

    bool operator==(const BugInstance&) const = default;
};

/// Throws Error{validation} with "<bug_id>: <field>: <reason>".
void validate(const BugInstance& bug);

bool is_commit_hash(std::string_view text) noexcept;

enum class Layer { bug = 1, repository = 2, project = 3 };

inline constexpr std::array<Layer, 3> kAllLayers = {Layer::bug, Layer::repository, Layer::project};

/// "L1", "L2", "L3".
std::string_view to_string(Layer layer) noexcept;
std::optional<Layer> parse_layer(std::string_view text) noexcept;
inline int layer_index(Layer layer) noexcept { return static_cast<int>(layer) - 1; }

struct RepairOutcome {
    std::string bug_id;
    Layer layer = Layer::bug;
    int n = 0;
    int c = 0;
    std::vector<std::string> attempt_refs;  // "<bug_id>/<layer>/<sample>"

    bool operator==(const RepairOutcome&) const = default;
};

void validate(const RepairOutcome& outcome);

std::string attempt_ref(std::string_view bug_id, Layer layer, int sample_index);

}  // namespace layerfix
