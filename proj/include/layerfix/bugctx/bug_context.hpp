#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "layerfix/core/json.hpp"
#include "layerfix/core/types.hpp"
#include "layerfix/patch/sandbox.hpp"
#include "layerfix/repo/dependencies.hpp"

namespace layerfix::bugctx {

inline constexpr int kMaxValueCases = 3;

struct TestSource {
    std::string test_id;
    std::string source;

    bool operator==(const TestSource&) const = default;
};

/// Layer-1 knowledge for one bug.
struct BugContext {
    std::string buggy_source;
    std::vector<TestSource> failing_test_sources;
    std::optional<std::string> error_info;
    std::vector<ValueCase> runtime_cases;
    std::vector<ValueCase> angelic_cases;
    std::optional<std::string> issue_title;
    std::optional<std::string> issue_body;
    std::vector<std::string> imports;  // module-level import statements of the buggy file

    bool operator==(const BugContext&) const = default;
};

/// Lines [start_line, end_line] of the file, line endings preserved.
/// Error{not_found} for a missing file, Error{validation} for a span past
/// the end of the file.
std::string extract_buggy_function(const std::filesystem::path& checkout, const FunctionSpan& span);

/// Source of the test function named by `test_id`: "path.py::Class::test",
/// "path.py::test[param]" or dotted "pkg.test_mod.Class.test". nullopt when
/// the file or definition cannot be found.
std::optional<std::string> find_test_source(repo::SourceTree& tree, const std::string& test_id);

struct ErrorCapture {
    std::string text;  // per failing test: id line, then failure text
    std::vector<std::string> unexpectedly_passing;
};

/// Runs the failing tests on the unpatched checkout and concatenates their
/// failure output in `failing_tests` order. Error{transport} when the
/// sandbox cannot be reached, Error{sandbox} for other sandbox failures.
ErrorCapture capture_error_info(patch::Sandbox& sandbox, const std::filesystem::path& checkout,
                                const std::vector<std::string>& failing_tests, double timeout_s = 300.0);

/// The first min(limit, size) cases, order kept. Error{domain} if limit < 0.
std::vector<ValueCase> select_value_cases(const std::vector<ValueCase>& cases, int limit = kMaxValueCases);

struct BugContextOptions {
    std::vector<std::string> source_roots = {"src", "lib", ""};
    double sandbox_timeout_s = 300.0;
};

/// Composes the bug facts. Manifest error_info wins; live capture through
/// `sandbox` happens only when it is absent and a sandbox is given.
BugContext assemble_bug_context(const BugInstance& bug, const std::filesystem::path& checkout,
                                patch::Sandbox* sandbox, const BugContextOptions& options = {});

void to_json(Json& j, const BugContext& ctx);
void from_json(const Json& j, BugContext& ctx);

}  // namespace layerfix::bugctx
