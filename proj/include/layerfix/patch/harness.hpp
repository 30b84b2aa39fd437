#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "layerfix/core/json.hpp"
#include "layerfix/core/types.hpp"
#include "layerfix/patch/sandbox.hpp"

namespace layerfix::patch {

enum class Verdict { plausible, failing, not_extractable, splice_error, sandbox_error };

std::string_view to_string(Verdict verdict) noexcept;
std::optional<Verdict> parse_verdict(std::string_view text) noexcept;

struct PatchAttempt {
    std::string bug_id;
    Layer layer = Layer::bug;
    int sample_index = 0;
    std::optional<std::string> extracted_code;
    bool splice_ok = false;
    Verdict verdict = Verdict::not_extractable;
    std::vector<TestResult> test_results;
    std::string prompt_hash;
    std::string diagnostics;

    bool operator==(const PatchAttempt&) const = default;
};

void to_json(Json& j, const PatchAttempt& attempt);
void from_json(const Json& j, PatchAttempt& attempt);

/// Content of the longest ``` fenced block, fence lines removed. Ties go to
/// the earlier block. An unterminated final fence runs to the end of the
/// response. nullopt when there is no fence at all.
std::optional<std::string> extract_code_block(std::string_view response);

/// Replaces lines [start_line, end_line] of `file_source` with
/// `new_function`, keeping every other byte. A newline is appended to the
/// replacement when it lacks one and the replaced lines had one.
/// Error{validation} if the span is outside the file or the text is empty.
std::string splice_patch(std::string_view file_source, const FunctionSpan& span, std::string_view new_function);

/// Test files containing the failing tests ("tests/test_a.py::T::t" ->
/// "tests/test_a.py"; dotted ids map to their module path), or {"."} for
/// the full suite.
std::vector<std::string> regression_selection(const std::vector<std::string>& failing_tests, bool full_suite);

struct ValidationConfig {
    double timeout_s = 300.0;
    bool full_suite = false;
};

/// Runs candidates for one bug against the sandbox. The unpatched baseline
/// run happens once and determines which regression tests must keep
/// passing. Thread-safe.
class Validator {
public:
    Validator(Sandbox& sandbox, BugInstance bug, std::string workdir, ValidationConfig config = {});

    /// Fills extracted_code, splice_ok, verdict, test_results and
    /// diagnostics of a fresh attempt for `response`.
    PatchAttempt validate(std::string_view response, Layer layer, int sample_index);

    /// Verdict for already extracted code.
    void validate_code(PatchAttempt& attempt, const std::string& code);

    /// Baseline results on the unpatched checkout. Error{sandbox} if the
    /// sandbox cannot run them.
    const std::vector<TestResult>& baseline();

private:
    Sandbox& sandbox_;
    BugInstance bug_;
    std::string workdir_;
    ValidationConfig config_;
    std::mutex mutex_;
    std::optional<std::vector<TestResult>> baseline_;
};

/// plausible iff every failing test passes and every test that passed in
/// `baseline` still passes. Tests missing from `results` count as failed.
Verdict classify(const std::vector<TestResult>& results, const std::vector<std::string>& failing_tests,
                 const std::vector<TestResult>& baseline);

}  // namespace layerfix::patch
