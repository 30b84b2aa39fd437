#include "layerfix/patch/harness.hpp"

#include <algorithm>
#include <cctype>

#include "layerfix/core/error.hpp"
#include "layerfix/pysrc/tokenizer.hpp"

namespace layerfix::patch {
namespace {

bool is_fence(std::string_view line) {
    const auto start = line.find_first_not_of(" \t");
    return start != std::string_view::npos && line.substr(start, 3) == "```";
}

}  // namespace

std::string_view to_string(Verdict verdict) noexcept {
    switch (verdict) {
        case Verdict::plausible: return "plausible";
        case Verdict::failing: return "failing";
        case Verdict::not_extractable: return "not_extractable";
        case Verdict::splice_error: return "splice_error";
        case Verdict::sandbox_error: return "sandbox_error";
    }
    return "sandbox_error";
}

std::optional<Verdict> parse_verdict(std::string_view text) noexcept {
    for (auto v : {Verdict::plausible, Verdict::failing, Verdict::not_extractable, Verdict::splice_error,
                   Verdict::sandbox_error}) {
        if (to_string(v) == text) return v;
    }
    return std::nullopt;
}

void to_json(Json& j, const PatchAttempt& a) {
    Json tests = Json::array();
    for (const auto& t : a.test_results) tests.push_back({{"id", t.id}, {"passed", t.passed}, {"failure_text", t.failure_text}});
    j = Json{{"bug_id", a.bug_id},
             {"layer", to_string(a.layer)},
             {"sample_index", a.sample_index},
             {"extracted_code", optional_to_json(a.extracted_code)},
             {"splice_ok", a.splice_ok},
             {"verdict", to_string(a.verdict)},
             {"test_results", std::move(tests)},
             {"prompt_hash", a.prompt_hash},
             {"diagnostics", a.diagnostics}};
}

void from_json(const Json& j, PatchAttempt& a) {
    j.at("bug_id").get_to(a.bug_id);
    const auto layer = parse_layer(j.at("layer").get<std::string>());
    const auto verdict = parse_verdict(j.at("verdict").get<std::string>());
    if (!layer || !verdict) throw Error(ErrorKind::parse, "attempt " + a.bug_id + ": bad layer or verdict");
    a.layer = *layer;
    a.verdict = *verdict;
    j.at("sample_index").get_to(a.sample_index);
    a.extracted_code.reset();
    if (const auto it = j.find("extracted_code"); it != j.end() && !it->is_null()) a.extracted_code = it->get<std::string>();
    a.splice_ok = j.value("splice_ok", false);
    a.test_results.clear();
    for (const auto& t : j.value("test_results", Json::array())) {
        a.test_results.push_back(TestResult{t.at("id").get<std::string>(), t.at("passed").get<bool>(),
                                            t.value("failure_text", std::string{})});
    }
    a.prompt_hash = j.value("prompt_hash", std::string{});
    a.diagnostics = j.value("diagnostics", std::string{});
}

std::optional<std::string> extract_code_block(std::string_view response) {
    const auto lines = pysrc::split_lines(response);
    std::optional<std::string> best;
    std::optional<std::string> current;
    for (const auto line : lines) {
        if (is_fence(line)) {
            if (current) {
                if (!best || current->size() > best->size()) best = std::move(current);
                current.reset();
            } else {
                current.emplace();
            }
            continue;
        }
        if (current) current->append(line);
    }
    if (current && (!best || current->size() > best->size())) best = std::move(current);
    return best;
}

std::string splice_patch(std::string_view file_source, const FunctionSpan& span, std::string_view new_function) {
    if (new_function.empty()) throw Error(ErrorKind::validation, "splice: replacement text is empty");
    const auto lines = pysrc::split_lines(file_source);
    if (span.start_line < 1 || span.end_line < span.start_line || span.end_line > static_cast<int>(lines.size())) {
        throw Error(ErrorKind::validation, "splice: span " + std::to_string(span.start_line) + "-" +
                                               std::to_string(span.end_line) + " outside " + span.file_path + " (" +
                                               std::to_string(lines.size()) + " lines)");
    }
    std::string out;
    out.reserve(file_source.size() + new_function.size());
    for (int i = 0; i < span.start_line - 1; ++i) out.append(lines[static_cast<std::size_t>(i)]);
    out.append(new_function);
    const std::string_view last = lines[static_cast<std::size_t>(span.end_line - 1)];
    if (new_function.back() != '\n' && !last.empty() && last.back() == '\n') {
        out.append(last.size() >= 2 && last[last.size() - 2] == '\r' ? "\r\n" : "\n");
    }
    for (std::size_t i = static_cast<std::size_t>(span.end_line); i < lines.size(); ++i) out.append(lines[i]);
    return out;
}

std::vector<std::string> regression_selection(const std::vector<std::string>& failing_tests, bool full_suite) {
    if (full_suite) return {"."};
    std::vector<std::string> files;
    for (const auto& id : failing_tests) {
        std::string file;
        if (const auto sep = id.find("::"); sep != std::string::npos) {
            file = id.substr(0, sep);
        } else if (id.ends_with(".py")) {
            file = id;
        } else {
            // dotted unittest id "pkg.tests.test_mod.TestCase.test_x": module is the prefix up to the first
            // component starting with an upper-case letter or "test_" method
            std::vector<std::string> parts;
            std::size_t start = 0;
            while (start <= id.size()) {
                const auto dot = id.find('.', start);
                parts.push_back(id.substr(start, dot == std::string::npos ? std::string::npos : dot - start));
                if (dot == std::string::npos) break;
                start = dot + 1;
            }
            std::size_t keep = parts.size();
            for (std::size_t i = 0; i < parts.size(); ++i) {
                if (!parts[i].empty() && std::isupper(static_cast<unsigned char>(parts[i][0]))) {
                    keep = i;
                    break;
                }
            }
            if (keep == parts.size() && keep > 1) keep -= 1;  // drop the trailing test function
            for (std::size_t i = 0; i < keep; ++i) file += (i ? "/" : "") + parts[i];
            file += ".py";
        }
        if (std::find(files.begin(), files.end(), file) == files.end()) files.push_back(file);
    }
    return files;
}

Verdict classify(const std::vector<TestResult>& results, const std::vector<std::string>& failing_tests,
                 const std::vector<TestResult>& baseline) {
    auto passed = [&](const std::string& id) {
        return std::any_of(results.begin(), results.end(), [&](const TestResult& r) { return r.id == id && r.passed; });
    };
    for (const auto& id : failing_tests) {
        if (!passed(id)) return Verdict::failing;
    }
    for (const auto& b : baseline) {
        if (b.passed && !passed(b.id)) return Verdict::failing;
    }
    return Verdict::plausible;
}

Validator::Validator(Sandbox& sandbox, BugInstance bug, std::string workdir, ValidationConfig config)
    : sandbox_(sandbox), bug_(std::move(bug)), workdir_(std::move(workdir)), config_(config) {}

const std::vector<TestResult>& Validator::baseline() {
    std::lock_guard lock(mutex_);
    if (baseline_) return *baseline_;
    SandboxJob job;
    job.workdir = workdir_;
    job.tests = bug_.failing_tests;
    for (auto& selector : regression_selection(bug_.failing_tests, config_.full_suite)) job.tests.push_back(std::move(selector));
    job.timeout_s = config_.timeout_s;
    const auto response = sandbox_.run(job);
    if (!response.ok()) {
        throw Error(ErrorKind::sandbox, bug_.bug_id + ": baseline run " + response.status + ": " + response.error);
    }
    baseline_ = response.tests;
    return *baseline_;
}

void Validator::validate_code(PatchAttempt& attempt, const std::string& code) {
    attempt.extracted_code = code;
    const auto& base = baseline();
    try {
        std::string file_source;
        try {
            file_source = read_file(std::filesystem::path(workdir_) / bug_.span.file_path);
        } catch (const Error& e) {
            throw Error(ErrorKind::validation, e.what());
        }
        (void)splice_patch(file_source, bug_.span, code);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::validation) throw;
        attempt.splice_ok = false;
        attempt.verdict = Verdict::splice_error;
        attempt.diagnostics = e.what();
        return;
    }
    attempt.splice_ok = true;

    SandboxJob job;
    job.workdir = workdir_;
    job.patch = PatchSpec{bug_.span.file_path, bug_.span.start_line, bug_.span.end_line, code};
    job.tests = bug_.failing_tests;
    for (auto& selector : regression_selection(bug_.failing_tests, config_.full_suite)) job.tests.push_back(std::move(selector));
    job.timeout_s = config_.timeout_s;
    const auto response = sandbox_.run(job);
    attempt.test_results = response.tests;
    if (response.status == "splice_error") {
        attempt.splice_ok = false;
        attempt.verdict = Verdict::splice_error;
        attempt.diagnostics = response.error;
        return;
    }
    if (!response.ok()) {
        attempt.verdict = Verdict::sandbox_error;
        attempt.diagnostics = response.status + ": " + response.error;
        return;
    }
    attempt.verdict = classify(response.tests, bug_.failing_tests, base);
}

PatchAttempt Validator::validate(std::string_view response, Layer layer, int sample_index) {
    PatchAttempt attempt;
    attempt.bug_id = bug_.bug_id;
    attempt.layer = layer;
    attempt.sample_index = sample_index;
    const auto code = extract_code_block(response);
    if (!code || code->find_first_not_of(" \t\r\n") == std::string::npos) {
        attempt.verdict = Verdict::not_extractable;
        return attempt;
    }
    validate_code(attempt, *code);
    return attempt;
}

}  // namespace layerfix::patch
