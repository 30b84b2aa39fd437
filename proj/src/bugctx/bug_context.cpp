#include "layerfix/bugctx/bug_context.hpp"

#include <spdlog/spdlog.h>

#include "layerfix/core/error.hpp"
#include "layerfix/pysrc/tokenizer.hpp"

namespace layerfix::bugctx {
namespace {

std::vector<std::string> split(std::string_view text, std::string_view sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        parts.emplace_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + sep.size();
    }
    return parts;
}

std::string join(const std::vector<std::string>& parts, std::size_t first, std::size_t last, char sep) {
    std::string out;
    for (std::size_t i = first; i < last; ++i) {
        if (i > first) out += sep;
        out += parts[i];
    }
    return out;
}

std::optional<std::string> definition_in(repo::SourceTree& tree, const std::string& file, const std::string& qualified) {
    if (!tree.exists(file)) return std::nullopt;
    for (const auto& def : tree.scan(file).definitions) {
        if (def.qualified_name == qualified) return pysrc::slice_lines(tree.source(file), def.start_line, def.end_line);
    }
    return std::nullopt;
}

}  // namespace

std::string extract_buggy_function(const std::filesystem::path& checkout, const FunctionSpan& span) {
    validate(span);
    const auto path = checkout / span.file_path;
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) throw Error(ErrorKind::not_found, "buggy file not found: " + path.string());
    const std::string source = read_file(path);
    const auto count = static_cast<int>(pysrc::split_lines(source).size());
    if (span.end_line > count) {
        throw Error(ErrorKind::validation, "span " + std::to_string(span.start_line) + "-" + std::to_string(span.end_line) +
                                               " out of range for " + span.file_path + " (" + std::to_string(count) +
                                               " lines)");
    }
    return pysrc::slice_lines(source, span.start_line, span.end_line);
}

std::optional<std::string> find_test_source(repo::SourceTree& tree, const std::string& test_id) {
    std::string id = test_id;
    if (const auto bracket = id.find('['); bracket != std::string::npos) id.resize(bracket);
    if (const auto sep = id.find("::"); sep != std::string::npos) {
        const std::string file = id.substr(0, sep);
        auto parts = split(std::string_view(id).substr(sep + 2), "::");
        return definition_in(tree, file, join(parts, 0, parts.size(), '.'));
    }
    const auto parts = split(id, ".");
    for (std::size_t cut = parts.size() - 1; cut >= 1; --cut) {
        if (const auto file = tree.module_file(join(parts, 0, cut, '.'))) {
            return definition_in(tree, *file, join(parts, cut, parts.size(), '.'));
        }
    }
    return std::nullopt;
}

ErrorCapture capture_error_info(patch::Sandbox& sandbox, const std::filesystem::path& checkout,
                                const std::vector<std::string>& failing_tests, double timeout_s) {
    patch::SandboxJob job;
    job.workdir = checkout.string();
    job.tests = failing_tests;
    job.timeout_s = timeout_s;
    const auto response = sandbox.run(job);
    if (response.status == "crash") throw Error(ErrorKind::transport, "sandbox unreachable: " + response.error);
    if (!response.ok()) throw Error(ErrorKind::sandbox, "sandbox " + response.status + ": " + response.error);

    ErrorCapture capture;
    for (const auto& id : failing_tests) {
        const patch::TestResult* result = nullptr;
        for (const auto& r : response.tests) {
            if (r.id == id) result = &r;
        }
        if (result == nullptr) continue;
        if (result->passed) {
            capture.unexpectedly_passing.push_back(id);
            continue;
        }
        if (!capture.text.empty()) capture.text += "\n";
        capture.text += id + "\n" + result->failure_text;
        if (capture.text.back() != '\n') capture.text += '\n';
    }
    return capture;
}

std::vector<ValueCase> select_value_cases(const std::vector<ValueCase>& cases, int limit) {
    if (limit < 0) throw Error(ErrorKind::domain, "value case limit must be non-negative");
    const auto n = std::min(cases.size(), static_cast<std::size_t>(limit));
    return {cases.begin(), cases.begin() + static_cast<std::ptrdiff_t>(n)};
}

BugContext assemble_bug_context(const BugInstance& bug, const std::filesystem::path& checkout, patch::Sandbox* sandbox,
                                const BugContextOptions& options) {
    BugContext ctx;
    ctx.buggy_source = extract_buggy_function(checkout, bug.span);

    repo::SourceTree tree(checkout, options.source_roots);
    for (const auto& stmt : tree.scan(bug.span.file_path).imports) ctx.imports.push_back(stmt.text);
    for (const auto& id : bug.failing_tests) {
        if (auto source = find_test_source(tree, id)) {
            ctx.failing_test_sources.push_back({id, std::move(*source)});
        } else {
            spdlog::warn("{}: test source not found for {}", bug.bug_id, id);
        }
    }

    if (bug.error_info) {
        ctx.error_info = bug.error_info;
    } else if (sandbox != nullptr) {
        auto capture = capture_error_info(*sandbox, checkout, bug.failing_tests, options.sandbox_timeout_s);
        for (const auto& id : capture.unexpectedly_passing) {
            spdlog::warn("{}: failing test {} passes on the buggy checkout", bug.bug_id, id);
        }
        if (!capture.text.empty()) ctx.error_info = std::move(capture.text);
    }

    ctx.runtime_cases = select_value_cases(bug.runtime_cases);
    ctx.angelic_cases = select_value_cases(bug.angelic_cases);
    ctx.issue_title = bug.issue_title;
    ctx.issue_body = bug.issue_body;
    return ctx;
}

void to_json(Json& j, const BugContext& ctx) {
    Json tests = Json::array();
    for (const auto& t : ctx.failing_test_sources) tests.push_back({{"test_id", t.test_id}, {"source", t.source}});
    j = Json{{"buggy_source", ctx.buggy_source},
             {"failing_test_sources", std::move(tests)},
             {"error_info", optional_to_json(ctx.error_info)},
             {"runtime_cases", ctx.runtime_cases},
             {"angelic_cases", ctx.angelic_cases},
             {"issue_title", optional_to_json(ctx.issue_title)},
             {"issue_body", optional_to_json(ctx.issue_body)},
             {"imports", ctx.imports}};
}

void from_json(const Json& j, BugContext& ctx) {
    auto optional_text = [&](const char* key) -> std::optional<std::string> {
        const auto it = j.find(key);
        if (it == j.end() || it->is_null()) return std::nullopt;
        return it->get<std::string>();
    };
    j.at("buggy_source").get_to(ctx.buggy_source);
    ctx.failing_test_sources.clear();
    for (const auto& t : j.at("failing_test_sources")) {
        ctx.failing_test_sources.push_back({t.at("test_id").get<std::string>(), t.at("source").get<std::string>()});
    }
    ctx.error_info = optional_text("error_info");
    j.at("runtime_cases").get_to(ctx.runtime_cases);
    j.at("angelic_cases").get_to(ctx.angelic_cases);
    ctx.issue_title = optional_text("issue_title");
    ctx.issue_body = optional_text("issue_body");
    j.at("imports").get_to(ctx.imports);
}

}  // namespace layerfix::bugctx
