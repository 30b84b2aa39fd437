#include "layerfix/prompt/prompt.hpp"

#include <algorithm>

#include "layerfix/core/error.hpp"
#include "layerfix/retrieval/chunk.hpp"

namespace layerfix::prompt {
namespace {

std::string normalize_newlines(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\r') {
            out.push_back('\n');
            if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        } else {
            out.push_back(text[i]);
        }
    }
    return out;
}

std::string trim(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = text.find_last_not_of(" \t\r\n");
    return std::string(text.substr(first, last - first + 1));
}

// Text ending in exactly one newline.
std::string with_newline(std::string_view text) {
    std::string out = normalize_newlines(text);
    while (!out.empty() && out.back() == '\n') out.pop_back();
    out.push_back('\n');
    return out;
}

std::string fenced(std::string_view language, std::string_view code) {
    return "```" + std::string(language) + "\n" + with_newline(code) + "```\n";
}

std::string render_cases(const std::vector<ValueCase>& cases) {
    std::string out;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        if (i) out += "\n";
        out += "Case " + std::to_string(i + 1) + ":\n";
        for (const auto& v : cases[i].variables) {
            out += "  " + v.name + " = " + v.value;
            if (!v.type_name.empty()) out += "  (" + v.type_name + ")";
            out += "\n";
        }
    }
    return out;
}

std::string render_definitions(const std::vector<repo::DefinitionSource>& defs) {
    std::string out;
    for (std::size_t i = 0; i < defs.size(); ++i) {
        if (i) out += "\n";
        out += "# " + defs[i].qualified_name + " (" + defs[i].file_path + ")\n" + fenced("python", defs[i].source);
    }
    return out;
}

// Extractive answers share one evidence text; it is listed once after the questions.
std::string render_insights(const project::Insights& insights) {
    std::string out;
    const auto& answers = insights.answers;
    const bool shared = !answers.empty() && std::all_of(answers.begin(), answers.end(), [&](const project::Answer& a) {
        return a.extractive && a.answer == answers.front().answer;
    });
    if (shared) {
        for (const auto& a : answers) out += "Q: " + a.question + "\n";
        return out + "\nEvidence:\n" + with_newline(answers.front().answer);
    }
    for (std::size_t i = 0; i < insights.answers.size(); ++i) {
        const auto& a = insights.answers[i];
        if (i) out += "\n";
        out += "Q: " + a.question + "\nA: " + with_newline(a.answer);
    }
    return out;
}

}  // namespace

std::string_view to_string(SectionId id) noexcept {
    switch (id) {
        case SectionId::imports: return "imports";
        case SectionId::issue_description: return "issue_description";
        case SectionId::buggy_function: return "buggy_function";
        case SectionId::failing_tests: return "failing_tests";
        case SectionId::error_message: return "error_message";
        case SectionId::runtime_values: return "runtime_values";
        case SectionId::angelic_values: return "angelic_values";
        case SectionId::called_definitions: return "called_definitions";
        case SectionId::caller_usages: return "caller_usages";
        case SectionId::last_commit: return "last_commit";
        case SectionId::doc_insights: return "doc_insights";
        case SectionId::issue_insights: return "issue_insights";
    }
    return "imports";
}

std::optional<SectionId> parse_section_id(std::string_view text) noexcept {
    for (auto id : kCanonicalOrder) {
        if (to_string(id) == text) return id;
    }
    return std::nullopt;
}

PromptTemplate parse_prompt_template(std::string_view text) {
    PromptTemplate tmpl;
    const std::string normalized = normalize_newlines(text);
    std::string_view rest = normalized;
    enum { none, preamble, section } block = none;
    SectionId current{};
    std::string body;
    bool have_preamble = false;

    auto finish = [&] {
        if (block == preamble) {
            tmpl.preamble = trim(body);
            have_preamble = true;
        } else if (block == section) {
            tmpl.headers[current] = trim(body);
        }
        body.clear();
    };
    while (!rest.empty()) {
        const auto nl = rest.find('\n');
        const std::string_view line = rest.substr(0, nl);
        rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
        if (line.starts_with("[") && line.ends_with("]")) {
            finish();
            const std::string_view tag = line.substr(1, line.size() - 2);
            if (tag == "preamble") {
                block = preamble;
            } else if (tag.starts_with("section ")) {
                const auto id = parse_section_id(tag.substr(8));
                if (!id) throw Error(ErrorKind::config, "prompt template: unknown section \"" + std::string(tag.substr(8)) + "\"");
                block = section;
                current = *id;
            } else {
                throw Error(ErrorKind::config, "prompt template: unknown block [" + std::string(tag) + "]");
            }
            continue;
        }
        if (block == none) continue;  // header comments
        body.append(line);
        body.push_back('\n');
    }
    finish();
    if (!have_preamble || tmpl.preamble.empty()) throw Error(ErrorKind::config, "prompt template: missing [preamble]");
    for (auto id : kCanonicalOrder) {
        if (!tmpl.headers.contains(id) || tmpl.headers[id].empty()) {
            throw Error(ErrorKind::config, "prompt template: missing header for section " + std::string(to_string(id)));
        }
    }
    return tmpl;
}

PromptTemplate load_prompt_template(const std::filesystem::path& path) { return parse_prompt_template(read_file(path)); }

std::size_t estimate_tokens(std::string_view text) { return (retrieval::code_point_count(text) + 3) / 4; }

std::string Prompt::render() const {
    std::string out = with_newline(preamble);
    for (const auto& s : sections) out += "\n## " + s.header + "\n\n" + with_newline(s.body);
    return out;
}

std::size_t Prompt::estimated_tokens() const { return estimate_tokens(render()); }

bool Prompt::has(SectionId id) const {
    return std::any_of(sections.begin(), sections.end(), [&](const Section& s) { return s.id == id; });
}

Prompt build_prompt(Layer layer, const PromptTemplate& tmpl, const bugctx::BugContext& bug,
                    const repo::RepoContext* repo, const project::ProjectContext* project) {
    const bool wants_repo = layer != Layer::bug;
    const bool wants_project = layer == Layer::project;
    if (wants_repo != (repo != nullptr)) {
        throw Error(ErrorKind::config, std::string("prompt ") + std::string(to_string(layer)) +
                                           (wants_repo ? ": repository context required" : ": unexpected repository context"));
    }
    if (wants_project != (project != nullptr)) {
        throw Error(ErrorKind::config, std::string("prompt ") + std::string(to_string(layer)) +
                                           (wants_project ? ": project context required" : ": unexpected project context"));
    }

    std::map<SectionId, std::string> bodies;
    if (!bug.imports.empty()) {
        std::string text;
        for (const auto& imp : bug.imports) text += with_newline(imp);
        bodies[SectionId::imports] = fenced("python", text);
    }
    if (bug.issue_title || bug.issue_body) {
        std::string text;
        if (bug.issue_title) text += "Title: " + with_newline(*bug.issue_title);
        if (bug.issue_title && bug.issue_body) text += "\n";
        if (bug.issue_body) text += with_newline(*bug.issue_body);
        bodies[SectionId::issue_description] = text;
    }
    bodies[SectionId::buggy_function] = fenced("python", bug.buggy_source);
    if (!bug.failing_test_sources.empty()) {
        std::string text;
        for (std::size_t i = 0; i < bug.failing_test_sources.size(); ++i) {
            if (i) text += "\n";
            text += "# " + bug.failing_test_sources[i].test_id + "\n" + fenced("python", bug.failing_test_sources[i].source);
        }
        bodies[SectionId::failing_tests] = text;
    }
    if (bug.error_info && !trim(*bug.error_info).empty()) bodies[SectionId::error_message] = fenced("", *bug.error_info);
    if (!bug.runtime_cases.empty()) bodies[SectionId::runtime_values] = render_cases(bug.runtime_cases);
    if (!bug.angelic_cases.empty()) bodies[SectionId::angelic_values] = render_cases(bug.angelic_cases);

    if (repo != nullptr) {
        if (!repo->dependencies.called_definitions.empty()) {
            bodies[SectionId::called_definitions] = render_definitions(repo->dependencies.called_definitions);
        }
        if (!repo->dependencies.caller_definitions.empty()) {
            bodies[SectionId::caller_usages] = render_definitions(repo->dependencies.caller_definitions);
        }
        if (repo->last_change) {
            const auto& c = *repo->last_change;
            bodies[SectionId::last_commit] = "Commit " + c.commit_hash + " (" + format_timestamp(c.author_date) + ")\n" +
                                             with_newline(c.message) + fenced("diff", c.function_diff);
        }
    }
    if (project != nullptr) {
        if (project->documentation_available && !project->doc_insights.answers.empty()) {
            bodies[SectionId::doc_insights] = render_insights(project->doc_insights);
        }
        if (project->issue_history_available && !project->issue_insights.answers.empty()) {
            bodies[SectionId::issue_insights] = render_insights(project->issue_insights);
        }
    }

    Prompt prompt;
    prompt.layer = layer;
    prompt.preamble = normalize_newlines(tmpl.preamble);
    for (auto id : kCanonicalOrder) {
        const auto it = bodies.find(id);
        if (it == bodies.end()) continue;
        prompt.sections.push_back(Section{id, tmpl.headers.at(id), std::move(it->second)});
    }
    return prompt;
}

Prompt enforce_budget(Prompt prompt, std::size_t max_tokens) {
    if (prompt.estimated_tokens() <= max_tokens) return prompt;
    Prompt mandatory = prompt;
    std::erase_if(mandatory.sections, [](const Section& s) { return s.id != SectionId::buggy_function; });
    if (mandatory.estimated_tokens() > max_tokens) {
        throw Error(ErrorKind::unbudgetable, "preamble and buggy function need " + std::to_string(mandatory.estimated_tokens()) +
                                                 " tokens, budget is " + std::to_string(max_tokens));
    }
    for (auto id : kDropOrder) {
        std::erase_if(prompt.sections, [&](const Section& s) { return s.id == id; });
        if (prompt.estimated_tokens() <= max_tokens) break;
    }
    return prompt;
}

}  // namespace layerfix::prompt
