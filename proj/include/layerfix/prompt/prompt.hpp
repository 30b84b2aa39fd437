#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "layerfix/bugctx/bug_context.hpp"
#include "layerfix/core/types.hpp"
#include "layerfix/project/project_context.hpp"
#include "layerfix/repo/repo_context.hpp"

namespace layerfix::prompt {

enum class SectionId {
    imports,
    issue_description,
    buggy_function,
    failing_tests,
    error_message,
    runtime_values,
    angelic_values,
    called_definitions,
    caller_usages,
    last_commit,
    doc_insights,
    issue_insights,
};

inline constexpr std::array<SectionId, 12> kCanonicalOrder = {
    SectionId::imports,        SectionId::issue_description, SectionId::buggy_function,     SectionId::failing_tests,
    SectionId::error_message,  SectionId::runtime_values,    SectionId::angelic_values,     SectionId::called_definitions,
    SectionId::caller_usages,  SectionId::last_commit,       SectionId::doc_insights,       SectionId::issue_insights,
};

/// Order in which over-budget prompts lose sections. The preamble and the
/// buggy function are never dropped.
inline constexpr std::array<SectionId, 11> kDropOrder = {
    SectionId::angelic_values,     SectionId::runtime_values, SectionId::issue_insights, SectionId::doc_insights,
    SectionId::last_commit,        SectionId::caller_usages,  SectionId::called_definitions,
    SectionId::error_message,      SectionId::failing_tests,  SectionId::issue_description,
    SectionId::imports,
};

inline constexpr std::size_t kDefaultTokenBudget = 120000;

std::string_view to_string(SectionId id) noexcept;
std::optional<SectionId> parse_section_id(std::string_view text) noexcept;

struct PromptTemplate {
    std::string preamble;
    std::map<SectionId, std::string> headers;
};

/// Reads the block file described in templates/prompt.txt. Error{config}
/// for unknown section ids or a missing preamble or header.
PromptTemplate parse_prompt_template(std::string_view text);
PromptTemplate load_prompt_template(const std::filesystem::path& path);

struct Section {
    SectionId id;
    std::string header;
    std::string body;

    bool operator==(const Section&) const = default;
};

struct Prompt {
    Layer layer = Layer::bug;
    std::string preamble;
    std::vector<Section> sections;  // canonical order

    /// Full text with '\n' line endings.
    [[nodiscard]] std::string render() const;
    [[nodiscard]] std::size_t estimated_tokens() const;
    [[nodiscard]] bool has(SectionId id) const;
    bool operator==(const Prompt&) const = default;
};

/// ceil(code points / 4).
std::size_t estimate_tokens(std::string_view text);

/// Assembles the cumulative prompt for `layer`. `repo` is required exactly
/// from layer 2 on and `project` exactly at layer 3 (Error{config}
/// otherwise). Sections without data are left out.
Prompt build_prompt(Layer layer, const PromptTemplate& tmpl, const bugctx::BugContext& bug,
                    const repo::RepoContext* repo, const project::ProjectContext* project);

/// Drops whole sections in kDropOrder until the estimate fits. Error{unbudgetable}
/// when the preamble and buggy function alone exceed `max_tokens`.
Prompt enforce_budget(Prompt prompt, std::size_t max_tokens);

}  // namespace layerfix::prompt
