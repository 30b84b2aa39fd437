#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "layerfix/core/json.hpp"
#include "layerfix/core/timestamp.hpp"
#include "layerfix/llm/client.hpp"
#include "layerfix/retrieval/chunk.hpp"
#include "layerfix/retrieval/embedding.hpp"
#include "layerfix/retrieval/vector_index.hpp"

namespace layerfix::project {

inline constexpr std::size_t kQuestionCount = 4;
inline constexpr std::size_t kDefaultTopK = 5;

/// Question templates; every occurrence of `placeholder` is replaced by the
/// buggy function's name.
struct QuestionSet {
    std::string placeholder = "{buggy_function}";
    std::array<std::string, kQuestionCount> documentation;
    std::array<std::string, kQuestionCount> issues;
};

/// Error{config} unless the file has exactly four questions per kind.
QuestionSet load_question_set(const std::filesystem::path& path);
std::string render_question(const QuestionSet& set, const std::string& question, const std::string& function_name);

struct Answer {
    std::string id;  // "q1".."q4"
    std::string question;
    std::string answer;
    std::vector<std::string> support;  // chunk or issue ids
    bool extractive = false;

    bool operator==(const Answer&) const = default;
};

struct Insights {
    std::vector<Answer> answers;  // exactly four, template order

    bool operator==(const Insights&) const = default;
};

struct IssueRecord {
    std::string issue_id;
    std::string title;
    std::string body;
    std::string discussion;
    std::vector<std::string> labels;
    std::string fix_patch;
    Timestamp resolved_date = 0;

    bool operator==(const IssueRecord&) const = default;
};

void to_json(Json& j, const IssueRecord& issue);
void from_json(const Json& j, IssueRecord& issue);
void to_json(Json& j, const Answer& answer);
void from_json(const Json& j, Answer& answer);
void to_json(Json& j, const Insights& insights);
void from_json(const Json& j, Insights& insights);

std::vector<IssueRecord> load_issues(const std::filesystem::path& jsonl);

/// Natural-language side of an issue: title, body, discussion and labels.
std::string issue_text(const IssueRecord& issue);

// ---- documentation -------------------------------------------------------

using DocIndex = retrieval::VectorIndex<retrieval::Chunk>;

/// Chunks every .md, .rst, .txt and .html file under `docs_dir` (sorted by
/// path; source ids are paths relative to `docs_dir`) and embeds them.
/// A missing directory yields an empty index.
DocIndex build_doc_index(const std::filesystem::path& docs_dir, retrieval::EmbeddingProvider& embedder,
                         const retrieval::ChunkingConfig& chunking);
DocIndex build_doc_index(const std::vector<retrieval::Chunk>& chunks, retrieval::EmbeddingProvider& embedder);

struct ScoredChunk {
    retrieval::Chunk chunk;
    double score = 0.0;
};

struct DocRetrieval {
    std::vector<ScoredChunk> hits;
    bool documentation_missing = false;
};

/// Query text = buggy function body plus the names of the APIs it calls.
DocRetrieval retrieve_doc_context(const DocIndex& index, retrieval::EmbeddingProvider& embedder,
                                  const std::string& buggy_source, const std::vector<std::string>& called_apis,
                                  std::size_t k = kDefaultTopK);

// ---- issue history -------------------------------------------------------

/// Issues with separate text and code (fix patch) embeddings.
class IssueIndex {
public:
    IssueIndex(std::vector<IssueRecord> issues, retrieval::EmbeddingProvider& embedder);
    [[nodiscard]] std::size_t size() const noexcept { return issues_.size(); }
    [[nodiscard]] const std::vector<IssueRecord>& issues() const noexcept { return issues_; }

    struct Hit {
        const IssueRecord* issue = nullptr;
        double text_score = 0.0;
        double code_score = 0.0;
        double score = 0.0;  // combined
    };

    /// Issues resolved strictly before `fix_date`, ranked by the combined
    /// score (descending, ties by insertion order).
    [[nodiscard]] std::vector<Hit> query(const retrieval::EmbeddingVector& q, Timestamp fix_date, std::size_t k) const;

private:
    std::vector<IssueRecord> issues_;
    std::vector<retrieval::EmbeddingVector> text_vectors_;
    std::vector<retrieval::EmbeddingVector> code_vectors_;
};

struct IssueRetrieval {
    std::vector<IssueIndex::Hit> hits;
    bool issue_history_missing = false;
};

IssueRetrieval retrieve_similar_issues(const IssueIndex& index, retrieval::EmbeddingProvider& embedder,
                                       const std::string& buggy_source, Timestamp fix_date,
                                       std::size_t k = kDefaultTopK);

// ---- question answering --------------------------------------------------

inline constexpr std::string_view kNoDocumentationEvidence = "no documentation evidence";
inline constexpr std::string_view kNoIssueEvidence = "no issue evidence";

/// One answer per documentation question. Without a client the answers are
/// extractive: the retrieved chunks verbatim.
Insights answer_doc_questions(const std::vector<ScoredChunk>& chunks, const QuestionSet& questions,
                              const std::string& function_name, llm::Client* client, const llm::CompletionRequest& base,
                              const std::string& bug_id);

Insights answer_issue_questions(const std::vector<IssueIndex::Hit>& issues, const QuestionSet& questions,
                                const std::string& function_name, llm::Client* client,
                                const llm::CompletionRequest& base, const std::string& bug_id);

/// Layer-3 knowledge for one bug.
struct ProjectContext {
    Insights doc_insights;
    Insights issue_insights;
    bool documentation_available = false;
    bool issue_history_available = false;

    bool operator==(const ProjectContext&) const = default;
};

void to_json(Json& j, const ProjectContext& ctx);
void from_json(const Json& j, ProjectContext& ctx);

}  // namespace layerfix::project
