#include "layerfix/project/project_context.hpp"

#include <algorithm>

#include "layerfix/core/error.hpp"

namespace layerfix::project {
namespace {

namespace fs = std::filesystem;

bool is_doc_file(const fs::path& p) {
    const auto ext = p.extension().string();
    return ext == ".md" || ext == ".rst" || ext == ".txt" || ext == ".html";
}

std::string qa_prompt(const std::string& question, const std::string& context) {
    return "Answer the question using only the context below. Say so if the context does not cover it.\n\n"
           "Question: " + question + "\n\nContext:\n" + context;
}

Insights answer_all(const std::array<std::string, kQuestionCount>& templates, const QuestionSet& set,
                    const std::string& function_name, const std::string& context, std::vector<std::string> support,
                    std::string_view empty_answer, llm::Client* client, const llm::CompletionRequest& base,
                    const std::string& bug_id, std::string_view tag) {
    Insights insights;
    for (std::size_t i = 0; i < kQuestionCount; ++i) {
        Answer a;
        a.id = "q" + std::to_string(i + 1);
        a.question = render_question(set, templates[i], function_name);
        a.support = support;
        if (context.empty()) {
            a.answer = std::string(empty_answer);
            a.extractive = client == nullptr;
        } else if (client == nullptr) {
            a.answer = context;
            a.extractive = true;
        } else {
            llm::CompletionRequest request = base;
            request.n = 1;
            request.prompt = qa_prompt(a.question, context);
            a.answer = client->complete(request, bug_id, std::string(tag) + "-" + a.id).responses.front();
        }
        insights.answers.push_back(std::move(a));
    }
    return insights;
}

}  // namespace

QuestionSet load_question_set(const fs::path& path) {
    const Json j = Json::parse(read_file(path), nullptr, false);
    if (j.is_discarded()) throw Error(ErrorKind::config, "question set " + path.string() + ": invalid JSON");
    QuestionSet set;
    set.placeholder = j.value("placeholder", set.placeholder);
    auto read = [&](const char* key, std::array<std::string, kQuestionCount>& out) {
        const auto it = j.find(key);
        if (it == j.end() || !it->is_array() || it->size() != kQuestionCount) {
            throw Error(ErrorKind::config, "question set " + path.string() + ": \"" + key + "\" needs exactly 4 questions");
        }
        for (std::size_t i = 0; i < kQuestionCount; ++i) out[i] = (*it)[i].get<std::string>();
    };
    read("documentation", set.documentation);
    read("issues", set.issues);
    return set;
}

std::string render_question(const QuestionSet& set, const std::string& question, const std::string& function_name) {
    if (set.placeholder.empty()) return question;
    std::string out;
    std::size_t start = 0;
    while (true) {
        const auto pos = question.find(set.placeholder, start);
        out.append(question, start, pos == std::string::npos ? std::string::npos : pos - start);
        if (pos == std::string::npos) break;
        out.append(function_name);
        start = pos + set.placeholder.size();
    }
    return out;
}

void to_json(Json& j, const IssueRecord& issue) {
    j = Json{{"issue_id", issue.issue_id},     {"title", issue.title},   {"body", issue.body},
             {"discussion", issue.discussion}, {"labels", issue.labels}, {"fix_patch", issue.fix_patch},
             {"resolved_date", format_timestamp(issue.resolved_date)}};
}

void from_json(const Json& j, IssueRecord& issue) {
    const auto& id = j.at("issue_id");
    issue.issue_id = id.is_string() ? id.get<std::string>() : id.dump();
    issue.title = j.value("title", std::string{});
    issue.body = j.value("body", std::string{});
    issue.discussion = j.value("discussion", std::string{});
    issue.labels = j.value("labels", std::vector<std::string>{});
    issue.fix_patch = j.value("fix_patch", std::string{});
    const auto& date = j.at("resolved_date");
    issue.resolved_date = date.is_number_integer() ? date.get<Timestamp>() : parse_timestamp(date.get<std::string>());
}

void to_json(Json& j, const Answer& a) {
    j = Json{{"id", a.id}, {"question", a.question}, {"answer", a.answer}, {"support", a.support},
             {"extractive", a.extractive}};
}

void from_json(const Json& j, Answer& a) {
    j.at("id").get_to(a.id);
    j.at("question").get_to(a.question);
    j.at("answer").get_to(a.answer);
    a.support = j.value("support", std::vector<std::string>{});
    a.extractive = j.value("extractive", false);
}

void to_json(Json& j, const Insights& insights) { j = Json(insights.answers); }
void from_json(const Json& j, Insights& insights) { j.get_to(insights.answers); }

std::vector<IssueRecord> load_issues(const fs::path& jsonl) {
    std::vector<IssueRecord> issues;
    if (!fs::exists(jsonl)) return issues;
    for (const auto& j : read_jsonl(jsonl)) {
        try {
            issues.push_back(j.get<IssueRecord>());
        } catch (const Json::exception& e) {
            throw Error(ErrorKind::parse, jsonl.string() + ": issue record: " + e.what());
        }
    }
    return issues;
}

std::string issue_text(const IssueRecord& issue) {
    std::string text = issue.title + "\n" + issue.body + "\n" + issue.discussion;
    for (const auto& label : issue.labels) text += "\n" + label;
    return text;
}

DocIndex build_doc_index(const std::vector<retrieval::Chunk>& chunks, retrieval::EmbeddingProvider& embedder) {
    std::vector<std::string> texts;
    texts.reserve(chunks.size());
    for (const auto& c : chunks) texts.push_back(c.text);
    auto vectors = embedder.embed_batch(texts);
    std::vector<DocIndex::Item> items;
    items.reserve(chunks.size());
    for (std::size_t i = 0; i < chunks.size(); ++i) items.push_back({chunks[i], std::move(vectors[i])});
    return DocIndex(embedder.dimension(), std::move(items));
}

DocIndex build_doc_index(const fs::path& docs_dir, retrieval::EmbeddingProvider& embedder,
                         const retrieval::ChunkingConfig& chunking) {
    std::vector<fs::path> files;
    std::error_code ec;
    if (fs::is_directory(docs_dir, ec)) {
        for (const auto& entry : fs::recursive_directory_iterator(docs_dir)) {
            if (entry.is_regular_file() && is_doc_file(entry.path())) files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<retrieval::Chunk> chunks;
    for (const auto& f : files) {
        for (auto& c : retrieval::chunk_text(fs::relative(f, docs_dir).generic_string(), read_file(f), chunking)) {
            chunks.push_back(std::move(c));
        }
    }
    return build_doc_index(chunks, embedder);
}

DocRetrieval retrieve_doc_context(const DocIndex& index, retrieval::EmbeddingProvider& embedder,
                                  const std::string& buggy_source, const std::vector<std::string>& called_apis,
                                  std::size_t k) {
    DocRetrieval result;
    if (index.empty()) {
        result.documentation_missing = true;
        return result;
    }
    std::string query = buggy_source;
    for (const auto& api : called_apis) query += "\n" + api;
    for (const auto& hit : index.query(embedder.embed(query), k)) result.hits.push_back({*hit.entry, hit.score});
    return result;
}

IssueIndex::IssueIndex(std::vector<IssueRecord> issues, retrieval::EmbeddingProvider& embedder)
    : issues_(std::move(issues)) {
    std::vector<std::string> texts, patches;
    for (const auto& issue : issues_) {
        texts.push_back(issue_text(issue));
        patches.push_back(issue.fix_patch);
    }
    text_vectors_ = embedder.embed_batch(texts);
    code_vectors_ = embedder.embed_batch(patches);
}

std::vector<IssueIndex::Hit> IssueIndex::query(const retrieval::EmbeddingVector& q, Timestamp fix_date,
                                               std::size_t k) const {
    std::vector<Hit> hits;
    for (std::size_t i = 0; i < issues_.size(); ++i) {
        if (issues_[i].resolved_date >= fix_date) continue;
        Hit h{&issues_[i], retrieval::cosine(q, text_vectors_[i]), retrieval::cosine(q, code_vectors_[i]), 0.0};
        h.score = retrieval::combined_similarity(h.text_score, h.code_score);
        hits.push_back(h);
    }
    std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.score > b.score; });
    if (hits.size() > k) hits.resize(k);
    return hits;
}

IssueRetrieval retrieve_similar_issues(const IssueIndex& index, retrieval::EmbeddingProvider& embedder,
                                       const std::string& buggy_source, Timestamp fix_date, std::size_t k) {
    IssueRetrieval result;
    result.hits = index.query(embedder.embed(buggy_source), fix_date, k);
    result.issue_history_missing = result.hits.empty();
    return result;
}

Insights answer_doc_questions(const std::vector<ScoredChunk>& chunks, const QuestionSet& questions,
                              const std::string& function_name, llm::Client* client, const llm::CompletionRequest& base,
                              const std::string& bug_id) {
    std::string context;
    std::vector<std::string> support;
    for (const auto& c : chunks) {
        if (!context.empty()) context += "\n\n";
        context += "[" + c.chunk.id() + "]\n" + c.chunk.text;
        support.push_back(c.chunk.id());
    }
    return answer_all(questions.documentation, questions, function_name, context, std::move(support),
                      kNoDocumentationEvidence, client, base, bug_id, "doc");
}

Insights answer_issue_questions(const std::vector<IssueIndex::Hit>& issues, const QuestionSet& questions,
                                const std::string& function_name, llm::Client* client,
                                const llm::CompletionRequest& base, const std::string& bug_id) {
    std::string context;
    std::vector<std::string> support;
    for (const auto& hit : issues) {
        const IssueRecord& issue = *hit.issue;
        if (!context.empty()) context += "\n\n";
        context += "[issue " + issue.issue_id + "] " + issue.title + "\n" + issue.body;
        if (!issue.discussion.empty()) context += "\n" + issue.discussion;
        if (!issue.fix_patch.empty()) context += "\nFix:\n" + issue.fix_patch;
        support.push_back(issue.issue_id);
    }
    return answer_all(questions.issues, questions, function_name, context, std::move(support), kNoIssueEvidence,
                      client, base, bug_id, "issue");
}

void to_json(Json& j, const ProjectContext& ctx) {
    j = Json{{"doc_insights", ctx.doc_insights},
             {"issue_insights", ctx.issue_insights},
             {"documentation_available", ctx.documentation_available},
             {"issue_history_available", ctx.issue_history_available}};
}

void from_json(const Json& j, ProjectContext& ctx) {
    j.at("doc_insights").get_to(ctx.doc_insights);
    j.at("issue_insights").get_to(ctx.issue_insights);
    ctx.documentation_available = j.value("documentation_available", false);
    ctx.issue_history_available = j.value("issue_history_available", false);
}

}  // namespace layerfix::project
