#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "layerfix/core/json.hpp"
#include "layerfix/core/types.hpp"
#include "layerfix/net/http.hpp"

namespace layerfix::llm {

struct CompletionRequest {
    std::string prompt;
    int n = 10;
    double temperature = 0.8;
    int max_output_tokens = 4096;
    std::string model;
};

/// Error{validation} unless n >= 1 and temperature >= 0.
void validate(const CompletionRequest& request);

struct CompletionBatch {
    std::vector<std::string> responses;  // exactly request.n
    double latency_s = 0.0;
    long long prompt_tokens = 0;
    long long completion_tokens = 0;
};

class CompletionProvider {
public:
    virtual ~CompletionProvider() = default;
    virtual CompletionBatch complete(const CompletionRequest& request) = 0;
};

/// Test double whose responses depend only on (prompt, sample index): the
/// first rule whose key occurs in the prompt supplies responses[i % size],
/// otherwise the fallback list does.
class ScriptedProvider final : public CompletionProvider {
public:
    struct Rule {
        std::string prompt_contains;
        std::vector<std::string> responses;
    };

    ScriptedProvider(std::vector<Rule> rules, std::vector<std::string> fallback);
    CompletionBatch complete(const CompletionRequest& request) override;
    [[nodiscard]] std::string response(std::string_view prompt, int sample_index) const;

    /// JSON script: {"rules": [{"prompt_contains", "responses": [...]}], "fallback": [...]}.
    static std::unique_ptr<ScriptedProvider> from_json(const Json& script);

private:
    std::vector<Rule> rules_;
    std::vector<std::string> fallback_;
};

/// OpenAI-style chat completion endpoint: POST {base}/chat/completions with
/// {model, messages: [{role: "user", content}], temperature, max_tokens},
/// reading choices[0].message.content. Issues one request per sample so the
/// draws are independent regardless of server support for `n`.
class ChatCompletionProvider final : public CompletionProvider {
public:
    ChatCompletionProvider(net::Endpoint endpoint, net::RetryPolicy retry = {});

    /// LAYERFIX_LLM_BASE_URL (required), LAYERFIX_LLM_API_KEY (required).
    static std::unique_ptr<ChatCompletionProvider> from_environment();

    CompletionBatch complete(const CompletionRequest& request) override;

private:
    net::Endpoint endpoint_;
    net::RetryPolicy retry_;
};

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);

struct RunLogRecord {
    std::string bug_id;
    std::string layer;  // "L1".."L3", or a free-form tag for auxiliary calls
    int sample_index = 0;
    std::string prompt_hash;
    std::string response;
    std::string model;
    double temperature = 0.0;
};

void to_json(Json& j, const RunLogRecord& record);
void from_json(const Json& j, RunLogRecord& record);

/// Append-only line-delimited log; each append is flushed before returning.
class RunLog {
public:
    explicit RunLog(const std::filesystem::path& path);
    void append(const RunLogRecord& record);
    static std::vector<RunLogRecord> load(const std::filesystem::path& path);

private:
    std::mutex mutex_;
    std::ofstream out_;
};

/// Serves responses recorded in a run log, keyed by (prompt hash, sample
/// index). Misses go to `fallback` when present, else raise Error{not_found}.
class ReplayProvider final : public CompletionProvider {
public:
    ReplayProvider(const std::vector<RunLogRecord>& records, CompletionProvider* fallback = nullptr);
    CompletionBatch complete(const CompletionRequest& request) override;

private:
    std::map<std::pair<std::string, int>, std::string> responses_;
    CompletionProvider* fallback_;
};

/// Front door used by the pipeline: bounds in-flight batches, checks the
/// batch size and writes every response to the run log.
class Client {
public:
    static constexpr int kMaxInFlight = 64;

    Client(CompletionProvider& provider, RunLog* log = nullptr, int max_in_flight = 4);

    CompletionBatch complete(const CompletionRequest& request, std::string_view bug_id, std::string_view tag);

private:
    CompletionProvider& provider_;
    RunLog* log_;
    std::counting_semaphore<kMaxInFlight> slots_;
};

}  // namespace layerfix::llm
