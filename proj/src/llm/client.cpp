#include "layerfix/llm/client.hpp"

#include <algorithm>
#include <chrono>

#include <openssl/evp.h>

#include "layerfix/core/error.hpp"

namespace layerfix::llm {

void validate(const CompletionRequest& request) {
    if (request.n < 1) throw Error(ErrorKind::validation, "completion request: n must be at least 1");
    if (request.temperature < 0.0) throw Error(ErrorKind::validation, "completion request: temperature must be >= 0");
}

ScriptedProvider::ScriptedProvider(std::vector<Rule> rules, std::vector<std::string> fallback)
    : rules_(std::move(rules)), fallback_(std::move(fallback)) {
    for (const auto& r : rules_) {
        if (r.responses.empty()) throw Error(ErrorKind::config, "scripted rule \"" + r.prompt_contains + "\" has no responses");
    }
    if (fallback_.empty()) fallback_.emplace_back();
}

std::string ScriptedProvider::response(std::string_view prompt, int sample_index) const {
    const std::vector<std::string>* pool = &fallback_;
    for (const auto& r : rules_) {
        if (prompt.find(r.prompt_contains) != std::string_view::npos) {
            pool = &r.responses;
            break;
        }
    }
    return (*pool)[static_cast<std::size_t>(sample_index) % pool->size()];
}

CompletionBatch ScriptedProvider::complete(const CompletionRequest& request) {
    validate(request);
    CompletionBatch batch;
    for (int i = 0; i < request.n; ++i) batch.responses.push_back(response(request.prompt, i));
    return batch;
}

std::unique_ptr<ScriptedProvider> ScriptedProvider::from_json(const Json& script) {
    try {
        std::vector<Rule> rules;
        for (const auto& r : script.value("rules", Json::array())) {
            rules.push_back(
                Rule{r.at("prompt_contains").get<std::string>(), r.at("responses").get<std::vector<std::string>>()});
        }
        return std::make_unique<ScriptedProvider>(std::move(rules),
                                                  script.value("fallback", std::vector<std::string>{}));
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::config, std::string("mock script: ") + e.what());
    }
}

ChatCompletionProvider::ChatCompletionProvider(net::Endpoint endpoint, net::RetryPolicy retry)
    : endpoint_(std::move(endpoint)), retry_(retry) {}

std::unique_ptr<ChatCompletionProvider> ChatCompletionProvider::from_environment() {
    return std::make_unique<ChatCompletionProvider>(
        net::Endpoint{net::require_env("LAYERFIX_LLM_BASE_URL"), net::require_env("LAYERFIX_LLM_API_KEY")});
}

CompletionBatch ChatCompletionProvider::complete(const CompletionRequest& request) {
    validate(request);
    const Json body{{"model", request.model},
                    {"messages", Json::array({Json{{"role", "user"}, {"content", request.prompt}}})},
                    {"temperature", request.temperature},
                    {"max_tokens", request.max_output_tokens}};
    CompletionBatch batch;
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < request.n; ++i) {
        const Json reply = net::with_retry(retry_, [&] { return net::post_json(endpoint_, "/chat/completions", body); });
        try {
            const auto& content = reply.at("choices").at(0).at("message").at("content");
            batch.responses.push_back(content.is_null() ? std::string{} : content.get<std::string>());
        } catch (const Json::exception& e) {
            throw Error(ErrorKind::transport, std::string("chat completion response: ") + e.what());
        }
        if (const auto usage = reply.find("usage"); usage != reply.end() && usage->is_object()) {
            batch.prompt_tokens += usage->value("prompt_tokens", 0LL);
            batch.completion_tokens += usage->value("completion_tokens", 0LL);
        }
    }
    batch.latency_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return batch;
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorKind::io, "sha256 failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(length * 2);
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xF]);
    }
    return out;
}

void to_json(Json& j, const RunLogRecord& r) {
    j = Json{{"bug_id", r.bug_id},           {"layer", r.layer}, {"sample_index", r.sample_index},
             {"prompt_hash", r.prompt_hash}, {"response", r.response}, {"model", r.model},
             {"temperature", r.temperature}};
}

void from_json(const Json& j, RunLogRecord& r) {
    j.at("bug_id").get_to(r.bug_id);
    j.at("layer").get_to(r.layer);
    j.at("sample_index").get_to(r.sample_index);
    j.at("prompt_hash").get_to(r.prompt_hash);
    j.at("response").get_to(r.response);
    r.model = j.value("model", std::string{});
    r.temperature = j.value("temperature", 0.0);
}

RunLog::RunLog(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    out_.open(path, std::ios::app | std::ios::binary);
    if (!out_) throw Error(ErrorKind::io, "cannot open run log " + path.string());
}

void RunLog::append(const RunLogRecord& record) {
    const std::string line = Json(record).dump() + "\n";
    std::lock_guard lock(mutex_);
    out_ << line;
    out_.flush();
    if (!out_) throw Error(ErrorKind::io, "run log write failed");
}

std::vector<RunLogRecord> RunLog::load(const std::filesystem::path& path) {
    std::vector<RunLogRecord> records;
    if (!std::filesystem::exists(path)) return records;
    for (const auto& j : read_jsonl(path)) records.push_back(j.get<RunLogRecord>());
    return records;
}

ReplayProvider::ReplayProvider(const std::vector<RunLogRecord>& records, CompletionProvider* fallback)
    : fallback_(fallback) {
    for (const auto& r : records) responses_.emplace(std::make_pair(r.prompt_hash, r.sample_index), r.response);
}

CompletionBatch ReplayProvider::complete(const CompletionRequest& request) {
    validate(request);
    const std::string hash = sha256_hex(request.prompt);
    CompletionBatch batch;
    for (int i = 0; i < request.n; ++i) {
        const auto it = responses_.find({hash, i});
        if (it == responses_.end()) {
            if (fallback_ == nullptr) {
                throw Error(ErrorKind::not_found, "run log has no response for prompt " + hash + " sample " + std::to_string(i));
            }
            return fallback_->complete(request);
        }
        batch.responses.push_back(it->second);
    }
    return batch;
}

Client::Client(CompletionProvider& provider, RunLog* log, int max_in_flight)
    : provider_(provider), log_(log), slots_(std::clamp(max_in_flight, 1, kMaxInFlight)) {}

CompletionBatch Client::complete(const CompletionRequest& request, std::string_view bug_id, std::string_view tag) {
    validate(request);
    slots_.acquire();
    CompletionBatch batch;
    try {
        batch = provider_.complete(request);
    } catch (...) {
        slots_.release();
        throw;
    }
    slots_.release();
    if (static_cast<int>(batch.responses.size()) != request.n) {
        throw Error(ErrorKind::transport, "provider returned " + std::to_string(batch.responses.size()) +
                                              " responses for n=" + std::to_string(request.n));
    }
    if (log_ != nullptr) {
        const std::string hash = sha256_hex(request.prompt);
        for (int i = 0; i < request.n; ++i) {
            log_->append(RunLogRecord{std::string(bug_id), std::string(tag), i, hash,
                                      batch.responses[static_cast<std::size_t>(i)], request.model, request.temperature});
        }
    }
    return batch;
}

}  // namespace layerfix::llm
