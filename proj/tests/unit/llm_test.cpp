#include <doctest.h>

#include <atomic>
#include <chrono>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "layerfix/core/error.hpp"
#include "layerfix/llm/client.hpp"
#include "layerfix/retrieval/embedding.hpp"
#include "support/support.hpp"

using namespace layerfix;
using namespace layerfix::llm;
namespace lt = layerfix::testing;

namespace {

// Local HTTP server on an ephemeral port, stopped on destruction.
class LocalServer {
public:
    LocalServer() {
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~LocalServer() {
        server_.stop();
        thread_.join();
    }
    httplib::Server& server() { return server_; }
    [[nodiscard]] std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

net::RetryPolicy fast_retry(int attempts = 3) { return net::RetryPolicy{attempts, std::chrono::milliseconds(1), 1.0}; }

}  // namespace

TEST_CASE("sha256 of known vectors") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("request validation") {
    CompletionRequest r;
    r.prompt = "p";
    CHECK_NOTHROW(validate(r));
    r.n = 0;
    CHECK_THROWS_AS(validate(r), Error);
    r.n = 1;
    r.temperature = -0.1;
    CHECK_THROWS_AS(validate(r), Error);
}

TEST_CASE("scripted provider picks the first matching rule and cycles its responses") {
    ScriptedProvider provider({{"alpha", {"a0", "a1"}}, {"al", {"x"}}}, {"f0", "f1", "f2"});
    CompletionRequest r;
    r.prompt = "prompt with alpha inside";
    r.n = 5;
    CHECK(provider.complete(r).responses == std::vector<std::string>{"a0", "a1", "a0", "a1", "a0"});
    r.prompt = "only al here";
    CHECK(provider.complete(r).responses == std::vector<std::string>{"x", "x", "x", "x", "x"});
    r.prompt = "nothing";
    r.n = 4;
    CHECK(provider.complete(r).responses == std::vector<std::string>{"f0", "f1", "f2", "f0"});
    CHECK(provider.response("alpha", 3) == "a1");
}

TEST_CASE("scripted provider from the escalation script") {
    const auto provider = lt::escalation_provider();
    CompletionRequest r;
    r.n = 10;
    r.prompt = "def apply_discount(price):";
    int fixes = 0;
    for (const auto& s : provider->complete(r).responses) fixes += s.find("# FIX-A") != std::string::npos;
    CHECK(fixes == 4);
    CHECK_THROWS_AS(ScriptedProvider::from_json(Json::parse(R"({"rules": [{"responses": []}]})")), Error);
    CHECK_THROWS_AS(ScriptedProvider::from_json(Json::parse(R"({"rules": "x"})")), Error);
    CHECK_THROWS_AS(ScriptedProvider::from_json(Json::parse(R"({"rules": [{"prompt_contains": "a", "responses": []}]})")),
                    Error);
}

TEST_CASE("run log records and replay") {
    lt::TempDir dir;
    const auto path = dir.path() / "llm_log.jsonl";
    ScriptedProvider scripted({{"p1", {"r0", "r1", "r2"}}}, {"fallback"});
    {
        RunLog log(path);
        Client client(scripted, &log, 2);
        CompletionRequest r;
        r.prompt = "p1";
        r.n = 3;
        r.model = "m";
        r.temperature = 0.8;
        CHECK(client.complete(r, "bug-1", "L1").responses.size() == 3);
    }
    const auto records = RunLog::load(path);
    REQUIRE(records.size() == 3);
    CHECK(records[1].bug_id == "bug-1");
    CHECK(records[1].layer == "L1");
    CHECK(records[1].sample_index == 1);
    CHECK(records[1].response == "r1");
    CHECK(records[1].prompt_hash == sha256_hex("p1"));
    CHECK(records[1].model == "m");
    CHECK(records[1].temperature == 0.8);

    ReplayProvider strict(records);
    CompletionRequest r;
    r.prompt = "p1";
    r.n = 3;
    CHECK(strict.complete(r).responses == std::vector<std::string>{"r0", "r1", "r2"});
    r.n = 4;
    CHECK_THROWS_AS(strict.complete(r), Error);

    ScriptedProvider other({}, {"live"});
    ReplayProvider with_fallback(records, &other);
    r.prompt = "unseen";
    r.n = 2;
    CHECK(with_fallback.complete(r).responses == std::vector<std::string>{"live", "live"});
}

TEST_CASE("client rejects a wrong batch size") {
    class Short final : public CompletionProvider {
    public:
        CompletionBatch complete(const CompletionRequest&) override { return CompletionBatch{{"one"}, 0, 0, 0}; }
    } provider;
    Client client(provider);
    CompletionRequest r;
    r.prompt = "p";
    r.n = 2;
    CHECK_THROWS_AS(client.complete(r, "b", "L1"), Error);
}

TEST_CASE("client bounds concurrent batches") {
    class Slow final : public CompletionProvider {
    public:
        std::atomic<int> active{0};
        std::atomic<int> peak{0};
        CompletionBatch complete(const CompletionRequest& r) override {
            const int now = ++active;
            int seen = peak.load();
            while (now > seen && !peak.compare_exchange_weak(seen, now)) {
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
            --active;
            return CompletionBatch{std::vector<std::string>(static_cast<std::size_t>(r.n), "x"), 0, 0, 0};
        }
    } provider;
    Client client(provider, nullptr, 2);
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i) {
        threads.emplace_back([&] {
            CompletionRequest r;
            r.prompt = "p";
            r.n = 1;
            (void)client.complete(r, "b", "L1");
        });
    }
    for (auto& t : threads) t.join();
    CHECK(provider.peak.load() <= 2);
    CHECK(provider.peak.load() >= 1);
}

TEST_CASE("chat completion provider against a local endpoint") {
    LocalServer server;
    std::atomic<int> calls{0};
    std::string seen_auth;
    Json seen_body;
    server.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        const int call = calls++;
        if (call == 0) {
            res.status = 503;  // transient, retried
            return;
        }
        seen_auth = req.get_header_value("Authorization");
        seen_body = Json::parse(req.body);
        const Json reply{{"choices", Json::array({Json{{"message", {{"role", "assistant"}, {"content", "reply " + std::to_string(call)}}}}})},
                         {"usage", {{"prompt_tokens", 7}, {"completion_tokens", 3}}}};
        res.set_content(reply.dump(), "application/json");
    });
    ChatCompletionProvider provider(net::Endpoint{server.base_url(), "secret", std::chrono::seconds(5)}, fast_retry());
    CompletionRequest r;
    r.prompt = "fix this";
    r.n = 2;
    r.model = "model-x";
    r.temperature = 0.8;
    r.max_output_tokens = 123;
    const auto batch = provider.complete(r);
    CHECK(batch.responses == std::vector<std::string>{"reply 1", "reply 2"});
    CHECK(batch.prompt_tokens == 14);
    CHECK(batch.completion_tokens == 6);
    CHECK(calls.load() == 3);
    CHECK(seen_auth == "Bearer secret");
    CHECK(seen_body["model"] == "model-x");
    CHECK(seen_body["messages"][0]["role"] == "user");
    CHECK(seen_body["messages"][0]["content"] == "fix this");
    CHECK(seen_body["temperature"] == 0.8);
    CHECK(seen_body["max_tokens"] == 123);
}

TEST_CASE("chat completion errors") {
    LocalServer server;
    server.server().Post("/v1/chat/completions", [](const httplib::Request& req, httplib::Response& res) {
        if (Json::parse(req.body)["model"] == "bad-request") {
            res.status = 400;
            res.set_content("nope", "text/plain");
        } else if (Json::parse(req.body)["model"] == "overloaded") {
            res.status = 429;
        } else {
            res.set_content(R"({"choices": []})", "application/json");
        }
    });
    CompletionRequest r;
    r.prompt = "p";
    r.n = 1;
    ChatCompletionProvider provider(net::Endpoint{server.base_url(), "", std::chrono::seconds(5)}, fast_retry(2));
    for (const char* model : {"bad-request", "overloaded", "malformed"}) {
        INFO(model);
        r.model = model;
        try {
            (void)provider.complete(r);
            FAIL("expected transport error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::transport);
        }
    }
}

TEST_CASE("unreachable endpoints give up after the retry budget") {
    ChatCompletionProvider provider(net::Endpoint{"http://127.0.0.1:1/v1", "", std::chrono::seconds(1)}, fast_retry(2));
    CompletionRequest r;
    r.prompt = "p";
    r.n = 1;
    try {
        (void)provider.complete(r);
        FAIL("expected transport error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::transport);
        CHECK(std::string(e.what()).find("2 attempts") != std::string::npos);
    }
}

TEST_CASE("http embedder against a local endpoint") {
    LocalServer server;
    server.server().Post("/v1/embeddings", [](const httplib::Request& req, httplib::Response& res) {
        const auto body = Json::parse(req.body);
        Json data = Json::array();
        for (const auto& text : body["input"]) {
            const double len = static_cast<double>(text.get<std::string>().size());
            data.push_back({{"embedding", {len, 1.0, body["model"] == "wide" ? 2.0 : 0.0}}});
        }
        res.set_content(Json{{"data", data}}.dump(), "application/json");
    });
    retrieval::HttpEmbedder embedder(net::Endpoint{server.base_url(), "", std::chrono::seconds(5)}, "m", 3, fast_retry());
    const std::vector<std::string> texts{"ab", "abcd"};
    const auto vectors = embedder.embed_batch(texts);
    REQUIRE(vectors.size() == 2);
    CHECK(vectors[1].values == std::vector<double>{4.0, 1.0, 0.0});
    CHECK(embedder.embed_batch({}).empty());

    retrieval::HttpEmbedder wrong_dim(net::Endpoint{server.base_url(), "", std::chrono::seconds(5)}, "m", 5, fast_retry());
    CHECK_THROWS_AS(wrong_dim.embed_batch(texts), Error);
}

TEST_CASE("environment configuration is required for remote providers") {
    ::unsetenv("LAYERFIX_LLM_BASE_URL");
    try {
        (void)ChatCompletionProvider::from_environment();
        FAIL("expected config error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::config);
        CHECK(std::string(e.what()).find("LAYERFIX_LLM_BASE_URL") != std::string::npos);
    }
}
