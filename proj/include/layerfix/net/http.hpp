#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <thread>

#include "layerfix/core/error.hpp"
#include "layerfix/core/json.hpp"

namespace layerfix::net {

struct Endpoint {
    std::string base_url;  // e.g. "https://api.example.com/v1"
    std::string api_key;   // sent as a bearer token when non-empty
    std::chrono::seconds timeout{120};
};

/// POSTs JSON to base_url + path. Connection failures, 408, 429 and 5xx
/// raise TransientError; other non-2xx statuses raise Error{transport}.
Json post_json(const Endpoint& endpoint, const std::string& path, const Json& body);

/// Reads a required environment variable; Error{config} names it if unset.
std::string require_env(const char* name);
std::string env_or(const char* name, std::string fallback);

struct RetryPolicy {
    int max_attempts = 4;
    std::chrono::milliseconds initial_backoff{500};
    double multiplier = 2.0;
};

/// Runs `fn`, retrying on TransientError with exponential backoff. The last
/// failure is rethrown as Error{transport} once attempts are exhausted.
template <class Fn>
auto with_retry(const RetryPolicy& policy, Fn&& fn) -> decltype(fn()) {
    auto backoff = policy.initial_backoff;
    for (int attempt = 1;; ++attempt) {
        try {
            return fn();
        } catch (const TransientError& e) {
            if (attempt >= policy.max_attempts) {
                throw Error(ErrorKind::transport,
                            std::string("giving up after ") + std::to_string(attempt) + " attempts: " + e.what());
            }
        }
        std::this_thread::sleep_for(backoff);
        backoff = std::chrono::milliseconds(static_cast<long long>(static_cast<double>(backoff.count()) * policy.multiplier));
    }
}

}  // namespace layerfix::net
