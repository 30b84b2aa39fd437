#include <httplib.h>

#include "layerfix/net/http.hpp"

#include <cstdlib>

namespace layerfix::net {

namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string prefix;  // path part, no trailing slash
};

SplitUrl split(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error(ErrorKind::config, "endpoint URL lacks a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    SplitUrl out;
    out.origin = url.substr(0, path_start);
    out.prefix = path_start == std::string::npos ? std::string{} : url.substr(path_start);
    while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
    return out;
}

}  // namespace

Json post_json(const Endpoint& endpoint, const std::string& path, const Json& body) {
    const auto url = split(endpoint.base_url);
    httplib::Client client(url.origin);
    client.set_connection_timeout(std::chrono::seconds(10));
    client.set_read_timeout(endpoint.timeout);
    client.set_write_timeout(endpoint.timeout);
    httplib::Headers headers;
    if (!endpoint.api_key.empty()) headers.emplace("Authorization", "Bearer " + endpoint.api_key);

    const auto response = client.Post(url.prefix + path, headers, body.dump(), "application/json");
    if (!response) {
        throw TransientError("POST " + endpoint.base_url + path + " failed: " + httplib::to_string(response.error()));
    }
    const int status = response->status;
    if (status == 408 || status == 429 || status >= 500) {
        throw TransientError("POST " + path + " returned HTTP " + std::to_string(status));
    }
    if (status < 200 || status >= 300) {
        throw Error(ErrorKind::transport,
                    "POST " + path + " returned HTTP " + std::to_string(status) + ": " + response->body.substr(0, 500));
    }
    try {
        return Json::parse(response->body);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorKind::transport, "POST " + path + ": response is not JSON: " + e.what());
    }
}

std::string require_env(const char* name) {
    const char* value = std::getenv(name);
    if (value == nullptr || *value == '\0') {
        throw Error(ErrorKind::config, std::string("environment variable ") + name + " is not set");
    }
    return value;
}

std::string env_or(const char* name, std::string fallback) {
    const char* value = std::getenv(name);
    return value == nullptr || *value == '\0' ? std::move(fallback) : std::string(value);
}

}  // namespace layerfix::net
