#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "layerfix/core/json.hpp"

namespace layerfix::pipeline {

namespace fs = std::filesystem;

/// Everything a run needs. Paths inside a config file are taken relative
/// to that file's directory.
struct RunConfig {
    fs::path manifest;
    fs::path repos_root;         // <repos_root>/<bug_id> is the buggy checkout
    fs::path project_data_root;  // <root>/<project>/{docs/, issues.jsonl, history.jsonl}; optional
    fs::path output_dir;
    fs::path template_dir;  // prompt.txt and qa_questions.json

    std::string provider = "mock";  // "mock" or "http"
    std::string model = "gpt-4o-mini";
    fs::path mock_script;  // scripted provider rules, for provider "mock"

    int n = 10;
    std::vector<int> ks = {1, 3, 5};
    double temperature = 0.8;
    int max_output_tokens = 4096;

    int top_n = 5;
    std::vector<std::string> source_roots = {"src", "lib", ""};

    std::size_t chunk_size = 1000;
    std::size_t chunk_overlap = 200;
    std::size_t top_k = 5;
    std::string embedding = "hashed";  // "hashed" or "http"
    std::string embedding_model = "all-MiniLM-L6-v2";
    std::size_t embedding_dimension = 1024;
    bool qa_with_llm = false;  // otherwise extractive answers

    std::size_t token_budget = 120000;

    std::vector<std::string> sandbox_command;  // agent argv; the checkout path is appended
    double sandbox_timeout_s = 300.0;
    bool full_suite = false;

    int parallelism = 4;
    int max_in_flight = 4;
};

/// Error{config} naming the first violated constraint: n >= max(ks) >= 1,
/// chunk_size > chunk_overlap, positive budgets and counts, existing
/// manifest, repos root and template files.
void validate(const RunConfig& config);

RunConfig config_from_json(const Json& j, const fs::path& base_dir = {});
Json config_to_json(const RunConfig& config);
RunConfig load_config(const fs::path& path);

/// Directory holding the shipped templates, fixed at build time.
fs::path default_template_dir();

}  // namespace layerfix::pipeline
