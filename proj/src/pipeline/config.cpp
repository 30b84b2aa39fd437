#include "layerfix/pipeline/config.hpp"

#include <algorithm>

#include "layerfix/core/error.hpp"

#ifndef LAYERFIX_TEMPLATE_DIR
#define LAYERFIX_TEMPLATE_DIR "templates"
#endif

namespace layerfix::pipeline {
namespace {

fs::path resolve(const fs::path& base, const std::string& value) {
    if (value.empty()) return {};
    const fs::path p(value);
    return p.is_absolute() || base.empty() ? p : base / p;
}

void require(bool ok, const std::string& message) {
    if (!ok) throw Error(ErrorKind::config, message);
}

}  // namespace

fs::path default_template_dir() { return LAYERFIX_TEMPLATE_DIR; }

void validate(const RunConfig& c) {
    require(c.n >= 1, "n must be at least 1");
    require(!c.ks.empty(), "k list is empty");
    for (int k : c.ks) require(k >= 1 && k <= c.n, "every k must lie in [1, n]; got k=" + std::to_string(k));
    require(c.temperature >= 0.0, "temperature must be non-negative");
    require(c.max_output_tokens > 0, "max_output_tokens must be positive");
    require(c.top_n >= 0, "top_n must be non-negative");
    require(c.chunk_size > c.chunk_overlap, "chunk_size must exceed chunk_overlap");
    require(c.top_k >= 1, "top_k must be at least 1");
    require(c.embedding_dimension >= 1, "embedding_dimension must be positive");
    require(c.embedding == "hashed" || c.embedding == "http", "embedding must be \"hashed\" or \"http\"");
    require(c.provider == "mock" || c.provider == "http", "provider must be \"mock\" or \"http\"");
    require(c.token_budget > 0, "token_budget must be positive");
    require(c.sandbox_timeout_s > 0.0, "sandbox_timeout_s must be positive");
    require(c.parallelism >= 1, "parallelism must be at least 1");
    require(c.max_in_flight >= 1, "max_in_flight must be at least 1");
    require(fs::is_regular_file(c.manifest), "manifest not found: " + c.manifest.string());
    require(fs::is_directory(c.repos_root), "repos root not found: " + c.repos_root.string());
    require(fs::is_regular_file(c.template_dir / "prompt.txt"), "prompt template not found in " + c.template_dir.string());
    require(fs::is_regular_file(c.template_dir / "qa_questions.json"),
            "question templates not found in " + c.template_dir.string());
    if (!c.project_data_root.empty()) {
        require(fs::is_directory(c.project_data_root), "project data root not found: " + c.project_data_root.string());
    }
    require(!c.output_dir.empty(), "output directory not set");
}

RunConfig config_from_json(const Json& j, const fs::path& base) {
    RunConfig c;
    try {
        c.manifest = resolve(base, j.value("manifest", std::string{}));
        c.repos_root = resolve(base, j.value("repos_root", std::string{}));
        c.project_data_root = resolve(base, j.value("project_data_root", std::string{}));
        c.output_dir = resolve(base, j.value("output_dir", std::string{}));
        if (j.contains("template_dir")) c.template_dir = resolve(base, j.at("template_dir").get<std::string>());
        else c.template_dir = default_template_dir();
        c.provider = j.value("provider", c.provider);
        c.model = j.value("model", c.model);
        c.mock_script = resolve(base, j.value("mock_script", std::string{}));
        c.n = j.value("n", c.n);
        c.ks = j.value("ks", c.ks);
        c.temperature = j.value("temperature", c.temperature);
        c.max_output_tokens = j.value("max_output_tokens", c.max_output_tokens);
        c.top_n = j.value("top_n", c.top_n);
        c.source_roots = j.value("source_roots", c.source_roots);
        c.chunk_size = j.value("chunk_size", c.chunk_size);
        c.chunk_overlap = j.value("chunk_overlap", c.chunk_overlap);
        c.top_k = j.value("top_k", c.top_k);
        c.embedding = j.value("embedding", c.embedding);
        c.embedding_model = j.value("embedding_model", c.embedding_model);
        c.embedding_dimension = j.value("embedding_dimension", c.embedding_dimension);
        c.qa_with_llm = j.value("qa_with_llm", c.qa_with_llm);
        c.token_budget = j.value("token_budget", c.token_budget);
        c.sandbox_command = j.value("sandbox_command", c.sandbox_command);
        c.sandbox_timeout_s = j.value("sandbox_timeout_s", c.sandbox_timeout_s);
        c.full_suite = j.value("full_suite", c.full_suite);
        c.parallelism = j.value("parallelism", c.parallelism);
        c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::config, std::string("config: ") + e.what());
    }
    return c;
}

Json config_to_json(const RunConfig& c) {
    return Json{{"manifest", c.manifest.string()},
                {"repos_root", c.repos_root.string()},
                {"project_data_root", c.project_data_root.string()},
                {"output_dir", c.output_dir.string()},
                {"template_dir", c.template_dir.string()},
                {"provider", c.provider},
                {"model", c.model},
                {"mock_script", c.mock_script.string()},
                {"n", c.n},
                {"ks", c.ks},
                {"temperature", c.temperature},
                {"max_output_tokens", c.max_output_tokens},
                {"top_n", c.top_n},
                {"source_roots", c.source_roots},
                {"chunk_size", c.chunk_size},
                {"chunk_overlap", c.chunk_overlap},
                {"top_k", c.top_k},
                {"embedding", c.embedding},
                {"embedding_model", c.embedding_model},
                {"embedding_dimension", c.embedding_dimension},
                {"qa_with_llm", c.qa_with_llm},
                {"token_budget", c.token_budget},
                {"sandbox_command", c.sandbox_command},
                {"sandbox_timeout_s", c.sandbox_timeout_s},
                {"full_suite", c.full_suite},
                {"parallelism", c.parallelism},
                {"max_in_flight", c.max_in_flight}};
}

RunConfig load_config(const fs::path& path) {
    const Json j = Json::parse(read_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(ErrorKind::config, "config " + path.string() + ": invalid JSON");
    return config_from_json(j, path.parent_path());
}

}  // namespace layerfix::pipeline
