// layerfix: layered-knowledge program repair runs from the command line.
//
//   layerfix run        --config run.json [overrides...]
//   layerfix extract    --config run.json
//   layerfix evaluate   --manifest bugs.jsonl --output-dir out/
//   layerfix complexity --manifest bugs.jsonl --repos-root repos/ --output-dir out/
//
// Precedence: built-in defaults < config file < flags. Credentials are read
// from the environment only (LAYERFIX_LLM_*, LAYERFIX_EMBED_*).

#include <iostream>
#include <memory>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "layerfix/complexity/complexity.hpp"
#include "layerfix/core/error.hpp"
#include "layerfix/core/manifest.hpp"
#include "layerfix/pipeline/pipeline.hpp"

namespace {

using namespace layerfix;
namespace fs = std::filesystem;

struct Overrides {
    std::optional<std::string> config;
    std::optional<std::string> manifest, repos_root, project_data_root, output_dir, template_dir;
    std::optional<std::string> provider, model, mock_script, embedding, embedding_model;
    std::optional<int> n, top_n, parallelism, max_in_flight, max_output_tokens;
    std::optional<std::vector<int>> ks;
    std::optional<double> temperature, sandbox_timeout_s;
    std::optional<std::size_t> chunk_size, chunk_overlap, top_k, token_budget, embedding_dimension;
    std::optional<std::vector<std::string>> source_roots, sandbox_command;
    bool qa_with_llm = false;
    bool full_suite = false;
    bool verbose = false;
};

void add_config_flags(CLI::App& cmd, Overrides& o) {
    cmd.add_option("--config", o.config, "JSON run configuration");
    cmd.add_option("--manifest", o.manifest, "bug manifest (JSONL)");
    cmd.add_option("--repos-root", o.repos_root, "directory of buggy checkouts, one per bug id");
    cmd.add_option("--project-data-root", o.project_data_root, "per-project docs/, issues.jsonl, history.jsonl");
    cmd.add_option("--output-dir", o.output_dir, "logs and reports");
    cmd.add_option("--template-dir", o.template_dir, "prompt.txt and qa_questions.json");
    cmd.add_option("--provider", o.provider, "mock | http")->check(CLI::IsMember({"mock", "http"}));
    cmd.add_option("--model", o.model, "model id sent to the provider");
    cmd.add_option("--mock-script", o.mock_script, "scripted responses for --provider mock");
    cmd.add_option("-n,--samples", o.n, "completions per (bug, layer)");
    cmd.add_option("-k,--ks", o.ks, "pass@k values")->delimiter(',');
    cmd.add_option("--temperature", o.temperature);
    cmd.add_option("--max-output-tokens", o.max_output_tokens);
    cmd.add_option("--top-n", o.top_n, "co-occurring files kept");
    cmd.add_option("--source-roots", o.source_roots, "package roots searched for imports")->delimiter(',');
    cmd.add_option("--chunk-size", o.chunk_size);
    cmd.add_option("--chunk-overlap", o.chunk_overlap);
    cmd.add_option("--top-k", o.top_k, "retrieved chunks and issues");
    cmd.add_option("--embedding", o.embedding, "hashed | http")->check(CLI::IsMember({"hashed", "http"}));
    cmd.add_option("--embedding-model", o.embedding_model);
    cmd.add_option("--embedding-dimension", o.embedding_dimension);
    cmd.add_flag("--qa-with-llm", o.qa_with_llm, "answer project questions with the model");
    cmd.add_option("--token-budget", o.token_budget);
    cmd.add_option("--sandbox-command", o.sandbox_command, "agent argv; the checkout path is appended")
        ->delimiter(',');
    cmd.add_option("--sandbox-timeout", o.sandbox_timeout_s, "seconds per sandbox job");
    cmd.add_flag("--full-suite", o.full_suite, "regression-check the whole test suite");
    cmd.add_option("-j,--parallelism", o.parallelism, "bugs processed concurrently");
    cmd.add_option("--max-in-flight", o.max_in_flight, "concurrent provider requests");
    cmd.add_flag("-v,--verbose", o.verbose);
}

template <class T, class U>
void apply(const std::optional<U>& value, T& field) {
    if (value) field = *value;
}

pipeline::RunConfig resolve_config(const Overrides& o) {
    pipeline::RunConfig c;
    c.template_dir = pipeline::default_template_dir();
    if (o.config) c = pipeline::load_config(*o.config);
    apply(o.manifest, c.manifest);
    apply(o.repos_root, c.repos_root);
    apply(o.project_data_root, c.project_data_root);
    apply(o.output_dir, c.output_dir);
    apply(o.template_dir, c.template_dir);
    apply(o.provider, c.provider);
    apply(o.model, c.model);
    apply(o.mock_script, c.mock_script);
    apply(o.n, c.n);
    apply(o.ks, c.ks);
    apply(o.temperature, c.temperature);
    apply(o.max_output_tokens, c.max_output_tokens);
    apply(o.top_n, c.top_n);
    apply(o.source_roots, c.source_roots);
    apply(o.chunk_size, c.chunk_size);
    apply(o.chunk_overlap, c.chunk_overlap);
    apply(o.top_k, c.top_k);
    apply(o.embedding, c.embedding);
    apply(o.embedding_model, c.embedding_model);
    apply(o.embedding_dimension, c.embedding_dimension);
    apply(o.token_budget, c.token_budget);
    apply(o.sandbox_command, c.sandbox_command);
    apply(o.sandbox_timeout_s, c.sandbox_timeout_s);
    apply(o.parallelism, c.parallelism);
    apply(o.max_in_flight, c.max_in_flight);
    if (o.qa_with_llm) c.qa_with_llm = true;
    if (o.full_suite) c.full_suite = true;
    return c;
}

struct OwnedServices {
    std::unique_ptr<llm::CompletionProvider> provider;
    std::unique_ptr<patch::Sandbox> sandbox;
    std::unique_ptr<retrieval::EmbeddingProvider> embedder;

    [[nodiscard]] pipeline::Services view() const { return {provider.get(), sandbox.get(), embedder.get()}; }
};

OwnedServices make_services(const pipeline::RunConfig& c, bool sampling) {
    OwnedServices s;
    if (sampling || c.qa_with_llm) {
        if (c.provider == "http") {
            s.provider = llm::ChatCompletionProvider::from_environment();
        } else {
            if (c.mock_script.empty()) throw Error(ErrorKind::config, "provider \"mock\" needs --mock-script");
            s.provider = llm::ScriptedProvider::from_json(Json::parse(read_file(c.mock_script)));
        }
    }
    if (c.embedding == "http") {
        s.embedder = retrieval::HttpEmbedder::from_environment(c.embedding_model, c.embedding_dimension);
    } else {
        s.embedder = std::make_unique<retrieval::HashedTermEmbedder>(c.embedding_dimension);
    }
    if (!c.sandbox_command.empty()) {
        s.sandbox = std::make_unique<patch::ProcessSandbox>(c.sandbox_command);
    } else if (sampling) {
        throw Error(ErrorKind::config, "no sandbox command configured (--sandbox-command)");
    }
    return s;
}

int cmd_run(const Overrides& o) {
    const auto config = resolve_config(o);
    auto services = make_services(config, true);
    const auto report = pipeline::run_pipeline(config, services.view());
    std::cout << read_file(config.output_dir / pipeline::kReportTextFile);
    return report.quarantined.empty() ? 0 : 3;
}

int cmd_extract(const Overrides& o) {
    const auto config = resolve_config(o);
    auto services = make_services(config, false);
    pipeline::Pipeline pipeline(config, services.view());
    const auto records = pipeline.extract();
    std::cout << pipeline::render_availability(pipeline::summarize(records));
    std::cout << "context bundles: " << (config.output_dir / pipeline::kContextsDir).string() << "\n";
    return 0;
}

int cmd_evaluate(const Overrides& o) {
    const auto config = resolve_config(o);
    if (config.manifest.empty() || config.output_dir.empty()) {
        throw Error(ErrorKind::config, "evaluate needs --manifest and --output-dir");
    }
    const auto bugs = load_manifest(config.manifest);
    const auto report = pipeline::evaluate_logs(bugs, config.output_dir, config.ks);
    const auto availability = pipeline::load_availability(config.output_dir);
    const std::string text = pipeline::render_run_report(report, availability);
    write_file(config.output_dir / pipeline::kReportTextFile, text);
    write_file(config.output_dir / pipeline::kReportJsonlFile, eval::render_jsonl(report));
    std::cout << text;
    return 0;
}

// Buggy functions of fixed bugs against those still unresolved after the
// last layer; quarantined bugs are left out of both groups.
int cmd_complexity(const Overrides& o) {
    const auto config = resolve_config(o);
    if (config.manifest.empty() || config.output_dir.empty() || config.repos_root.empty()) {
        throw Error(ErrorKind::config, "complexity needs --manifest, --repos-root and --output-dir");
    }
    const auto bugs = load_manifest(config.manifest);
    std::set<std::string> attempted, fixed, quarantined;
    for (const auto& outcome : pipeline::load_outcomes(config.output_dir)) {
        attempted.insert(outcome.bug_id);
        if (outcome.c > 0) fixed.insert(outcome.bug_id);
    }
    for (const auto& q : pipeline::load_quarantine(config.output_dir)) quarantined.insert(q.bug_id);

    std::vector<complexity::ComplexityProfile> fixed_group, unresolved_group;
    for (const auto& bug : bugs) {
        if (!attempted.contains(bug.bug_id) || quarantined.contains(bug.bug_id)) continue;
        try {
            const auto source = bugctx::extract_buggy_function(config.repos_root / bug.bug_id, bug.span);
            (fixed.contains(bug.bug_id) ? fixed_group : unresolved_group).push_back(complexity::profile(source));
        } catch (const Error& e) {
            spdlog::warn("{}: skipped: {}", bug.bug_id, e.what());
        }
    }
    std::cout << "fixed: " << fixed_group.size() << "  unresolved: " << unresolved_group.size() << "\n";
    std::cout << complexity::render_comparison(complexity::compare_groups(fixed_group, unresolved_group));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Layered-knowledge program repair"};
    app.require_subcommand(1);
    Overrides o;
    auto* run = app.add_subcommand("run", "sample, validate and escalate through all three layers");
    auto* extract = app.add_subcommand("extract", "write the knowledge bundles without sampling");
    auto* evaluate = app.add_subcommand("evaluate", "recompute the report from logged outcomes");
    auto* complexity = app.add_subcommand("complexity", "compare complexity of fixed and unresolved functions");
    for (auto* cmd : {run, extract, evaluate, complexity}) add_config_flags(*cmd, o);

    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(o.verbose ? spdlog::level::debug : spdlog::level::info);
    try {
        if (run->parsed()) return cmd_run(o);
        if (extract->parsed()) return cmd_extract(o);
        if (evaluate->parsed()) return cmd_evaluate(o);
        return cmd_complexity(o);
    } catch (const Error& e) {
        spdlog::error("{} error: {}", to_string(e.kind()), e.what());
        return 2;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 2;
    }
}
