#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "layerfix/bugctx/bug_context.hpp"
#include "layerfix/eval/report.hpp"
#include "layerfix/llm/client.hpp"
#include "layerfix/patch/harness.hpp"
#include "layerfix/patch/sandbox.hpp"
#include "layerfix/pipeline/availability.hpp"
#include "layerfix/pipeline/config.hpp"
#include "layerfix/project/project_context.hpp"
#include "layerfix/prompt/prompt.hpp"
#include "layerfix/repo/repo_context.hpp"
#include "layerfix/retrieval/embedding.hpp"

namespace layerfix::pipeline {

/// Files written to the output directory. The *.jsonl logs are appended as
/// work completes and drive resumption.
inline constexpr const char* kAttemptsFile = "attempts.jsonl";
inline constexpr const char* kOutcomesFile = "outcomes.jsonl";
inline constexpr const char* kQuarantineFile = "quarantine.jsonl";
inline constexpr const char* kLlmLogFile = "llm_log.jsonl";
inline constexpr const char* kAvailabilityFile = "availability.jsonl";
inline constexpr const char* kReportTextFile = "report.txt";
inline constexpr const char* kReportJsonlFile = "report.jsonl";
inline constexpr const char* kContextsDir = "contexts";

/// External collaborators; not owned.
struct Services {
    llm::CompletionProvider* provider = nullptr;  // needed by run(), and by extract() for model answers
    patch::Sandbox* sandbox = nullptr;  // optional for extract(); error text then comes from the manifest only
    retrieval::EmbeddingProvider* embedder = nullptr;
};

/// Knowledge gathered for one bug, filled layer by layer.
struct Extraction {
    std::optional<bugctx::BugContext> bug;
    std::optional<repo::RepoContext> repo;
    std::optional<project::ProjectContext> project;
    std::optional<Timestamp> fix_date;
};

AvailabilityRecord availability_of(const std::string& bug_id, const repo::RepoContext& repo,
                                   const project::ProjectContext& project);

/// Runs work over `count` items on `workers` threads pulling from a shared
/// counter. Exceptions escaping `fn` are rethrown after all workers stop.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

/// The layered repair run: every bug at layer 1, unresolved bugs again at
/// layer 2 with repository knowledge, still unresolved ones at layer 3 with
/// project knowledge. Each layer is a barrier. Results are logged before
/// the next stage starts, and a rerun over the same output directory skips
/// every (bug, layer) pair already logged and replays logged completions.
class Pipeline {
public:
    Pipeline(RunConfig config, Services services);
    ~Pipeline();

    eval::EvaluationReport run();

    /// Context bundles for all three layers without sampling; written to
    /// <output>/contexts/<bug_id>.json together with availability records.
    std::vector<AvailabilityRecord> extract();

    /// Bugs attempted at each layer during the last run(), in bug_id order.
    [[nodiscard]] const std::array<std::vector<std::string>, 3>& attempted() const noexcept { return attempted_; }

private:
    struct ProjectData;

    void prepare();
    void process(const BugInstance& bug, Layer layer);
    Extraction& extraction(const std::string& bug_id);
    void ensure_context(const BugInstance& bug, Extraction& ext, Layer layer);
    std::shared_ptr<ProjectData> project_data(const std::string& project);
    std::vector<repo::Commit> history_for(const BugInstance& bug, const std::filesystem::path& checkout);
    patch::Validator& validator(const BugInstance& bug);
    void quarantine(const BugInstance& bug, Layer layer, const std::string& reason);
    [[nodiscard]] llm::CompletionRequest base_request() const;

    RunConfig config_;
    Services services_;
    std::vector<BugInstance> bugs_;
    prompt::PromptTemplate template_;
    project::QuestionSet questions_;

    std::unique_ptr<llm::RunLog> run_log_;
    std::unique_ptr<llm::ReplayProvider> replay_;
    std::unique_ptr<llm::Client> client_;
    std::unique_ptr<JsonlAppender> attempts_log_;
    std::unique_ptr<JsonlAppender> outcomes_log_;
    std::unique_ptr<JsonlAppender> quarantine_log_;
    std::unique_ptr<JsonlAppender> availability_log_;

    std::mutex mutex_;  // guards the maps below
    std::map<std::pair<std::string, Layer>, RepairOutcome> outcomes_;
    std::map<std::string, eval::Quarantine> quarantined_;
    std::map<std::string, AvailabilityRecord> availability_;
    std::map<std::string, std::unique_ptr<Extraction>> extractions_;
    std::map<std::string, std::unique_ptr<patch::Validator>> validators_;
    std::map<std::string, std::shared_ptr<ProjectData>> projects_;
    std::array<std::vector<std::string>, 3> attempted_;
};

/// Convenience wrapper: Pipeline(config, services).run().
eval::EvaluationReport run_pipeline(const RunConfig& config, Services services);

/// Rebuilds the report from the logs of a previous run.
eval::EvaluationReport evaluate_logs(std::span<const BugInstance> bugs, const std::filesystem::path& output_dir,
                                     std::span<const int> ks);

/// Report text plus the availability summary when records exist.
std::string render_run_report(const eval::EvaluationReport& report, std::span<const AvailabilityRecord> availability);

/// Last record per (bug, layer) from the outcomes log.
std::vector<RepairOutcome> load_outcomes(const std::filesystem::path& output_dir);
std::vector<eval::Quarantine> load_quarantine(const std::filesystem::path& output_dir);
std::vector<AvailabilityRecord> load_availability(const std::filesystem::path& output_dir);

}  // namespace layerfix::pipeline
