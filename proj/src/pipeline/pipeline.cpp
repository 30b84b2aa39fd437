#include "layerfix/pipeline/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

#include <spdlog/spdlog.h>

#include "layerfix/core/error.hpp"
#include "layerfix/core/manifest.hpp"
#include "layerfix/pysrc/module_scan.hpp"

namespace layerfix::pipeline {

struct Pipeline::ProjectData {
    std::mutex mutex;
    std::optional<std::vector<repo::Commit>> history;  // from history.jsonl, when shipped
    bool history_checked = false;
    std::unique_ptr<project::DocIndex> docs;
    std::unique_ptr<project::IssueIndex> issues;
};

namespace {

std::string last_segment(const std::string& dotted) {
    const auto dot = dotted.rfind('.');
    return dot == std::string::npos ? dotted : dotted.substr(dot + 1);
}

std::vector<std::string> called_api_names(const std::string& source) {
    std::vector<std::string> names;
    try {
        for (const auto& ref : pysrc::collect_references(source)) {
            if (!ref.is_call) continue;
            const std::string name = ref.dotted();
            if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
        }
    } catch (const Error&) {
        // an untokenizable body still works as a query on its own
    }
    return names;
}

template <class T>
std::vector<T> load_records(const std::filesystem::path& path) {
    std::vector<T> out;
    if (!std::filesystem::exists(path)) return out;
    for (const auto& j : read_jsonl(path)) out.push_back(j.get<T>());
    return out;
}

}  // namespace

AvailabilityRecord availability_of(const std::string& bug_id, const repo::RepoContext& repo,
                                   const project::ProjectContext& project) {
    AvailabilityRecord r;
    r.bug_id = bug_id;
    r.co_occurring_files = !repo.co_occurring.empty();
    r.structural_dependencies =
        !repo.dependencies.called_definitions.empty() || !repo.dependencies.caller_definitions.empty();
    r.latest_change = repo.last_change.has_value();
    r.documentation = project.documentation_available;
    r.issue_history = project.issue_history_available;
    return r;
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const auto threads = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(workers, 1)));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
}

std::vector<RepairOutcome> load_outcomes(const std::filesystem::path& output_dir) {
    std::map<std::pair<std::string, Layer>, RepairOutcome> latest;
    for (auto& o : load_records<RepairOutcome>(output_dir / kOutcomesFile)) latest[{o.bug_id, o.layer}] = std::move(o);
    std::vector<RepairOutcome> out;
    for (auto& [key, o] : latest) out.push_back(std::move(o));
    return out;
}

std::vector<eval::Quarantine> load_quarantine(const std::filesystem::path& output_dir) {
    std::map<std::string, eval::Quarantine> first;
    for (auto& q : load_records<eval::Quarantine>(output_dir / kQuarantineFile)) first.emplace(q.bug_id, std::move(q));
    std::vector<eval::Quarantine> out;
    for (auto& [id, q] : first) out.push_back(std::move(q));
    return out;
}

std::vector<AvailabilityRecord> load_availability(const std::filesystem::path& output_dir) {
    std::map<std::string, AvailabilityRecord> latest;
    for (auto& r : load_records<AvailabilityRecord>(output_dir / kAvailabilityFile)) latest[r.bug_id] = std::move(r);
    std::vector<AvailabilityRecord> out;
    for (auto& [id, r] : latest) out.push_back(std::move(r));
    return out;
}

eval::EvaluationReport evaluate_logs(std::span<const BugInstance> bugs, const std::filesystem::path& output_dir,
                                     std::span<const int> ks) {
    const auto outcomes = load_outcomes(output_dir);
    const auto quarantined = load_quarantine(output_dir);
    return eval::evaluate(bugs, outcomes, ks, quarantined);
}

std::string render_run_report(const eval::EvaluationReport& report, std::span<const AvailabilityRecord> availability) {
    std::string text = eval::render_text(report);
    if (!availability.empty()) text += "\n" + render_availability(summarize(availability));
    return text;
}

Pipeline::Pipeline(RunConfig config, Services services) : config_(std::move(config)), services_(services) {
    if (services_.embedder == nullptr) throw Error(ErrorKind::config, "pipeline: no embedding provider");
}

Pipeline::~Pipeline() = default;

void Pipeline::prepare() {
    validate(config_);
    bugs_ = load_manifest(config_.manifest);
    template_ = prompt::load_prompt_template(config_.template_dir / "prompt.txt");
    questions_ = project::load_question_set(config_.template_dir / "qa_questions.json");

    const auto& out = config_.output_dir;
    std::filesystem::create_directories(out);
    for (auto& o : load_outcomes(out)) outcomes_[{o.bug_id, o.layer}] = std::move(o);
    for (auto& q : load_quarantine(out)) quarantined_[q.bug_id] = std::move(q);
    for (auto& r : load_availability(out)) availability_[r.bug_id] = std::move(r);

    replay_ = std::make_unique<llm::ReplayProvider>(llm::RunLog::load(out / kLlmLogFile), services_.provider);
    run_log_ = std::make_unique<llm::RunLog>(out / kLlmLogFile);
    client_ = std::make_unique<llm::Client>(*replay_, run_log_.get(), config_.max_in_flight);
    attempts_log_ = std::make_unique<JsonlAppender>(out / kAttemptsFile);
    outcomes_log_ = std::make_unique<JsonlAppender>(out / kOutcomesFile);
    quarantine_log_ = std::make_unique<JsonlAppender>(out / kQuarantineFile);
    availability_log_ = std::make_unique<JsonlAppender>(out / kAvailabilityFile);
}

llm::CompletionRequest Pipeline::base_request() const {
    llm::CompletionRequest r;
    r.n = config_.n;
    r.temperature = config_.temperature;
    r.max_output_tokens = config_.max_output_tokens;
    r.model = config_.model;
    return r;
}

Extraction& Pipeline::extraction(const std::string& bug_id) {
    std::lock_guard lock(mutex_);
    auto& slot = extractions_[bug_id];
    if (!slot) slot = std::make_unique<Extraction>();
    return *slot;
}

std::shared_ptr<Pipeline::ProjectData> Pipeline::project_data(const std::string& project) {
    std::lock_guard lock(mutex_);
    auto& slot = projects_[project];
    if (!slot) slot = std::make_shared<ProjectData>();
    return slot;
}

std::vector<repo::Commit> Pipeline::history_for(const BugInstance& bug, const std::filesystem::path& checkout) {
    if (!config_.project_data_root.empty()) {
        auto data = project_data(bug.project);
        std::lock_guard lock(data->mutex);
        if (!data->history_checked) {
            data->history_checked = true;
            const auto path = config_.project_data_root / bug.project / "history.jsonl";
            if (std::filesystem::exists(path)) data->history = repo::JsonlCommitLog(path).commits();
        }
        if (data->history) return *data->history;
    }
    for (const auto& tip : {bug.fix_commit, bug.buggy_commit}) {
        try {
            return repo::GitCommitLog(checkout, tip).commits();
        } catch (const Error& e) {
            spdlog::debug("{}: git history at {} unavailable: {}", bug.bug_id, tip, e.what());
        }
    }
    spdlog::warn("{}: no version history available", bug.bug_id);
    return {};
}

patch::Validator& Pipeline::validator(const BugInstance& bug) {
    std::lock_guard lock(mutex_);
    auto& slot = validators_[bug.bug_id];
    if (!slot) {
        const auto checkout = std::filesystem::absolute(config_.repos_root / bug.bug_id);
        slot = std::make_unique<patch::Validator>(*services_.sandbox, bug, checkout.string(),
                                                  patch::ValidationConfig{config_.sandbox_timeout_s, config_.full_suite});
    }
    return *slot;
}

void Pipeline::ensure_context(const BugInstance& bug, Extraction& ext, Layer layer) {
    const auto checkout = config_.repos_root / bug.bug_id;
    if (!ext.bug) {
        bugctx::BugContextOptions options;
        options.source_roots = config_.source_roots;
        options.sandbox_timeout_s = config_.sandbox_timeout_s;
        ext.bug = bugctx::assemble_bug_context(bug, std::filesystem::absolute(checkout), services_.sandbox, options);
    }
    if (layer == Layer::bug) return;

    if (!ext.repo) {
        const auto history = history_for(bug, checkout);
        ext.repo = repo::assemble_repo_context(bug, checkout, history, {config_.top_n, config_.source_roots});
        if (const auto fix = repo::find_commit(history, bug.fix_commit)) ext.fix_date = history[*fix].date;
    }
    if (layer == Layer::repository || ext.project) return;

    auto data = project_data(bug.project);
    const project::DocIndex* docs = nullptr;
    const project::IssueIndex* issues = nullptr;
    {
        std::lock_guard lock(data->mutex);
        if (!data->docs) {
            const auto dir = config_.project_data_root.empty() ? std::filesystem::path{}
                                                               : config_.project_data_root / bug.project / "docs";
            data->docs = std::make_unique<project::DocIndex>(project::build_doc_index(
                dir, *services_.embedder, {config_.chunk_size, config_.chunk_overlap}));
            std::vector<project::IssueRecord> records;
            if (!config_.project_data_root.empty()) {
                records = project::load_issues(config_.project_data_root / bug.project / "issues.jsonl");
            }
            data->issues = std::make_unique<project::IssueIndex>(std::move(records), *services_.embedder);
        }
        docs = data->docs.get();
        issues = data->issues.get();
    }

    const std::string& source = ext.bug->buggy_source;
    const std::string function_name = last_segment(bug.span.qualified_name);
    const auto doc_hits =
        project::retrieve_doc_context(*docs, *services_.embedder, source, called_api_names(source), config_.top_k);
    project::IssueRetrieval issue_hits;
    if (ext.fix_date) {
        issue_hits = project::retrieve_similar_issues(*issues, *services_.embedder, source, *ext.fix_date, config_.top_k);
    } else {
        issue_hits.issue_history_missing = true;  // without a fix date no issue is provably earlier
    }

    llm::Client* qa = config_.qa_with_llm ? client_.get() : nullptr;
    llm::CompletionRequest qa_request = base_request();
    qa_request.temperature = 0.0;
    project::ProjectContext pc;
    pc.documentation_available = !doc_hits.documentation_missing && !doc_hits.hits.empty();
    pc.issue_history_available = !issue_hits.issue_history_missing && !issue_hits.hits.empty();
    pc.doc_insights = project::answer_doc_questions(doc_hits.hits, questions_, function_name, qa, qa_request, bug.bug_id);
    pc.issue_insights =
        project::answer_issue_questions(issue_hits.hits, questions_, function_name, qa, qa_request, bug.bug_id);
    ext.project = std::move(pc);
}

void Pipeline::quarantine(const BugInstance& bug, Layer layer, const std::string& reason) {
    spdlog::warn("{}: quarantined at {}: {}", bug.bug_id, to_string(layer), reason);
    eval::Quarantine q{bug.bug_id, layer, reason};
    quarantine_log_->append(Json(q));
    std::lock_guard lock(mutex_);
    quarantined_.emplace(bug.bug_id, std::move(q));
}

void Pipeline::process(const BugInstance& bug, Layer layer) {
    try {
        Extraction& ext = extraction(bug.bug_id);
        ensure_context(bug, ext, layer);
        if (layer == Layer::project) {
            const auto record = availability_of(bug.bug_id, *ext.repo, *ext.project);
            std::lock_guard lock(mutex_);
            if (availability_.emplace(bug.bug_id, record).second) availability_log_->append(Json(record));
        }

        const auto built = prompt::build_prompt(layer, template_, *ext.bug, layer != Layer::bug ? &*ext.repo : nullptr,
                                                layer == Layer::project ? &*ext.project : nullptr);
        const auto budgeted = prompt::enforce_budget(built, config_.token_budget);

        patch::Validator& check = validator(bug);
        check.baseline();

        llm::CompletionRequest request = base_request();
        request.prompt = budgeted.render();
        const auto batch = client_->complete(request, bug.bug_id, to_string(layer));
        const std::string hash = llm::sha256_hex(request.prompt);

        RepairOutcome outcome{bug.bug_id, layer, request.n, 0, {}};
        for (int i = 0; i < request.n; ++i) {
            auto attempt = check.validate(batch.responses[static_cast<std::size_t>(i)], layer, i);
            attempt.prompt_hash = hash;
            attempts_log_->append(Json(attempt));
            if (attempt.verdict == patch::Verdict::plausible) ++outcome.c;
            outcome.attempt_refs.push_back(attempt_ref(bug.bug_id, layer, i));
        }
        outcomes_log_->append(Json(outcome));
        std::lock_guard lock(mutex_);
        outcomes_[{bug.bug_id, layer}] = std::move(outcome);
    } catch (const Error& e) {
        quarantine(bug, layer, std::string(to_string(e.kind())) + ": " + e.what());
    } catch (const std::exception& e) {
        quarantine(bug, layer, std::string("internal: ") + e.what());
    }
}

eval::EvaluationReport Pipeline::run() {
    if (services_.sandbox == nullptr) throw Error(ErrorKind::config, "pipeline: running needs a sandbox");
    if (services_.provider == nullptr) throw Error(ErrorKind::config, "pipeline: running needs a completion provider");
    prepare();
    std::vector<const BugInstance*> stage;
    for (const auto& bug : bugs_) stage.push_back(&bug);

    for (const Layer layer : kAllLayers) {
        const auto l = static_cast<std::size_t>(layer_index(layer));
        std::erase_if(stage, [&](const BugInstance* b) {
            const auto q = quarantined_.find(b->bug_id);
            return q != quarantined_.end() && q->second.layer < layer;
        });
        attempted_[l].clear();
        std::vector<const BugInstance*> pending;
        for (const auto* b : stage) {
            attempted_[l].push_back(b->bug_id);
            if (!outcomes_.contains({b->bug_id, layer}) && !quarantined_.contains(b->bug_id)) pending.push_back(b);
        }
        spdlog::info("{}: {} bugs, {} to run", to_string(layer), stage.size(), pending.size());
        parallel_for(pending.size(), config_.parallelism, [&](std::size_t i) { process(*pending[i], layer); });

        std::vector<const BugInstance*> next;
        for (const auto* b : stage) {
            const auto it = outcomes_.find({b->bug_id, layer});
            if (it != outcomes_.end() && it->second.c == 0) next.push_back(b);
        }
        stage = std::move(next);
    }

    std::vector<RepairOutcome> outcomes;
    for (const auto& [key, o] : outcomes_) outcomes.push_back(o);
    std::vector<eval::Quarantine> quarantined;
    for (const auto& [id, q] : quarantined_) quarantined.push_back(q);
    std::vector<AvailabilityRecord> availability;
    for (const auto& [id, r] : availability_) availability.push_back(r);

    auto report = eval::evaluate(bugs_, outcomes, config_.ks, quarantined);
    write_file(config_.output_dir / kReportTextFile, render_run_report(report, availability));
    write_file(config_.output_dir / kReportJsonlFile, eval::render_jsonl(report));
    return report;
}

std::vector<AvailabilityRecord> Pipeline::extract() {
    if (config_.qa_with_llm && services_.provider == nullptr) {
        throw Error(ErrorKind::config, "pipeline: model answers need a completion provider");
    }
    prepare();
    const auto dir = config_.output_dir / kContextsDir;
    std::filesystem::create_directories(dir);
    std::vector<std::optional<AvailabilityRecord>> records(bugs_.size());
    parallel_for(bugs_.size(), config_.parallelism, [&](std::size_t i) {
        const BugInstance& bug = bugs_[i];
        Json bundle{{"bug_id", bug.bug_id}};
        try {
            Extraction& ext = extraction(bug.bug_id);
            ensure_context(bug, ext, Layer::project);
            bundle["bug_context"] = *ext.bug;
            bundle["repo_context"] = *ext.repo;
            bundle["project_context"] = *ext.project;
            records[i] = availability_of(bug.bug_id, *ext.repo, *ext.project);
            bundle["availability"] = *records[i];
        } catch (const std::exception& e) {
            bundle["error"] = e.what();
            spdlog::warn("{}: extraction failed: {}", bug.bug_id, e.what());
        }
        write_file(dir / (bug.bug_id + ".json"), bundle.dump(2) + "\n");
    });
    std::vector<AvailabilityRecord> out;
    for (auto& r : records) {
        if (r) out.push_back(std::move(*r));
    }
    return out;
}

eval::EvaluationReport run_pipeline(const RunConfig& config, Services services) {
    return Pipeline(config, services).run();
}

}  // namespace layerfix::pipeline
