#include "layerfix/repo/repo_context.hpp"

#include <limits>

#include "layerfix/core/error.hpp"

namespace layerfix::repo {

RepoContext assemble_repo_context(const BugInstance& bug, const std::filesystem::path& checkout,
                                  std::span<const Commit> history, const RepoContextConfig& config) {
    const auto fix = find_commit(history, bug.fix_commit);
    std::span<const Commit> before_bug;
    if (find_commit(history, bug.buggy_commit)) {
        before_bug = history_until(history, bug.buggy_commit);
    } else if (fix) {
        before_bug = history.first(*fix);
    } else if (!history.empty()) {
        throw Error(ErrorKind::not_found, bug.bug_id + ": neither buggy nor fix commit in history");
    }

    RepoContext ctx;
    ctx.co_occurring = mine_co_occurring_files(before_bug, bug.span.file_path, config.top_n);

    SourceTree tree(checkout, config.source_roots);
    auto called = extract_called_definitions(tree, bug.span);
    ctx.dependencies.called_definitions = std::move(called.definitions);
    ctx.unresolved_calls = std::move(called.unresolved);
    ctx.dependencies.caller_definitions = find_callers(tree, bug.span, ctx.co_occurring);
    // Without the fix commit the fix date is unknown; every earlier commit qualifies.
    if (history.empty()) return ctx;
    ctx.last_change = fix ? latest_change(history, bug.span, bug.fix_commit)
                          : latest_change_before(before_bug, bug.span, std::numeric_limits<Timestamp>::max());
    return ctx;
}

void to_json(Json& j, const RepoContext& ctx) {
    j = Json{{"co_occurring", ctx.co_occurring},
             {"dependencies", ctx.dependencies},
             {"unresolved_calls", ctx.unresolved_calls},
             {"last_change", ctx.last_change ? Json(*ctx.last_change) : Json(nullptr)}};
}

void from_json(const Json& j, RepoContext& ctx) {
    j.at("co_occurring").get_to(ctx.co_occurring);
    j.at("dependencies").get_to(ctx.dependencies);
    ctx.unresolved_calls = j.value("unresolved_calls", std::vector<std::string>{});
    ctx.last_change.reset();
    if (const auto it = j.find("last_change"); it != j.end() && !it->is_null()) ctx.last_change = it->get<ChangeRecord>();
}

}  // namespace layerfix::repo
