#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "layerfix/core/json.hpp"
#include "layerfix/core/types.hpp"
#include "layerfix/repo/cooccurrence.hpp"
#include "layerfix/repo/dependencies.hpp"
#include "layerfix/repo/history.hpp"
#include "layerfix/repo/latest_change.hpp"

namespace layerfix::repo {

/// Layer-2 knowledge for one bug.
struct RepoContext {
    std::vector<CoOccurrence> co_occurring;
    DependencySet dependencies;
    std::vector<std::string> unresolved_calls;
    std::optional<ChangeRecord> last_change;

    bool operator==(const RepoContext&) const = default;
};

struct RepoContextConfig {
    int top_n = kDefaultCoOccurrenceTopN;
    std::vector<std::string> source_roots = {"src", "lib", ""};
};

/// `history` must contain the buggy or the fix commit; co-occurrence counting stops at
/// the buggy commit, or at the fix commit's parent when the buggy commit is
/// not on the first-parent line. An empty history yields no co-occurring
/// files, callers or latest change.
RepoContext assemble_repo_context(const BugInstance& bug, const std::filesystem::path& checkout,
                                  std::span<const Commit> history, const RepoContextConfig& config = {});

void to_json(Json& j, const RepoContext& ctx);
void from_json(const Json& j, RepoContext& ctx);

}  // namespace layerfix::repo
