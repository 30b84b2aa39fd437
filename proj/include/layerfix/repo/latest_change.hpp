#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "layerfix/core/json.hpp"
#include "layerfix/core/types.hpp"
#include "layerfix/repo/history.hpp"

namespace layerfix::repo {

struct ChangeRecord {
    std::string commit_hash;
    Timestamp author_date = 0;
    std::string message;
    std::string function_diff;  // hunks overlapping the tracked line range

    bool operator==(const ChangeRecord&) const = default;
};

struct LineRange {
    int first = 0;  // 1-based inclusive
    int last = 0;
};

/// Whether a zero-context hunk touches `range` on its new side. A pure
/// deletion sits between lines new_start and new_start + 1 and touches the
/// range only when both neighbours are inside it.
bool overlaps(const Hunk& hunk, LineRange range) noexcept;

/// Maps `range` from a file's post-commit numbering to its pre-commit
/// numbering, given hunks that do not overlap it.
LineRange map_to_parent(std::span<const Hunk> hunks, LineRange range) noexcept;

/// Most recent commit strictly before `fix_commit` whose hunks overlap the
/// span, tracking the line range backwards through intervening commits.
/// The span's numbering is that of the file just before the fix. A rename
/// of the file ends the search; the commit creating the file counts as a
/// change. Commits dated at or after the fix are ignored. Error{not_found}
/// if `fix_commit` is not in `history`.
std::optional<ChangeRecord> latest_change(std::span<const Commit> history, const FunctionSpan& span,
                                          std::string_view fix_commit);

/// Same scan over `before_fix`, the commits preceding the fix, newest last.
std::optional<ChangeRecord> latest_change_before(std::span<const Commit> before_fix, const FunctionSpan& span,
                                                 Timestamp fix_date);

void to_json(Json& j, const ChangeRecord& record);
void from_json(const Json& j, ChangeRecord& record);

}  // namespace layerfix::repo
