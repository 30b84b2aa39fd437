#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "layerfix/core/json.hpp"
#include "layerfix/repo/history.hpp"

namespace layerfix::repo {

struct CoOccurrence {
    std::string file_path;
    int co_commit_count = 0;

    bool operator==(const CoOccurrence&) const = default;
};

inline constexpr int kDefaultCoOccurrenceTopN = 5;

/// Files committed together with `buggy_file`, ranked by commit count
/// (descending) then path (ascending), at most `top_n`. The caller restricts
/// `history` to commits at or before the buggy commit.
std::vector<CoOccurrence> mine_co_occurring_files(std::span<const Commit> history, std::string_view buggy_file,
                                                  int top_n = kDefaultCoOccurrenceTopN);

void to_json(Json& j, const CoOccurrence& entry);
void from_json(const Json& j, CoOccurrence& entry);

}  // namespace layerfix::repo
