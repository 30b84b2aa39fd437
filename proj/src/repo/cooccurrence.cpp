#include "layerfix/repo/cooccurrence.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "layerfix/core/error.hpp"

namespace layerfix::repo {

std::vector<CoOccurrence> mine_co_occurring_files(std::span<const Commit> history, std::string_view buggy_file,
                                                  int top_n) {
    if (top_n < 0) throw Error(ErrorKind::config, "co-occurrence top_n must be non-negative");
    std::map<std::string, int, std::less<>> counts;
    for (const auto& commit : history) {
        std::set<std::string_view> touched;
        for (const auto& change : commit.files) touched.insert(change.path);
        if (!touched.contains(buggy_file)) continue;
        for (const auto path : touched) {
            if (path != buggy_file) ++counts[std::string(path)];
        }
    }
    std::vector<CoOccurrence> ranked;
    ranked.reserve(counts.size());
    for (auto& [path, count] : counts) ranked.push_back({path, count});
    // counts is already path-ordered, so a stable sort on count settles ties by path
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const CoOccurrence& a, const CoOccurrence& b) { return a.co_commit_count > b.co_commit_count; });
    if (ranked.size() > static_cast<std::size_t>(top_n)) ranked.resize(static_cast<std::size_t>(top_n));
    return ranked;
}

void to_json(Json& j, const CoOccurrence& entry) {
    j = Json{{"file_path", entry.file_path}, {"co_commit_count", entry.co_commit_count}};
}

void from_json(const Json& j, CoOccurrence& entry) {
    j.at("file_path").get_to(entry.file_path);
    j.at("co_commit_count").get_to(entry.co_commit_count);
}

}  // namespace layerfix::repo
