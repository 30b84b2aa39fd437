#include "layerfix/repo/latest_change.hpp"

#include "layerfix/core/error.hpp"

namespace layerfix::repo {

bool overlaps(const Hunk& hunk, LineRange range) noexcept {
    if (hunk.new_len == 0) return range.first <= hunk.new_start && hunk.new_start < range.last;
    const int last = hunk.new_start + hunk.new_len - 1;
    return hunk.new_start <= range.last && last >= range.first;
}

LineRange map_to_parent(std::span<const Hunk> hunks, LineRange range) noexcept {
    int shift = 0;
    for (const auto& h : hunks) {
        const bool before = h.new_len == 0 ? h.new_start < range.first : h.new_start + h.new_len - 1 < range.first;
        if (before) shift += h.old_len - h.new_len;
    }
    return {range.first + shift, range.last + shift};
}

std::optional<ChangeRecord> latest_change(std::span<const Commit> history, const FunctionSpan& span,
                                          std::string_view fix_commit) {
    const auto fix_index = find_commit(history, fix_commit);
    if (!fix_index) throw Error(ErrorKind::not_found, "fix commit " + std::string(fix_commit) + " not in history");
    return latest_change_before(history.first(*fix_index), span, history[*fix_index].date);
}

std::optional<ChangeRecord> latest_change_before(std::span<const Commit> before_fix, const FunctionSpan& span,
                                                 Timestamp fix_date) {
    LineRange range{span.start_line, span.end_line};
    for (std::size_t i = before_fix.size(); i-- > 0;) {
        const Commit& commit = before_fix[i];
        const FileChange* change = nullptr;
        for (const auto& f : commit.files) {
            if (f.path == span.file_path) change = &f;
        }
        if (change == nullptr) continue;
        if (change->status == ChangeStatus::deleted) return std::nullopt;

        std::string diff;
        for (const auto& h : change->hunks) {
            if (overlaps(h, range)) diff += h.text;
        }
        const bool created = change->status == ChangeStatus::added;
        if ((created || !diff.empty()) && commit.date < fix_date) {
            if (created && diff.empty()) {
                for (const auto& h : change->hunks) diff += h.text;
            }
            return ChangeRecord{commit.hash, commit.date, commit.message, diff};
        }
        if (created || change->status == ChangeStatus::renamed) return std::nullopt;
        range = map_to_parent(change->hunks, range);
    }
    return std::nullopt;
}

void to_json(Json& j, const ChangeRecord& record) {
    j = Json{{"commit_hash", record.commit_hash}, {"author_date", format_timestamp(record.author_date)},
             {"message", record.message}, {"function_diff", record.function_diff}};
}

void from_json(const Json& j, ChangeRecord& record) {
    j.at("commit_hash").get_to(record.commit_hash);
    record.author_date = parse_timestamp(j.at("author_date").get<std::string>());
    j.at("message").get_to(record.message);
    j.at("function_diff").get_to(record.function_diff);
}

}  // namespace layerfix::repo
