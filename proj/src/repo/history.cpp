#include "layerfix/repo/history.hpp"

#include <algorithm>
#include <charconv>

#include "layerfix/core/error.hpp"
#include "layerfix/core/process.hpp"
#include "layerfix/pysrc/tokenizer.hpp"

namespace layerfix::repo {
namespace {

constexpr char kRecordStart = '\x1e';
constexpr char kFieldSep = '\x1f';
constexpr char kHeaderEnd = '\x1d';

std::string_view trim_eol(std::string_view line) {
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
    return line;
}

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

// "12" or "12,3" -> (12, 3); a missing length means 1.
std::pair<int, int> parse_range(std::string_view text) {
    auto to_int = [&](std::string_view part) {
        int v = 0;
        const auto [end, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (ec != std::errc{} || end != part.data() + part.size()) {
            throw Error(ErrorKind::parse, "bad hunk range \"" + std::string(text) + "\"");
        }
        return v;
    };
    const auto comma = text.find(',');
    if (comma == std::string_view::npos) return {to_int(text), 1};
    return {to_int(text.substr(0, comma)), to_int(text.substr(comma + 1))};
}

// Strips "a/" or "b/" from a diff header path; "/dev/null" stays as is.
std::string strip_side_prefix(std::string_view path) {
    path = trim_eol(path);
    if (const auto tab = path.find('\t'); tab != std::string_view::npos) path = path.substr(0, tab);
    if (starts_with(path, "a/") || starts_with(path, "b/")) path.remove_prefix(2);
    return std::string(path);
}

ChangeStatus parse_status(std::string_view text) {
    if (text == "added" || text == "A") return ChangeStatus::added;
    if (text == "modified" || text == "M") return ChangeStatus::modified;
    if (text == "deleted" || text == "D") return ChangeStatus::deleted;
    if (text == "renamed" || text == "R") return ChangeStatus::renamed;
    throw Error(ErrorKind::parse, "unknown file change status \"" + std::string(text) + "\"");
}

// Splits the diff that follows one commit header into per-file changes.
std::vector<FileChange> parse_commit_diff(std::string_view diff) {
    std::vector<FileChange> files;
    const auto lines = pysrc::split_lines(diff);
    std::size_t i = 0;
    while (i < lines.size()) {
        const std::string_view line = trim_eol(lines[i]);
        if (!starts_with(line, "diff --git ")) {
            ++i;
            continue;
        }
        FileChange change;
        std::string minus_path, plus_path;
        // "diff --git a/x b/y" fallback when no ---/+++ lines follow (pure rename, mode change).
        const std::string_view header = line.substr(11);
        if (const auto b = header.rfind(" b/"); b != std::string_view::npos) {
            minus_path = strip_side_prefix(header.substr(0, b));
            plus_path = strip_side_prefix(header.substr(b + 1));
        }
        ++i;
        std::string diff_body;
        while (i < lines.size() && !starts_with(lines[i], "diff --git ")) {
            const std::string_view l = trim_eol(lines[i]);
            if (starts_with(l, "new file mode")) change.status = ChangeStatus::added;
            else if (starts_with(l, "deleted file mode")) change.status = ChangeStatus::deleted;
            else if (starts_with(l, "rename from ")) {
                minus_path = std::string(l.substr(12));
                change.status = ChangeStatus::renamed;
            } else if (starts_with(l, "rename to ")) plus_path = std::string(l.substr(10));
            else if (starts_with(l, "--- ")) {
                if (l.substr(4) != "/dev/null") minus_path = strip_side_prefix(l.substr(4));
            } else if (starts_with(l, "+++ ")) {
                if (l.substr(4) != "/dev/null") plus_path = strip_side_prefix(l.substr(4));
            } else if (starts_with(l, "@@")) {
                break;
            }
            ++i;
        }
        while (i < lines.size() && !starts_with(lines[i], "diff --git ")) diff_body.append(lines[i++]);
        change.hunks = parse_hunks(diff_body);
        if (change.status == ChangeStatus::deleted) {
            change.path = minus_path;
        } else {
            change.path = plus_path;
            if (change.status == ChangeStatus::renamed) change.old_path = minus_path;
        }
        files.push_back(std::move(change));
    }
    return files;
}

}  // namespace

std::vector<Hunk> parse_hunks(std::string_view diff) {
    std::vector<Hunk> hunks;
    for (const auto raw : pysrc::split_lines(diff)) {
        const std::string_view line = trim_eol(raw);
        if (starts_with(line, "@@ ")) {
            // @@ -a,b +c,d @@ optional context
            const auto minus = line.find('-');
            const auto plus = line.find(" +", minus);
            const auto close = line.find(" @@", plus);
            if (minus == std::string_view::npos || plus == std::string_view::npos || close == std::string_view::npos) {
                throw Error(ErrorKind::parse, "bad hunk header \"" + std::string(line) + "\"");
            }
            Hunk h;
            std::tie(h.old_start, h.old_len) = parse_range(line.substr(minus + 1, plus - minus - 1));
            std::tie(h.new_start, h.new_len) = parse_range(line.substr(plus + 2, close - plus - 2));
            h.text = std::string(raw);
            if (h.text.empty() || h.text.back() != '\n') h.text.push_back('\n');
            hunks.push_back(std::move(h));
        } else if (!hunks.empty() && !line.empty() &&
                   (line.front() == '-' || line.front() == '+' || line.front() == ' ' || line.front() == '\\')) {
            hunks.back().text.append(raw);
            if (hunks.back().text.back() != '\n') hunks.back().text.push_back('\n');
        }
    }
    return hunks;
}

std::vector<Commit> parse_git_log(std::string_view output) {
    std::vector<Commit> commits;
    std::size_t pos = output.find(kRecordStart);
    while (pos != std::string_view::npos) {
        const std::size_t next = output.find(kRecordStart, pos + 1);
        const std::string_view record = output.substr(pos + 1, next == std::string_view::npos ? next : next - pos - 1);
        const auto f1 = record.find(kFieldSep);
        const auto f2 = record.find(kFieldSep, f1 + 1);
        const auto end = record.find(kHeaderEnd, f2 + 1);
        if (f1 == std::string_view::npos || f2 == std::string_view::npos || end == std::string_view::npos) {
            throw Error(ErrorKind::parse, "git log: malformed commit record");
        }
        Commit c;
        c.hash = std::string(record.substr(0, f1));
        c.date = parse_timestamp(record.substr(f1 + 1, f2 - f1 - 1));
        std::string_view message = record.substr(f2 + 1, end - f2 - 1);
        while (!message.empty() && (message.back() == '\n' || message.back() == ' ')) message.remove_suffix(1);
        c.message = std::string(message);
        c.files = parse_commit_diff(record.substr(end + 1));
        commits.push_back(std::move(c));
        pos = next;
    }
    return commits;
}

std::vector<Commit> GitCommitLog::commits() const {
    const std::vector<std::string> argv = {
        "git", "-C", repo_.string(), "-c", "core.quotePath=false", "log", "--first-parent",
        "--diff-merges=first-parent", "--reverse", "-p", "-U0", "-M", "--no-color", "--no-ext-diff",
        "--format=%x1e%H%x1f%at%x1f%B%x1d", tip_, "--"};
    const auto result = run_process(argv);
    if (result.exit_status != 0) {
        throw Error(ErrorKind::io, "git log failed in " + repo_.string() + ": " + result.err);
    }
    return parse_git_log(result.out);
}

std::vector<Commit> JsonlCommitLog::commits() const {
    std::vector<Commit> commits;
    for (const auto& record : read_jsonl(path_)) {
        try {
            commits.push_back(record.get<Commit>());
        } catch (const Json::exception& e) {
            throw Error(ErrorKind::parse, path_.string() + ": commit " + record.value("hash", "?") + ": " + e.what());
        }
    }
    std::stable_sort(commits.begin(), commits.end(), [](const Commit& a, const Commit& b) { return a.date < b.date; });
    return commits;
}

std::optional<std::size_t> find_commit(std::span<const Commit> commits, std::string_view hash) {
    for (std::size_t i = 0; i < commits.size(); ++i) {
        if (commits[i].hash == hash) return i;
    }
    return std::nullopt;
}

std::span<const Commit> history_until(std::span<const Commit> commits, std::string_view hash) {
    const auto index = find_commit(commits, hash);
    if (!index) throw Error(ErrorKind::not_found, "commit " + std::string(hash) + " not in history");
    return commits.first(*index + 1);
}

std::string_view to_string(ChangeStatus status) noexcept {
    switch (status) {
        case ChangeStatus::added: return "added";
        case ChangeStatus::modified: return "modified";
        case ChangeStatus::deleted: return "deleted";
        case ChangeStatus::renamed: return "renamed";
    }
    return "modified";
}

void to_json(Json& j, const Hunk& hunk) {
    j = Json{{"old_start", hunk.old_start}, {"old_len", hunk.old_len}, {"new_start", hunk.new_start},
             {"new_len", hunk.new_len}, {"text", hunk.text}};
}

void from_json(const Json& j, Hunk& hunk) {
    j.at("old_start").get_to(hunk.old_start);
    j.at("old_len").get_to(hunk.old_len);
    j.at("new_start").get_to(hunk.new_start);
    j.at("new_len").get_to(hunk.new_len);
    hunk.text = j.value("text", "");
}

void to_json(Json& j, const FileChange& change) {
    j = Json{{"path", change.path}, {"status", to_string(change.status)}, {"hunks", change.hunks}};
    if (change.old_path) j["old_path"] = *change.old_path;
}

void from_json(const Json& j, FileChange& change) {
    j.at("path").get_to(change.path);
    change.old_path.reset();
    if (const auto it = j.find("old_path"); it != j.end() && !it->is_null()) change.old_path = it->get<std::string>();
    change.status = j.contains("status") ? parse_status(j.at("status").get<std::string>())
                                         : (change.old_path ? ChangeStatus::renamed : ChangeStatus::modified);
    change.hunks = j.value("hunks", std::vector<Hunk>{});
}

void to_json(Json& j, const Commit& commit) {
    j = Json{{"hash", commit.hash}, {"date", format_timestamp(commit.date)}, {"message", commit.message},
             {"files", commit.files}};
}

void from_json(const Json& j, Commit& commit) {
    j.at("hash").get_to(commit.hash);
    const auto& date = j.at("date");
    commit.date = date.is_number_integer() ? date.get<Timestamp>() : parse_timestamp(date.get<std::string>());
    commit.message = j.value("message", "");
    commit.files = j.value("files", std::vector<FileChange>{});
}

}  // namespace layerfix::repo
