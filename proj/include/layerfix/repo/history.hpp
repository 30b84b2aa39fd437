#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "layerfix/core/json.hpp"
#include "layerfix/core/timestamp.hpp"

namespace layerfix::repo {

/// One zero-context hunk. For a pure insertion old_len is 0 and old_start is
/// the line after which text was inserted; symmetrically for deletions.
struct Hunk {
    int old_start = 0;
    int old_len = 0;
    int new_start = 0;
    int new_len = 0;
    std::string text;  // "@@" header plus -/+ lines

    bool operator==(const Hunk&) const = default;
};

enum class ChangeStatus { added, modified, deleted, renamed };

struct FileChange {
    std::string path;  // path after the commit (before it, for deletions)
    std::optional<std::string> old_path;  // set for renames
    ChangeStatus status = ChangeStatus::modified;
    std::vector<Hunk> hunks;

    bool operator==(const FileChange&) const = default;
};

struct Commit {
    std::string hash;
    Timestamp date = 0;  // author date
    std::string message;
    std::vector<FileChange> files;

    bool operator==(const Commit&) const = default;
};

/// Source of version-control history. Implementations return commits oldest
/// first, each carrying its per-file hunks.
class CommitLog {
public:
    virtual ~CommitLog() = default;
    virtual std::vector<Commit> commits() const = 0;
};

/// History exported as line-delimited JSON, one commit per line:
/// {"hash", "date", "message", "files": [{"path", "old_path"?, "status"?, "hunks": [...]}]}
class JsonlCommitLog final : public CommitLog {
public:
    explicit JsonlCommitLog(std::filesystem::path path) : path_(std::move(path)) {}
    std::vector<Commit> commits() const override;

private:
    std::filesystem::path path_;
};

/// First-parent history of a local git checkout up to and including `tip`.
class GitCommitLog final : public CommitLog {
public:
    GitCommitLog(std::filesystem::path repo, std::string tip) : repo_(std::move(repo)), tip_(std::move(tip)) {}
    std::vector<Commit> commits() const override;

private:
    std::filesystem::path repo_;
    std::string tip_;
};

/// Parses the output of `git log -p -U0 -M --format=<record format>` as
/// produced by GitCommitLog. Exposed for testing.
std::vector<Commit> parse_git_log(std::string_view output);

/// Hunk headers and bodies of a zero-context unified diff for one file.
std::vector<Hunk> parse_hunks(std::string_view diff);

/// Commits up to and including `hash`. Error{not_found} if absent.
std::span<const Commit> history_until(std::span<const Commit> commits, std::string_view hash);

/// Index of `hash` in `commits`, if present.
std::optional<std::size_t> find_commit(std::span<const Commit> commits, std::string_view hash);

std::string_view to_string(ChangeStatus status) noexcept;

void to_json(Json& j, const Hunk& hunk);
void from_json(const Json& j, Hunk& hunk);
void to_json(Json& j, const FileChange& change);
void from_json(const Json& j, FileChange& change);
void to_json(Json& j, const Commit& commit);
void from_json(const Json& j, Commit& commit);

}  // namespace layerfix::repo
