#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "layerfix/core/json.hpp"
#include "layerfix/core/types.hpp"

namespace layerfix {

/// First line of every manifest file.
inline constexpr std::string_view kManifestFormat = "layerfix-manifest";
inline constexpr int kManifestVersion = 1;

/// Parses one manifest record, validating every BugInstance invariant.
BugInstance bug_from_json(const Json& record);

/// Loads a manifest: a header line followed by one BugInstance record per
/// line. Result is sorted by bug_id; duplicate ids are rejected.
std::vector<BugInstance> load_manifest(const std::filesystem::path& path);

void save_manifest(const std::filesystem::path& path, std::span<const BugInstance> bugs);
std::string serialize_manifest(std::span<const BugInstance> bugs);
std::vector<BugInstance> parse_manifest(std::string_view text);

/// Counts per label; every BugType key is present, zero when unused.
std::map<BugType, int> taxonomy_counts(std::span<const BugInstance> bugs);

}  // namespace layerfix
