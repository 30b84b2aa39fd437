#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "layerfix/core/types.hpp"
#include "layerfix/llm/client.hpp"
#include "layerfix/patch/sandbox.hpp"
#include "layerfix/pipeline/config.hpp"

namespace layerfix::testing {

std::filesystem::path fixture_dir();
std::filesystem::path golden_dir();

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

/// fixtures/<project>/repo, the checkout shared by every bug of a project.
std::filesystem::path fixture_checkout(const std::string& project);

BugInstance fixture_bug(const std::string& manifest_name, const std::string& bug_id);

/// Run configuration over a fixture manifest: checkouts copied to
/// <dir>/repos/<bug_id>, output in <dir>/out, fixture project data.
pipeline::RunConfig fixture_config(const std::filesystem::path& dir, const std::string& manifest_name);

/// Scripted model for the three-bug escalation scenario.
std::unique_ptr<llm::ScriptedProvider> escalation_provider();

/// Sandbox failing every fixture bug's tests until a FIX-A / FIX-B patch.
std::unique_ptr<patch::ScriptedSandbox> escalation_sandbox();

/// Sorted lines of a text file; empty when the file is absent.
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace layerfix::testing
