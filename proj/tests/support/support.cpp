#include "support/support.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

#include "layerfix/core/error.hpp"
#include "layerfix/core/json.hpp"
#include "layerfix/core/manifest.hpp"

namespace layerfix::testing {

namespace fs = std::filesystem;

fs::path fixture_dir() { return LAYERFIX_FIXTURE_DIR; }
fs::path golden_dir() { return LAYERFIX_GOLDEN_DIR; }

TempDir::TempDir() {
    std::string pattern = (fs::temp_directory_path() / "layerfix-test-XXXXXX").string();
    if (mkdtemp(pattern.data()) == nullptr) throw Error(ErrorKind::io, "mkdtemp failed");
    path_ = pattern;
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

fs::path fixture_checkout(const std::string& project) { return fixture_dir() / project / "repo"; }

BugInstance fixture_bug(const std::string& manifest_name, const std::string& bug_id) {
    for (auto& bug : load_manifest(fixture_dir() / manifest_name)) {
        if (bug.bug_id == bug_id) return bug;
    }
    throw Error(ErrorKind::not_found, "no fixture bug " + bug_id);
}

pipeline::RunConfig fixture_config(const fs::path& dir, const std::string& manifest_name) {
    pipeline::RunConfig config;
    config.manifest = fixture_dir() / manifest_name;
    config.repos_root = dir / "repos";
    config.project_data_root = fixture_dir() / "project_data";
    config.output_dir = dir / "out";
    config.template_dir = pipeline::default_template_dir();
    config.parallelism = 2;
    for (const auto& bug : load_manifest(config.manifest)) {
        const auto target = config.repos_root / bug.bug_id;
        if (fs::exists(target)) continue;
        fs::create_directories(target);
        fs::copy(fixture_checkout(bug.project), target, fs::copy_options::recursive);
    }
    return config;
}

std::unique_ptr<llm::ScriptedProvider> escalation_provider() {
    return llm::ScriptedProvider::from_json(Json::parse(read_file(fixture_dir() / "mock_escalation.json")));
}

std::unique_ptr<patch::ScriptedSandbox> escalation_sandbox() {
    std::vector<std::string> failing;
    for (const auto& bug : load_manifest(fixture_dir() / "manifest_availability.jsonl")) {
        failing.insert(failing.end(), bug.failing_tests.begin(), bug.failing_tests.end());
    }
    using Outcome = patch::ScriptedSandbox::Outcome;
    return std::make_unique<patch::ScriptedSandbox>(
        failing, std::vector<patch::ScriptedSandbox::Rule>{{"FIX-A", Outcome::pass_all}, {"FIX-B", Outcome::pass_all}});
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::vector<std::string> lines;
    std::ifstream in(path);
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    std::sort(lines.begin(), lines.end());
    return lines;
}

}  // namespace layerfix::testing
