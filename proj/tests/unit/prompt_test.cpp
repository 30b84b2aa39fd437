#include <doctest.h>

#include <cstdlib>
#include <string>
#include <vector>

#include "layerfix/core/error.hpp"
#include "layerfix/pipeline/pipeline.hpp"
#include "layerfix/prompt/prompt.hpp"
#include "support/support.hpp"

using namespace layerfix;
using namespace layerfix::prompt;
namespace lt = layerfix::testing;

namespace {

struct FixtureContexts {
    bugctx::BugContext bug;
    repo::RepoContext repo;
    project::ProjectContext project;
};

// Contexts exactly as the pipeline extracts them for a fixture bug.
FixtureContexts extracted(const std::string& bug_id) {
    lt::TempDir dir;
    auto config = lt::fixture_config(dir.path(), "manifest_escalation.jsonl");
    auto sandbox = lt::escalation_sandbox();
    retrieval::HashedTermEmbedder embedder(config.embedding_dimension);
    pipeline::Pipeline(config, {nullptr, sandbox.get(), &embedder}).extract();
    const auto bundle = Json::parse(read_file(config.output_dir / "contexts" / (bug_id + ".json")));
    return {bundle.at("bug_context").get<bugctx::BugContext>(), bundle.at("repo_context").get<repo::RepoContext>(),
            bundle.at("project_context").get<project::ProjectContext>()};
}

const PromptTemplate& shipped_template() {
    static const auto tmpl = load_prompt_template(pipeline::default_template_dir() / "prompt.txt");
    return tmpl;
}

// Set LAYERFIX_UPDATE_GOLDENS=1 to rewrite the files instead of comparing.
void check_golden(const std::string& name, const std::string& actual) {
    const auto path = lt::golden_dir() / name;
    if (const char* update = std::getenv("LAYERFIX_UPDATE_GOLDENS"); update != nullptr && std::string(update) == "1") {
        write_file(path, actual);
        return;
    }
    REQUIRE(std::filesystem::exists(path));
    CHECK(read_file(path) == actual);
}

std::vector<SectionId> ids(const Prompt& p) {
    std::vector<SectionId> out;
    for (const auto& s : p.sections) out.push_back(s.id);
    return out;
}

bugctx::BugContext sized_bug() {
    bugctx::BugContext bug;
    bug.buggy_source = "def f(x):\n    return x\n";
    bug.imports = {"import os"};
    bug.issue_title = "f is wrong";
    bug.issue_body = std::string(40, 'b');
    bug.failing_test_sources = {{"t.py::test_f", "def test_f():\n    assert f(1) == 2\n"}};
    bug.error_info = std::string(80, 'e');
    ValueCase runtime;
    runtime.variables = {{"x", "1", "int"}};
    bug.runtime_cases = {runtime};
    ValueCase angelic;
    angelic.kind = ValueKind::angelic;
    angelic.variables = {{"x", "2", "int"}};
    bug.angelic_cases = {angelic};
    return bug;
}

}  // namespace

TEST_CASE("template parsing") {
    const auto& tmpl = shipped_template();
    CHECK(tmpl.headers.size() == 12);
    CHECK(tmpl.headers.at(SectionId::buggy_function) == "Buggy function");
    CHECK(tmpl.preamble.find("triple backticks") != std::string::npos);
    CHECK_THROWS_AS(parse_prompt_template("[preamble]\nx\n[section nonsense]\ny\n"), Error);
    CHECK_THROWS_AS(parse_prompt_template("[section imports]\ny\n"), Error);
    for (auto id : kCanonicalOrder) CHECK(parse_section_id(to_string(id)) == id);
    CHECK_FALSE(parse_section_id("bogus"));
}

TEST_CASE("token estimate is a quarter of the code points rounded up") {
    CHECK(estimate_tokens("") == 0);
    CHECK(estimate_tokens("abcd") == 1);
    CHECK(estimate_tokens("abcde") == 2);
    CHECK(estimate_tokens("\xc3\xa9\xc3\xa9\xc3\xa9\xc3\xa9") == 1);
}

TEST_CASE("prompts for the fixture bugs equal their golden files") {
    for (const std::string bug_id : {"shopkit-1", "shopkit-2"}) {
        INFO(bug_id);
        const auto ctx = extracted(bug_id);
        const auto l1 = build_prompt(Layer::bug, shipped_template(), ctx.bug, nullptr, nullptr);
        const auto l2 = build_prompt(Layer::repository, shipped_template(), ctx.bug, &ctx.repo, nullptr);
        const auto l3 = build_prompt(Layer::project, shipped_template(), ctx.bug, &ctx.repo, &ctx.project);
        check_golden(bug_id + ".L1.txt", l1.render());
        check_golden(bug_id + ".L2.txt", l2.render());
        check_golden(bug_id + ".L3.txt", l3.render());

        // Layers are cumulative: each prompt starts with the previous layer's sections.
        const auto s1 = ids(l1);
        const auto s2 = ids(l2);
        const auto s3 = ids(l3);
        CHECK(std::equal(s1.begin(), s1.end(), s2.begin()));
        CHECK(std::equal(s2.begin(), s2.end(), s3.begin()));
        CHECK(l3.has(SectionId::doc_insights));
        CHECK(build_prompt(Layer::project, shipped_template(), ctx.bug, &ctx.repo, &ctx.project) == l3);
    }
}

TEST_CASE("layer and context arguments must agree") {
    const auto bug = sized_bug();
    repo::RepoContext repo;
    project::ProjectContext project;
    CHECK_THROWS_AS(build_prompt(Layer::bug, shipped_template(), bug, &repo, nullptr), Error);
    CHECK_THROWS_AS(build_prompt(Layer::repository, shipped_template(), bug, nullptr, nullptr), Error);
    CHECK_THROWS_AS(build_prompt(Layer::repository, shipped_template(), bug, &repo, &project), Error);
    CHECK_THROWS_AS(build_prompt(Layer::project, shipped_template(), bug, &repo, nullptr), Error);
}

TEST_CASE("budget enforcement drops sections in priority order") {
    const auto full = build_prompt(Layer::bug, shipped_template(), sized_bug(), nullptr, nullptr);
    const std::vector<SectionId> canonical{SectionId::imports,       SectionId::issue_description, SectionId::buggy_function,
                                           SectionId::failing_tests, SectionId::error_message,     SectionId::runtime_values,
                                           SectionId::angelic_values};
    REQUIRE(ids(full) == canonical);
    const std::vector<SectionId> expected_drops{SectionId::angelic_values, SectionId::runtime_values,
                                                SectionId::error_message,  SectionId::failing_tests,
                                                SectionId::issue_description, SectionId::imports};

    CHECK(enforce_budget(full, full.estimated_tokens()) == full);

    // Budget one token below each successive reduced prompt: exactly the next section goes.
    Prompt reduced = full;
    for (std::size_t dropped = 0; dropped < expected_drops.size(); ++dropped) {
        INFO(dropped);
        const auto budgeted = enforce_budget(full, reduced.estimated_tokens() - 1);
        std::erase_if(reduced.sections, [&](const Section& s) { return s.id == expected_drops[dropped]; });
        CHECK(budgeted == reduced);
        CHECK(budgeted.estimated_tokens() <= reduced.estimated_tokens());
    }
    REQUIRE(ids(reduced) == std::vector<SectionId>{SectionId::buggy_function});

    try {
        (void)enforce_budget(full, reduced.estimated_tokens() - 1);
        FAIL("expected unbudgetable");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::unbudgetable);
    }
}
