#include <doctest.h>

#include <string>

#include "layerfix/core/error.hpp"
#include "layerfix/pipeline/config.hpp"
#include "support/support.hpp"

using namespace layerfix;
using namespace layerfix::pipeline;
namespace lt = layerfix::testing;

namespace {

void check_config_error(const RunConfig& c, const std::string& fragment) {
    try {
        validate(c);
        FAIL("expected config error mentioning " << fragment);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::config);
        CHECK(std::string(e.what()).find(fragment) != std::string::npos);
    }
}

}  // namespace

TEST_CASE("defaults match the evaluation protocol") {
    const RunConfig c;
    CHECK(c.n == 10);
    CHECK(c.ks == std::vector<int>{1, 3, 5});
    CHECK(c.temperature == 0.8);
    CHECK(c.top_n == 5);
    CHECK(c.chunk_size == 1000);
    CHECK(c.chunk_overlap == 200);
    CHECK(c.top_k == 5);
}

TEST_CASE("config validation names the violated constraint") {
    lt::TempDir dir;
    const auto good = lt::fixture_config(dir.path(), "manifest_escalation.jsonl");
    CHECK_NOTHROW(validate(good));

    auto c = good;
    c.ks = {1, 11};
    check_config_error(c, "k=11");
    c = good;
    c.chunk_overlap = c.chunk_size;
    check_config_error(c, "chunk_size");
    c = good;
    c.provider = "other";
    check_config_error(c, "provider");
    c = good;
    c.manifest = dir.path() / "none.jsonl";
    check_config_error(c, "manifest not found");
    c = good;
    c.template_dir = dir.path();
    check_config_error(c, "prompt template");
    c = good;
    c.output_dir.clear();
    check_config_error(c, "output directory");
}

TEST_CASE("config files resolve paths against their directory and round-trip") {
    lt::TempDir dir;
    const auto base = lt::fixture_config(dir.path(), "manifest_escalation.jsonl");
    write_file(dir.path() / "run.json", R"({"manifest": ")" + base.manifest.string() +
                                            R"(", "repos_root": "repos", "output_dir": "out", "n": 4, "ks": [1, 3],
                                            "sandbox_command": ["python3", "agent.py"]})");
    const auto c = load_config(dir.path() / "run.json");
    CHECK(c.repos_root == dir.path() / "repos");
    CHECK(c.output_dir == dir.path() / "out");
    CHECK(c.manifest == base.manifest);
    CHECK(c.n == 4);
    CHECK(c.ks == std::vector<int>{1, 3});
    CHECK(c.template_dir == default_template_dir());
    CHECK(c.sandbox_command == std::vector<std::string>{"python3", "agent.py"});
    CHECK_NOTHROW(validate(c));

    const auto again = config_from_json(config_to_json(c));
    CHECK(config_to_json(again) == config_to_json(c));

    try {
        (void)config_from_json(Json::parse(R"({"n": "ten"})"));
        FAIL("expected config error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::config);
    }
}
