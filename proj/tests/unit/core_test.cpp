#include <doctest.h>

#include <algorithm>
#include <functional>
#include <random>
#include <thread>

#include "layerfix/core/error.hpp"
#include "layerfix/core/json.hpp"
#include "layerfix/core/manifest.hpp"
#include "layerfix/core/process.hpp"
#include "layerfix/core/timestamp.hpp"
#include "support/support.hpp"

using namespace layerfix;
using layerfix::testing::TempDir;

namespace {

const std::string kHeader = R"({"format":"layerfix-manifest","version":1})";

std::string record(const std::string& id, const std::string& type = "ProgramAnomaly", int start = 3, int end = 6) {
    return Json{{"bug_id", id},
                {"project", "demo"},
                {"buggy_commit", std::string(40, 'a')},
                {"fix_commit", std::string(40, 'b')},
                {"span", {{"file_path", "pkg/mod.py"}, {"qualified_name", "f"}, {"start_line", start}, {"end_line", end}}},
                {"failing_tests", {"tests/test_mod.py::test_f"}},
                {"bug_type", type}}
        .dump();
}

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an Error");
    return ErrorKind::io;
}

std::string message_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("empty manifest with a header loads as an empty list") {
    CHECK(parse_manifest(kHeader + "\n").empty());
}

TEST_CASE("manifest records come back sorted by bug_id") {
    const auto bugs = parse_manifest(kHeader + "\n" + record("zeta-2") + "\n" + record("alpha-1") + "\n");
    REQUIRE(bugs.size() == 2);
    CHECK(bugs[0].bug_id == "alpha-1");
    CHECK(bugs[1].bug_id == "zeta-2");
    CHECK(bugs[0].span.start_line == 3);
    CHECK_FALSE(bugs[0].issue_title.has_value());
}

TEST_CASE("manifest validation names the bug and the field") {
    SUBCASE("inverted span") {
        const auto msg = message_of([] { parse_manifest(kHeader + "\n" + record("bad-1", "Network", 7, 6)); });
        CHECK(msg.find("bad-1") != std::string::npos);
        CHECK(msg.find("FunctionSpan") != std::string::npos);
    }
    SUBCASE("unknown bug type") {
        const auto msg = message_of([] { parse_manifest(kHeader + "\n" + record("bad-2", "Cosmic")); });
        CHECK(msg.find("bug_type") != std::string::npos);
    }
    SUBCASE("duplicate ids") {
        CHECK(kind_of([] { parse_manifest(kHeader + "\n" + record("d") + "\n" + record("d")); }) ==
              ErrorKind::validation);
    }
    SUBCASE("missing header") {
        CHECK(kind_of([] { parse_manifest(record("x") + "\n"); }) == ErrorKind::parse);
    }
    SUBCASE("short commit hash") {
        auto j = Json::parse(record("short"));
        j["fix_commit"] = "abc123";
        CHECK(message_of([&] { parse_manifest(kHeader + "\n" + j.dump()); }).find("fix_commit") != std::string::npos);
    }
    SUBCASE("identical commits") {
        auto j = Json::parse(record("same"));
        j["fix_commit"] = j["buggy_commit"];
        CHECK(kind_of([&] { parse_manifest(kHeader + "\n" + j.dump()); }) == ErrorKind::validation);
    }
    SUBCASE("empty failing tests") {
        auto j = Json::parse(record("nofail"));
        j["failing_tests"] = Json::array();
        CHECK(message_of([&] { parse_manifest(kHeader + "\n" + j.dump()); }).find("failing_tests") != std::string::npos);
    }
    SUBCASE("case kind mismatch") {
        auto j = Json::parse(record("kinds"));
        j["runtime_cases"] = Json::array({{{"kind", "angelic"}, {"variables", {{{"name", "x"}, {"value", "1"}, {"type_name", "int"}}}}}});
        CHECK(message_of([&] { parse_manifest(kHeader + "\n" + j.dump()); }).find("runtime_cases") != std::string::npos);
    }
}

TEST_CASE("manifest serialization round-trips") {
    const auto bugs = load_manifest(testing::fixture_dir() / "manifest_availability.jsonl");
    REQUIRE(bugs.size() == 4);
    CHECK(parse_manifest(serialize_manifest(bugs)) == bugs);

    TempDir dir;
    save_manifest(dir.path() / "m.jsonl", bugs);
    CHECK(load_manifest(dir.path() / "m.jsonl") == bugs);
}

TEST_CASE("optional issue text stays absent rather than empty") {
    const auto bugs = load_manifest(testing::fixture_dir() / "manifest_escalation.jsonl");
    const auto with_issue = std::find_if(bugs.begin(), bugs.end(), [](const auto& b) { return b.bug_id == "shopkit-1"; });
    const auto without = std::find_if(bugs.begin(), bugs.end(), [](const auto& b) { return b.bug_id == "shopkit-2"; });
    CHECK(with_issue->issue_title.has_value());
    CHECK_FALSE(without->issue_title.has_value());
    CHECK_FALSE(without->issue_body.has_value());
    CHECK(Json(*without)["issue_title"].is_null());
}

TEST_CASE("taxonomy counts") {
    SUBCASE("empty list gives all-zero map over the nine labels") {
        const auto counts = taxonomy_counts({});
        CHECK(counts.size() == 9);
        for (const auto& [type, count] : counts) CHECK(count == 0);
    }
    SUBCASE("three network bugs") {
        std::vector<BugInstance> bugs;
        for (const char* id : {"n1", "n2", "n3"}) bugs.push_back(bug_from_json(Json::parse(record(id, "Network"))));
        const auto counts = taxonomy_counts(bugs);
        CHECK(counts.at(BugType::network) == 3);
        CHECK(counts.at(BugType::program_anomaly) == 0);
    }
    SUBCASE("reference distribution and permutation invariance") {
        const std::vector<std::pair<const char*, int>> table = {{"ProgramAnomaly", 187}, {"Network", 47},
                                                                {"Configuration", 34},  {"GuiRelated", 28},
                                                                {"Performance", 16},    {"PermissionDeprecation", 2}};
        std::vector<BugInstance> bugs;
        int serial = 0;
        for (const auto& [label, count] : table) {
            for (int i = 0; i < count; ++i) bugs.push_back(bug_from_json(Json::parse(record("b" + std::to_string(serial++), label))));
        }
        CHECK(bugs.size() == 314);
        const auto counts = taxonomy_counts(bugs);
        for (const auto& [label, count] : table) CHECK(counts.at(*parse_bug_type(label)) == count);
        CHECK(counts.at(BugType::security) == 0);

        std::mt19937 rng(7);
        for (int round = 0; round < 5; ++round) {
            std::shuffle(bugs.begin(), bugs.end(), rng);
            CHECK(taxonomy_counts(bugs) == counts);
        }
    }
}

TEST_CASE("every bug type label round-trips") {
    for (const auto type : kAllBugTypes) CHECK(parse_bug_type(to_string(type)) == type);
    CHECK_FALSE(parse_bug_type("programanomaly").has_value());
}

TEST_CASE("repair outcome invariants and attempt references") {
    CHECK_THROWS_AS(validate(RepairOutcome{"b", Layer::bug, 0, 0, {}}), Error);
    CHECK_THROWS_AS(validate(RepairOutcome{"b", Layer::bug, 10, 11, {}}), Error);
    CHECK_NOTHROW(validate(RepairOutcome{"b", Layer::bug, 10, 10, {}}));
    CHECK(attempt_ref("shopkit-1", Layer::repository, 4) == "shopkit-1/L2/4");
    const RepairOutcome outcome{"b", Layer::project, 10, 3, {"b/L3/0"}};
    CHECK(Json(outcome).get<RepairOutcome>() == outcome);
    CHECK(parse_layer("L3") == Layer::project);
    CHECK_FALSE(parse_layer("L4").has_value());
}

TEST_CASE("timestamps") {
    CHECK(parse_timestamp("1970-01-01") == 0);
    CHECK(parse_timestamp("2023-07-01T09:00:00Z") == 1688202000);
    CHECK(parse_timestamp("2023-07-01 11:00:00+02:00") == 1688202000);
    CHECK(parse_timestamp("2023-07-01T09:00:00.250Z") == 1688202000);
    CHECK(parse_timestamp("1688202000") == 1688202000);
    CHECK(format_timestamp(1688202000) == "2023-07-01T09:00:00Z");
    CHECK(parse_timestamp(format_timestamp(-86400)) == -86400);
    CHECK_THROWS_AS(parse_timestamp("2023-13-01"), Error);
    CHECK_THROWS_AS(parse_timestamp("yesterday"), Error);
}

TEST_CASE("jsonl files") {
    TempDir dir;
    const auto path = dir.path() / "nested" / "log.jsonl";
    {
        JsonlAppender out(path);
        std::vector<std::jthread> writers;
        for (int t = 0; t < 4; ++t) {
            writers.emplace_back([&out, t] {
                for (int i = 0; i < 50; ++i) out.append(Json{{"t", t}, {"i", i}});
            });
        }
    }
    const auto records = read_jsonl(path);
    CHECK(records.size() == 200);

    write_file(dir.path() / "broken.jsonl", "{\"a\":1}\n\n{oops\n");
    const auto msg = message_of([&] { read_jsonl(dir.path() / "broken.jsonl"); });
    CHECK(msg.find("3") != std::string::npos);
    CHECK(kind_of([&] { read_file(dir.path() / "absent.txt"); }) == ErrorKind::io);
}

TEST_CASE("child processes") {
    SUBCASE("output and exit status") {
        const auto out = run_process({"sh", "-c", "cat; echo err >&2; exit 3"}, "hello");
        CHECK(out.exit_status == 3);
        CHECK(out.out == "hello");
        CHECK(out.err == "err\n");
        CHECK_FALSE(out.timed_out);
    }
    SUBCASE("timeout kills the process group") {
        const auto start = std::chrono::steady_clock::now();
        const auto out = run_process({"sh", "-c", "sleep 5 & sleep 5"}, {}, std::chrono::milliseconds(200));
        CHECK(out.timed_out);
        CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(3));
    }
    SUBCASE("missing executable") {
        CHECK_THROWS_AS(run_process({"definitely-not-a-command-xyz"}), Error);
    }
    SUBCASE("line channel") {
        LineChannel channel({"sh", "-c", "while read line; do echo \"got $line\"; done"});
        channel.send("one");
        CHECK(channel.receive(std::chrono::seconds(5)) == "got one");
        channel.send("two");
        CHECK(channel.receive(std::chrono::seconds(5)) == "got two");
        CHECK_FALSE(channel.receive(std::chrono::milliseconds(100)).has_value());
        channel.terminate();
        CHECK_FALSE(channel.alive());
    }
}
