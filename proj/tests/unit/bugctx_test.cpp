#include <doctest.h>

#include <string>
#include <vector>

#include "layerfix/bugctx/bug_context.hpp"
#include "layerfix/core/error.hpp"
#include "support/support.hpp"

using namespace layerfix;
using namespace layerfix::bugctx;
namespace lt = layerfix::testing;

namespace {

patch::SandboxResponse respond(std::vector<patch::TestResult> tests) {
    patch::SandboxResponse r;
    r.tests = std::move(tests);
    return r;
}

ValueCase numbered_case(int i) {
    ValueCase c;
    c.variables.push_back({"x", std::to_string(i), "int"});
    return c;
}

}  // namespace

TEST_CASE("buggy function lines come from the checkout") {
    const auto checkout = lt::fixture_checkout("shopkit");
    const auto src = extract_buggy_function(checkout, {"shopkit/money.py", "round_money", 6, 8});
    CHECK(src ==
          "def round_money(amount):\n"
          "    # truncates instead of rounding half up\n"
          "    return float(int(amount * 100)) / 100\n");
    try {
        (void)extract_buggy_function(checkout, {"shopkit/missing.py", "f", 1, 2});
        FAIL("expected not_found");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::not_found);
    }
    try {
        (void)extract_buggy_function(checkout, {"shopkit/money.py", "f", 6, 9999});
        FAIL("expected validation error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::validation);
    }
}

TEST_CASE("test sources are found from pytest and dotted ids") {
    lt::TempDir dir;
    write_file(dir.path() / "tests" / "test_mod.py",
               "import pytest\n"
               "\n"
               "\n"
               "def test_plain():\n"
               "    assert True\n"
               "\n"
               "\n"
               "class TestGroup:\n"
               "    @pytest.mark.parametrize('v', [1, 2])\n"
               "    def test_param(self, v):\n"
               "        assert v\n");
    write_file(dir.path() / "tests" / "__init__.py", "");
    repo::SourceTree tree(dir.path());
    CHECK(find_test_source(tree, "tests/test_mod.py::test_plain") == "def test_plain():\n    assert True\n");
    const std::string param =
        "    @pytest.mark.parametrize('v', [1, 2])\n"
        "    def test_param(self, v):\n"
        "        assert v\n";
    CHECK(find_test_source(tree, "tests/test_mod.py::TestGroup::test_param[1]") == param);
    CHECK(find_test_source(tree, "tests.test_mod.TestGroup.test_param") == param);
    CHECK(find_test_source(tree, "tests.test_mod.test_plain") == "def test_plain():\n    assert True\n");
    CHECK_FALSE(find_test_source(tree, "tests/test_mod.py::test_absent"));
    CHECK_FALSE(find_test_source(tree, "tests/nowhere.py::test_plain"));
    CHECK_FALSE(find_test_source(tree, "nowhere.test_plain"));
}

TEST_CASE("error capture follows the failing test order") {
    patch::FunctionSandbox sandbox([](const patch::SandboxJob& job) {
        CHECK_FALSE(job.patch.has_value());
        CHECK(job.timeout_s == 42.0);
        return respond({{"t2", false, "boom two"}, {"t1", false, "boom one\n"}, {"t3", true, ""}});
    });
    const auto capture = capture_error_info(sandbox, "/w", {"t1", "t2", "t3", "t4"}, 42.0);
    CHECK(capture.text == "t1\nboom one\n\nt2\nboom two\n");
    CHECK(capture.unexpectedly_passing == std::vector<std::string>{"t3"});
}

TEST_CASE("error capture maps sandbox failures") {
    auto failing_with = [](std::string status) {
        return patch::FunctionSandbox([status](const patch::SandboxJob&) {
            patch::SandboxResponse r;
            r.status = status;
            r.error = "detail";
            return r;
        });
    };
    auto crash = failing_with("crash");
    auto timeout = failing_with("timeout");
    try {
        (void)capture_error_info(crash, "/w", {"t"});
        FAIL("expected transport error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::transport);
    }
    try {
        (void)capture_error_info(timeout, "/w", {"t"});
        FAIL("expected sandbox error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::sandbox);
    }
}

TEST_CASE("value cases keep the first three in order") {
    std::vector<ValueCase> cases;
    for (int i = 0; i < 5; ++i) cases.push_back(numbered_case(i));
    const auto picked = select_value_cases(cases);
    REQUIRE(picked.size() == 3);
    CHECK(picked[2] == cases[2]);
    CHECK(select_value_cases(cases, 0).empty());
    CHECK(select_value_cases({cases[0]}, 3).size() == 1);
    try {
        (void)select_value_cases(cases, -1);
        FAIL("expected domain error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::domain);
    }
}

TEST_CASE("bug context for the shopkit discount bug") {
    const auto bug = lt::fixture_bug("manifest_escalation.jsonl", "shopkit-1");
    const auto checkout = lt::fixture_checkout("shopkit");
    patch::FunctionSandbox sandbox([](const patch::SandboxJob& job) {
        return respond({{job.tests.at(0), false, "E       assert 25.0 == 75.0"}});
    });
    const auto ctx = assemble_bug_context(bug, checkout, &sandbox);
    CHECK(ctx.buggy_source.rfind("def apply_discount(price, rate, country=\"DE\"):\n", 0) == 0);
    CHECK(ctx.imports == std::vector<std::string>{"import logging", "import shopkit.tax",
                                                  "from shopkit.util import clamp as _clamp",
                                                  "from .money import round_money"});
    REQUIRE(ctx.failing_test_sources.size() == 1);
    CHECK(ctx.failing_test_sources[0].source ==
          "def test_apply_discount():\n    assert apply_discount(100.0, 0.25, country=\"XX\") == 75.0\n");
    CHECK(ctx.error_info == "tests/test_pricing.py::test_apply_discount\nE       assert 25.0 == 75.0\n");
    CHECK(ctx.runtime_cases.size() == 1);
    CHECK(ctx.angelic_cases.size() == 1);
    CHECK(ctx.issue_title == "Discounted price equals the discount itself");

    const Json j = ctx;
    CHECK(j.get<BugContext>() == ctx);

    const auto offline = assemble_bug_context(bug, checkout, nullptr);
    CHECK_FALSE(offline.error_info.has_value());
}

TEST_CASE("manifest error info wins over live capture") {
    const auto bug = lt::fixture_bug("manifest_escalation.jsonl", "shopkit-2");
    int jobs = 0;
    patch::FunctionSandbox sandbox([&](const patch::SandboxJob&) {
        ++jobs;
        return respond({});
    });
    const auto ctx = assemble_bug_context(bug, lt::fixture_checkout("shopkit"), &sandbox);
    CHECK(jobs == 0);
    CHECK(ctx.error_info == bug.error_info);
    CHECK(ctx.runtime_cases.empty());
    CHECK_FALSE(ctx.issue_title.has_value());
}
