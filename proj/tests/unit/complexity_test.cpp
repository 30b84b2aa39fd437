#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "layerfix/complexity/complexity.hpp"
#include "layerfix/core/error.hpp"
#include "layerfix/core/json.hpp"
#include "layerfix/pysrc/module_scan.hpp"
#include "support/support.hpp"

using namespace layerfix;
using namespace layerfix::complexity;
namespace lt = layerfix::testing;

TEST_CASE("cyclomatic complexity matches the parse-tree oracle on the corpus") {
    const auto dir = lt::fixture_dir() / "complexity";
    const auto source = read_file(dir / "corpus.py");
    const auto expected = Json::parse(read_file(dir / "cyclomatic_expected.json"));
    const auto scan = pysrc::scan_module(source);
    int checked = 0;
    for (const auto& def : scan.definitions) {
        if (def.depth != 0) continue;
        INFO(def.name);
        REQUIRE(expected.contains(def.name));
        const auto body = pysrc::slice_lines(source, def.start_line, def.end_line);
        CHECK(cyclomatic_complexity(body) == expected.at(def.name).get<int>());
        ++checked;
    }
    CHECK(checked == 50);
    CHECK(expected.size() == 50);
}

TEST_CASE("cyclomatic complexity of small shapes") {
    CHECK(cyclomatic_complexity("def f(a):\n    return a\n") == 1);
    CHECK(cyclomatic_complexity("def f(a):\n    if a:\n        return 1\n    else:\n        return 2\n") == 2);
    CHECK(cyclomatic_complexity("def f(xs):\n    for x in xs:\n        if x and x > 1:\n            pass\n") == 4);
    CHECK(cyclomatic_complexity("def f(xs):\n    return [x for x in xs]\n") == 1);
    CHECK(cyclomatic_complexity("    def m(self):\n        while self.x:\n            pass\n") == 2);
}

TEST_CASE("match guards are not decision points while variables named case are ordinary") {
    const std::string with_match =
        "def f(cmd):\n"
        "    match cmd:\n"
        "        case [x] if x > 0:\n"
        "            return x\n"
        "        case _:\n"
        "            return 0\n";
    CHECK(cyclomatic_complexity(with_match) == 1);
    CHECK(cyclomatic_complexity("def f(case):\n    case = 1 if case else 2\n    return case\n") == 2);
}

TEST_CASE("halstead measures of a single assignment") {
    const auto counts = halstead_counts("a = b + b\n");
    CHECK(counts.distinct_operators == 2);
    CHECK(counts.distinct_operands == 2);
    CHECK(counts.total_operators == 2);
    CHECK(counts.total_operands == 3);
    const auto h = halstead("a = b + b\n");
    CHECK(h.volume == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(h.difficulty == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(h.effort == doctest::Approx(15.0).epsilon(1e-12));
}

TEST_CASE("halstead token classes") {
    auto tok = [](pysrc::TokenKind kind, std::string text) {
        pysrc::Token t;
        t.kind = kind;
        t.text = std::move(text);
        return t;
    };
    using K = pysrc::TokenKind;
    CHECK(classify(tok(K::name, "return")) == HalsteadClass::operator_token);
    CHECK(classify(tok(K::name, "None")) == HalsteadClass::operand);
    CHECK(classify(tok(K::name, "price")) == HalsteadClass::operand);
    CHECK(classify(tok(K::number, "1.5")) == HalsteadClass::operand);
    CHECK(classify(tok(K::string, "'x'")) == HalsteadClass::operand);
    CHECK(classify(tok(K::op, "+=")) == HalsteadClass::operator_token);
    CHECK(classify(tok(K::op, ".")) == HalsteadClass::operator_token);
    CHECK(classify(tok(K::op, "(")) == HalsteadClass::neither);
    CHECK(classify(tok(K::op, ",")) == HalsteadClass::neither);
    CHECK(classify(tok(K::op, "...")) == HalsteadClass::operand);
    CHECK(classify(tok(K::comment, "# x")) == HalsteadClass::neither);
    CHECK(classify(tok(K::newline, "")) == HalsteadClass::neither);
}

TEST_CASE("halstead is zero without operators or operands") {
    const auto h = halstead("x\n");
    CHECK(h.volume == 0.0);
    CHECK(h.difficulty == 0.0);
    CHECK(h.effort == 0.0);
}

TEST_CASE("maintainability index") {
    CHECK(maintainability_index(1.0, 1, 1) == doctest::Approx(100.0 * (171.0 - 0.23) / 171.0).epsilon(1e-12));
    CHECK(maintainability_index(1.0, 1, 1) == doctest::Approx(99.8655).epsilon(1e-5));
    CHECK(maintainability_index(100.0, 5, 20) == doctest::Approx(56.94).epsilon(1e-4));
    CHECK(maintainability_index(0.0, 1, 1) == maintainability_index(1.0, 1, 1));
    CHECK(maintainability_index(1e12, 500, 100000) == 0.0);
    CHECK_THROWS_AS(maintainability_index(-1.0, 1, 1), Error);
    CHECK_THROWS_AS(maintainability_index(1.0, 0, 1), Error);
    CHECK_THROWS_AS(maintainability_index(1.0, 1, 0), Error);
}

TEST_CASE("source lines skip blanks and comment-only lines") {
    const std::string src =
        "def f(x):\n"
        "    # note\n"
        "\n"
        "    s = '''a\n"
        "\n"
        "b'''\n"
        "    return s  # tail\n";
    CHECK(source_lines(src) == 4);
}

TEST_CASE("profile bundles every metric") {
    const std::string src = "def f(a, b):\n    if a > b:\n        return a\n    return b\n";
    const auto p = profile(src);
    CHECK(p.cyclomatic == 2);
    CHECK(p.sloc == 4);
    const auto h = halstead(src);
    CHECK(p.halstead_volume == h.volume);
    CHECK(p.maintainability_index == maintainability_index(h.volume, 2, 4));
    CHECK_THROWS_AS(profile("def f(:\n"), Error);
}

TEST_CASE("group comparison reports one row per metric") {
    ComplexityProfile low;
    low.cyclomatic = 1;
    ComplexityProfile high;
    high.cyclomatic = 3;
    const std::vector<ComplexityProfile> fixed{low, low, high};
    const std::vector<ComplexityProfile> unresolved{high, high, low};
    const auto rows = compare_groups(fixed, unresolved);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0].metric == Metric::cyclomatic);
    CHECK(rows[0].fixed_mean == doctest::Approx(5.0 / 3.0));
    CHECK(rows[0].unresolved_mean == doctest::Approx(7.0 / 3.0));
    CHECK(rows[0].cohens_d < 0.0);
    CHECK(rows[0].u_test_p > 0.0);
    CHECK(rows[0].u_test_p <= 1.0);
    // Identical constant groups
    CHECK(rows[1].zero_variance);
    CHECK(rows[1].cohens_d == 0.0);

    const auto text = render_comparison(rows);
    CHECK(text.find("Cyclomatic Complexity") != std::string::npos);
    CHECK(text.find("(Unresolved>Fixed)") != std::string::npos);
    CHECK(text.find("Maintainability Index") != std::string::npos);

    const std::vector<ComplexityProfile> one{low};
    CHECK_THROWS_AS(compare_groups(one, unresolved), Error);
}

TEST_CASE("decision points inside f-string fields count") {
    CHECK(cyclomatic_complexity("def f(a):\n    return f\"{a if a else 0}\"\n") == 2);
    CHECK(cyclomatic_complexity("def f(a):\n    return f\"{{a if a else 0}}\"\n") == 1);
    CHECK(cyclomatic_complexity("def f(a, b):\n    return f'{a or b!r:>{10}} {[x for x in a if x]}'\n") == 3);
    CHECK(cyclomatic_complexity("def f(a):\n    return 'x if y else z'\n") == 1);
    CHECK(cyclomatic_complexity("def f(a):\n    return rf\"\"\"{a and a}\n{a}\"\"\"\n") == 2);
}
