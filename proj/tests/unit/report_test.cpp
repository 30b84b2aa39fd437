#include <doctest.h>

#include <cmath>

#include "layerfix/core/error.hpp"
#include "layerfix/eval/metrics.hpp"
#include "layerfix/eval/report.hpp"

using namespace layerfix;
using namespace layerfix::eval;

namespace {

BugInstance bug(const std::string& id, BugType type = BugType::program_anomaly) {
    BugInstance b;
    b.bug_id = id;
    b.bug_type = type;
    return b;
}

const std::vector<int> kKs = {1, 3, 5};

}  // namespace

TEST_CASE("layer bookkeeping over a 314-bug run") {
    std::vector<BugInstance> bugs;
    std::vector<RepairOutcome> outcomes;
    for (int i = 0; i < 314; ++i) {
        const std::string id = "b" + std::to_string(1000 + i);
        bugs.push_back(bug(id));
        // 207 fixed at L1, 28 more at L2, 15 more at L3.
        outcomes.push_back({id, Layer::bug, 10, i < 207 ? 2 : 0, {}});
        if (i >= 207) outcomes.push_back({id, Layer::repository, 10, i < 235 ? 1 : 0, {}});
        if (i >= 235) outcomes.push_back({id, Layer::project, 10, i < 250 ? 3 : 0, {}});
    }
    const auto report = evaluate(bugs, outcomes, kKs);
    CHECK(report.layers[0].attempted == 314);
    CHECK(report.layers[1].attempted == 107);
    CHECK(report.layers[2].attempted == 79);
    CHECK(report.layers[0].newly_fixed == 207);
    CHECK(report.layers[1].newly_fixed == 28);
    CHECK(report.layers[2].newly_fixed == 15);
    CHECK(report.layers[0].cumulative_fixed == 207);
    CHECK(report.layers[1].cumulative_fixed == 235);
    CHECK(report.layers[2].cumulative_fixed == 250);
    CHECK(report.fixed_count == 250);
    CHECK(report.fixed_rate == doctest::Approx(250.0 / 314.0));

    // Cumulative best-layer mean over all bugs.
    const double l1 = 207 * pass_at_k(10, 2, 1) / 314;
    const double l2 = l1 + 28 * pass_at_k(10, 1, 1) / 314;
    const double l3 = l2 + 15 * pass_at_k(10, 3, 1) / 314;
    CHECK(report.layers[0].pass_at_k.at(1) == doctest::Approx(l1).epsilon(1e-12));
    CHECK(report.layers[1].pass_at_k.at(1) == doctest::Approx(l2).epsilon(1e-12));
    CHECK(report.layers[2].pass_at_k.at(1) == doctest::Approx(l3).epsilon(1e-12));
    CHECK(report.pass_at_k == report.layers[2].pass_at_k);
    for (const auto& layer : report.layers) {
        CHECK(layer.pass_at_k.at(1) <= layer.pass_at_k.at(3));
        CHECK(layer.pass_at_k.at(3) <= layer.pass_at_k.at(5));
    }

    const auto text = render_text(report);
    CHECK(text.find("79.6% (250/314)") != std::string::npos);
    CHECK(text.find("74.8% (235/314)") != std::string::npos);
}

TEST_CASE("per-type rows average over the type's bugs") {
    const std::vector<BugInstance> bugs = {bug("a", BugType::network), bug("b", BugType::network),
                                           bug("c", BugType::program_anomaly)};
    const std::vector<RepairOutcome> outcomes = {{"a", Layer::bug, 10, 5, {}},
                                                 {"b", Layer::bug, 10, 0, {}},
                                                 {"b", Layer::repository, 10, 10, {}},
                                                 {"c", Layer::bug, 10, 0, {}}};
    const auto report = evaluate(bugs, outcomes, kKs);
    REQUIRE(report.per_type.size() == 2);
    const auto& network = report.per_type[1].type == BugType::network ? report.per_type[1] : report.per_type[0];
    CHECK(network.bugs == 2);
    CHECK(network.layers[0].pass_at_k.at(1) == doctest::Approx(0.25));
    CHECK(network.layers[1].pass_at_k.at(1) == doctest::Approx(0.75));
    CHECK(network.layers[0].fixed == 1);
    CHECK(network.layers[2].fixed == 2);

    const auto jsonl = render_jsonl(report);
    CHECK(jsonl.find("\"record\":\"summary\"") != std::string::npos);
    CHECK(jsonl.find("\"type\":\"Network\"") != std::string::npos);
}

TEST_CASE("never attempted bugs contribute zero and quarantines are listed once") {
    const std::vector<BugInstance> bugs = {bug("a"), bug("q")};
    const std::vector<RepairOutcome> outcomes = {{"a", Layer::bug, 10, 10, {}}};
    const std::vector<Quarantine> quarantined = {{"q", Layer::bug, "not_found: checkout missing"}};
    const auto report = evaluate(bugs, outcomes, kKs, quarantined);
    CHECK(report.pass_at_k.at(1) == doctest::Approx(0.5));
    CHECK(report.fixed_count == 1);
    CHECK(report.quarantined.size() == 1);
    const auto text = render_text(report);
    CHECK(text.find("q at L1: not_found") != std::string::npos);
}

TEST_CASE("evaluate rejects inconsistent logs") {
    const std::vector<BugInstance> bugs = {bug("a")};
    const std::vector<RepairOutcome> duplicate = {{"a", Layer::bug, 10, 0, {}}, {"a", Layer::bug, 10, 1, {}}};
    CHECK_THROWS_AS(evaluate(bugs, duplicate, kKs), Error);
    const std::vector<RepairOutcome> unknown = {{"zzz", Layer::bug, 10, 0, {}}};
    CHECK_THROWS_AS(evaluate(bugs, unknown, kKs), Error);
    const std::vector<RepairOutcome> small = {{"a", Layer::bug, 3, 0, {}}};
    CHECK_THROWS_AS(evaluate(bugs, small, kKs), Error);
}
