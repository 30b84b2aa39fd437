#include "layerfix/eval/report.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "layerfix/core/error.hpp"
#include "layerfix/eval/metrics.hpp"

namespace layerfix::eval {

void to_json(Json& j, const Quarantine& q) {
    j = Json{{"bug_id", q.bug_id}, {"layer", to_string(q.layer)}, {"reason", q.reason}};
}

void from_json(const Json& j, Quarantine& q) {
    q.bug_id = j.at("bug_id").get<std::string>();
    q.layer = parse_layer(j.at("layer").get<std::string>()).value_or(Layer::bug);
    q.reason = j.value("reason", std::string{});
}

namespace {

using OutcomeIndex = std::map<std::string, std::array<const RepairOutcome*, 3>>;

double best_pass_at_k(const std::array<const RepairOutcome*, 3>& by_layer, int through, int k) {
    double best = 0.0;
    for (int l = 0; l <= through; ++l) {
        if (by_layer[l] != nullptr) best = std::max(best, pass_at_k(by_layer[l]->n, by_layer[l]->c, k));
    }
    return best;
}

bool fixed_through(const std::array<const RepairOutcome*, 3>& by_layer, int through) {
    for (int l = 0; l <= through; ++l) {
        if (by_layer[l] != nullptr && by_layer[l]->c > 0) return true;
    }
    return false;
}

std::string percent(int part, int whole) {
    if (whole == 0) return "-";
    return fmt::format("{:.1f}% ({}/{})", 100.0 * part / whole, part, whole);
}

}  // namespace

EvaluationReport evaluate(std::span<const BugInstance> bugs, std::span<const RepairOutcome> outcomes,
                          std::span<const int> ks, std::span<const Quarantine> quarantined) {
    EvaluationReport report;
    report.ks.assign(ks.begin(), ks.end());
    std::sort(report.ks.begin(), report.ks.end());
    report.bug_count = static_cast<int>(bugs.size());
    report.per_bug.assign(outcomes.begin(), outcomes.end());
    std::sort(report.per_bug.begin(), report.per_bug.end(), [](const RepairOutcome& a, const RepairOutcome& b) {
        return std::tie(a.bug_id, a.layer) < std::tie(b.bug_id, b.layer);
    });
    report.quarantined.assign(quarantined.begin(), quarantined.end());
    std::sort(report.quarantined.begin(), report.quarantined.end(),
              [](const Quarantine& a, const Quarantine& b) { return a.bug_id < b.bug_id; });

    std::map<std::string, BugType> types;
    for (const auto& bug : bugs) types[bug.bug_id] = bug.bug_type;

    OutcomeIndex index;
    for (const auto& bug : bugs) index[bug.bug_id] = {nullptr, nullptr, nullptr};
    for (const auto& outcome : report.per_bug) {
        validate(outcome);
        const auto it = index.find(outcome.bug_id);
        if (it == index.end()) throw Error(ErrorKind::validation, "outcome for unknown bug " + outcome.bug_id);
        auto& slot = it->second[static_cast<std::size_t>(layer_index(outcome.layer))];
        if (slot != nullptr) {
            throw Error(ErrorKind::validation, "duplicate outcome for " + outcome.bug_id + " at " +
                                                   std::string(to_string(outcome.layer)));
        }
        for (const int k : report.ks) {
            if (k > outcome.n) {
                throw Error(ErrorKind::domain, outcome.bug_id + ": k=" + std::to_string(k) + " exceeds n");
            }
        }
        slot = &outcome;
    }

    std::map<BugType, TypeRow> rows;
    for (const auto& bug : bugs) {
        auto& row = rows[bug.bug_type];
        row.type = bug.bug_type;
        ++row.bugs;
    }

    for (int l = 0; l < 3; ++l) {
        auto& summary = report.layers[static_cast<std::size_t>(l)];
        summary.layer = kAllLayers[static_cast<std::size_t>(l)];
        for (const auto& [bug_id, by_layer] : index) {
            if (by_layer[l] != nullptr) {
                ++summary.attempted;
                const bool earlier = l > 0 && fixed_through(by_layer, l - 1);
                if (by_layer[l]->c > 0 && !earlier) ++summary.newly_fixed;
            }
            const bool fixed = fixed_through(by_layer, l);
            if (fixed) ++summary.cumulative_fixed;
            auto& cell = rows[types[bug_id]].layers[static_cast<std::size_t>(l)];
            if (fixed) ++cell.fixed;
            for (const int k : report.ks) {
                const double value = best_pass_at_k(by_layer, l, k);
                summary.pass_at_k[k] += value;
                cell.pass_at_k[k] += value;
            }
        }
        for (auto& [k, total] : summary.pass_at_k) {
            total = report.bug_count == 0 ? 0.0 : total / report.bug_count;
        }
        for (auto& [type, row] : rows) {
            for (auto& [k, total] : row.layers[static_cast<std::size_t>(l)].pass_at_k) total /= row.bugs;
        }
    }

    report.fixed_count = count_fixed(report.per_bug);
    report.fixed_rate = report.bug_count == 0 ? 0.0 : static_cast<double>(report.fixed_count) / report.bug_count;
    report.pass_at_k = report.layers[2].pass_at_k;
    for (auto& [type, row] : rows) report.per_type.push_back(row);
    return report;
}

std::string render_text(const EvaluationReport& report) {
    std::string out;
    out += fmt::format("bugs: {}   fixed: {}   quarantined: {}\n\n", report.bug_count,
                       percent(report.fixed_count, report.bug_count), report.quarantined.size());

    out += fmt::format("{:<6}{:>10}{:>12}{:>10}", "Layer", "Attempted", "NewlyFixed", "CumFixed");
    for (const int k : report.ks) out += fmt::format("{:>9}", fmt::format("Pass@{}", k));
    out += fmt::format("  {}\n", "%Fixed");
    for (const auto& layer : report.layers) {
        out += fmt::format("{:<6}{:>10}{:>12}{:>10}", to_string(layer.layer), layer.attempted, layer.newly_fixed,
                           layer.cumulative_fixed);
        for (const int k : report.ks) out += fmt::format("{:>9.3f}", layer.pass_at_k.at(k));
        out += fmt::format("  {}\n", percent(layer.cumulative_fixed, report.bug_count));
    }

    out += "\nPer bug type (AVG pass@k and %fixed, cumulative per layer)\n";
    out += fmt::format("{:<24}", "Type");
    for (const auto layer : kAllLayers) {
        out += fmt::format("| {:<2}", to_string(layer));
        for (const int k : report.ks) out += fmt::format("{:>8}", fmt::format("P@{}", k));
        out += fmt::format("  {:<16}", "%Fixed");
    }
    out += '\n';
    for (const auto& row : report.per_type) {
        out += fmt::format("{:<24}", to_string(row.type));
        for (const auto& cell : row.layers) {
            out += "|   ";
            for (const int k : report.ks) out += fmt::format("{:>8.3f}", cell.pass_at_k.at(k));
            out += fmt::format("  {:<16}", percent(cell.fixed, row.bugs));
        }
        out += '\n';
    }

    if (!report.quarantined.empty()) {
        out += "\nQuarantined\n";
        for (const auto& q : report.quarantined) {
            out += fmt::format("  {} at {}: {}\n", q.bug_id, to_string(q.layer), q.reason);
        }
    }
    return out;
}

std::string render_jsonl(const EvaluationReport& report) {
    std::string out;
    const auto pass_json = [](const std::map<int, double>& values) {
        Json j = Json::object();
        for (const auto& [k, v] : values) j[std::to_string(k)] = v;
        return j;
    };
    out += Json{{"record", "summary"},
                {"bugs", report.bug_count},
                {"fixed", report.fixed_count},
                {"fixed_rate", report.fixed_rate},
                {"pass_at_k", pass_json(report.pass_at_k)},
                {"quarantined", report.quarantined.size()}}
               .dump() +
           "\n";
    for (const auto& layer : report.layers) {
        out += Json{{"record", "layer"},
                    {"layer", to_string(layer.layer)},
                    {"attempted", layer.attempted},
                    {"newly_fixed", layer.newly_fixed},
                    {"cumulative_fixed", layer.cumulative_fixed},
                    {"pass_at_k", pass_json(layer.pass_at_k)}}
                   .dump() +
               "\n";
    }
    for (const auto& row : report.per_type) {
        Json layers = Json::array();
        for (std::size_t l = 0; l < 3; ++l) {
            layers.push_back(Json{{"layer", to_string(kAllLayers[l])},
                                  {"pass_at_k", pass_json(row.layers[l].pass_at_k)},
                                  {"fixed", row.layers[l].fixed}});
        }
        out += Json{{"record", "type"}, {"type", to_string(row.type)}, {"bugs", row.bugs}, {"layers", layers}}.dump() +
               "\n";
    }
    for (const auto& outcome : report.per_bug) {
        Json j = outcome;
        j["record"] = "outcome";
        out += j.dump() + "\n";
    }
    for (const auto& q : report.quarantined) {
        Json j = q;
        j["record"] = "quarantine";
        out += j.dump() + "\n";
    }
    return out;
}

}  // namespace layerfix::eval
