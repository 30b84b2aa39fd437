#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "layerfix/core/json.hpp"
#include "layerfix/core/types.hpp"

namespace layerfix::eval {

/// A bug withdrawn from a layer onwards because its context could not be
/// extracted. It stays in every denominator and is never counted as fixed
/// after that layer.
struct Quarantine {
    std::string bug_id;
    Layer layer = Layer::bug;
    std::string reason;

    bool operator==(const Quarantine&) const = default;
};

void to_json(Json& j, const Quarantine& q);
void from_json(const Json& j, Quarantine& q);

struct LayerSummary {
    Layer layer = Layer::bug;
    int attempted = 0;
    int newly_fixed = 0;
    int cumulative_fixed = 0;
    std::map<int, double> pass_at_k;  // cumulative best-layer mean over all bugs
};

struct TypeLayerCell {
    std::map<int, double> pass_at_k;
    int fixed = 0;
};

struct TypeRow {
    BugType type = BugType::program_anomaly;
    int bugs = 0;
    std::array<TypeLayerCell, 3> layers;
};

struct EvaluationReport {
    std::vector<RepairOutcome> per_bug;
    std::vector<int> ks;
    int bug_count = 0;
    std::map<int, double> pass_at_k;  // through the last layer
    int fixed_count = 0;
    double fixed_rate = 0.0;
    std::array<LayerSummary, 3> layers;
    std::vector<TypeRow> per_type;  // only types present in the manifest
    std::vector<Quarantine> quarantined;
};

/// Aggregates outcomes of a layered run. A bug contributes, at layer L, the
/// best pass@k among its outcomes at layers <= L; bugs never attempted
/// contribute zero.
EvaluationReport evaluate(std::span<const BugInstance> bugs, std::span<const RepairOutcome> outcomes,
                          std::span<const int> ks, std::span<const Quarantine> quarantined = {});

/// Table-shaped text: per-layer summary plus per-type rows with AVG pass@k
/// and %fixed for each layer.
std::string render_text(const EvaluationReport& report);

/// One JSON object per line: summary, layer, type, bug and quarantine records.
std::string render_jsonl(const EvaluationReport& report);

}  // namespace layerfix::eval
