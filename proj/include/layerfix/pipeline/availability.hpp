#pragma once

#include <span>
#include <string>
#include <vector>

#include "layerfix/core/json.hpp"

namespace layerfix::pipeline {

/// Which of the five layer-2/3 knowledge kinds could be extracted for a bug.
struct AvailabilityRecord {
    std::string bug_id;
    bool co_occurring_files = false;
    bool structural_dependencies = false;
    bool latest_change = false;
    bool documentation = false;
    bool issue_history = false;

    [[nodiscard]] int missing_count() const noexcept;
    bool operator==(const AvailabilityRecord&) const = default;
};

struct AvailabilitySummary {
    int total = 0;
    int all_present = 0;
    int missing_one = 0;
    int missing_more = 0;
    // Bugs lacking each kind.
    int no_co_occurring = 0;
    int no_dependencies = 0;
    int no_latest_change = 0;
    int no_documentation = 0;
    int no_issue_history = 0;

    bool operator==(const AvailabilitySummary&) const = default;
};

AvailabilitySummary summarize(std::span<const AvailabilityRecord> records);
std::string render_availability(const AvailabilitySummary& summary);

void to_json(Json& j, const AvailabilityRecord& record);
void from_json(const Json& j, AvailabilityRecord& record);

}  // namespace layerfix::pipeline
