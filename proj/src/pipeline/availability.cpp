#include "layerfix/pipeline/availability.hpp"

#include <fmt/format.h>

namespace layerfix::pipeline {

int AvailabilityRecord::missing_count() const noexcept {
    return !co_occurring_files + !structural_dependencies + !latest_change + !documentation + !issue_history;
}

AvailabilitySummary summarize(std::span<const AvailabilityRecord> records) {
    AvailabilitySummary s;
    for (const auto& r : records) {
        ++s.total;
        const int missing = r.missing_count();
        if (missing == 0) ++s.all_present;
        else if (missing == 1) ++s.missing_one;
        else ++s.missing_more;
        s.no_co_occurring += !r.co_occurring_files;
        s.no_dependencies += !r.structural_dependencies;
        s.no_latest_change += !r.latest_change;
        s.no_documentation += !r.documentation;
        s.no_issue_history += !r.issue_history;
    }
    return s;
}

std::string render_availability(const AvailabilitySummary& s) {
    auto pct = [&](int x) { return s.total ? 100.0 * x / s.total : 0.0; };
    std::string out = fmt::format("Knowledge availability ({} bugs)\n", s.total);
    out += fmt::format("  all five present     {:>5} ({:.0f}%)\n", s.all_present, pct(s.all_present));
    out += fmt::format("  missing one          {:>5} ({:.0f}%)\n", s.missing_one, pct(s.missing_one));
    out += fmt::format("  missing more than one{:>5} ({:.0f}%)\n", s.missing_more, pct(s.missing_more));
    out += fmt::format("  without co-occurring files {:>5}\n", s.no_co_occurring);
    out += fmt::format("  without dependencies       {:>5}\n", s.no_dependencies);
    out += fmt::format("  without latest change      {:>5}\n", s.no_latest_change);
    out += fmt::format("  without documentation      {:>5}\n", s.no_documentation);
    out += fmt::format("  without issue history      {:>5}\n", s.no_issue_history);
    return out;
}

void to_json(Json& j, const AvailabilityRecord& r) {
    j = Json{{"bug_id", r.bug_id},
             {"co_occurring_files", r.co_occurring_files},
             {"structural_dependencies", r.structural_dependencies},
             {"latest_change", r.latest_change},
             {"documentation", r.documentation},
             {"issue_history", r.issue_history},
             {"missing_count", r.missing_count()}};
}

void from_json(const Json& j, AvailabilityRecord& r) {
    j.at("bug_id").get_to(r.bug_id);
    j.at("co_occurring_files").get_to(r.co_occurring_files);
    j.at("structural_dependencies").get_to(r.structural_dependencies);
    j.at("latest_change").get_to(r.latest_change);
    j.at("documentation").get_to(r.documentation);
    j.at("issue_history").get_to(r.issue_history);
}

}  // namespace layerfix::pipeline
