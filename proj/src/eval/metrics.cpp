#include "layerfix/eval/metrics.hpp"

#include <set>
#include <string>
#include <utility>

#include "layerfix/core/error.hpp"

namespace layerfix::eval {
namespace {
__extension__ using u128 = unsigned __int128;
}  // namespace

std::optional<std::uint64_t> binomial(std::uint64_t n, std::uint64_t k) noexcept {
    if (k > n) return 0;
    k = std::min(k, n - k);
    u128 result = 1;
    for (std::uint64_t i = 0; i < k; ++i) {
        // result * (n - i) is always divisible by (i + 1)
        result = result * (n - i) / (i + 1);
        if (result > static_cast<u128>(UINT64_MAX)) return std::nullopt;
    }
    return static_cast<std::uint64_t>(result);
}

double pass_at_k(int n, int c, int k) {
    if (n < 1 || c < 0 || c > n || k < 1 || k > n) {
        throw Error(ErrorKind::domain, "pass@k requires 0 <= c <= n and 1 <= k <= n (n=" + std::to_string(n) +
                                           ", c=" + std::to_string(c) + ", k=" + std::to_string(k) + ")");
    }
    if (n - c < k) return 1.0;
    const auto failing = binomial(static_cast<std::uint64_t>(n - c), static_cast<std::uint64_t>(k));
    const auto all = binomial(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(k));
    if (failing && all) return 1.0 - static_cast<double>(*failing) / static_cast<double>(*all);
    // Product form for sample counts beyond 64-bit binomials.
    double miss = 1.0;
    for (int i = n - c + 1; i <= n; ++i) miss *= 1.0 - static_cast<double>(k) / i;
    return 1.0 - miss;
}

int count_fixed(std::span<const RepairOutcome> outcomes) {
    std::set<std::pair<std::string, Layer>> seen;
    std::set<std::string> fixed;
    for (const auto& outcome : outcomes) {
        if (!seen.emplace(outcome.bug_id, outcome.layer).second) {
            throw Error(ErrorKind::validation,
                        "duplicate outcome for " + outcome.bug_id + " at " + std::string(to_string(outcome.layer)));
        }
        if (outcome.c > 0) fixed.insert(outcome.bug_id);
    }
    return static_cast<int>(fixed.size());
}

}  // namespace layerfix::eval
