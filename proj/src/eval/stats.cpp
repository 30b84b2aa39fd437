#include "layerfix/eval/stats.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include "layerfix/core/error.hpp"

namespace layerfix::eval {

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double chi_square_1df_survival(double statistic) noexcept {
    if (statistic <= 0.0) return 1.0;
    return std::erfc(std::sqrt(statistic / 2.0));
}

namespace {

void check_proportions(int x1, int n1, int x2, int n2) {
    if (n1 <= 0 || n2 <= 0 || x1 < 0 || x2 < 0 || x1 > n1 || x2 > n2) {
        throw Error(ErrorKind::domain, "proportion test requires 0 <= x <= n and n > 0");
    }
}

}  // namespace

ZTestResult two_proportion_z(int x1, int n1, int x2, int n2) {
    check_proportions(x1, n1, x2, n2);
    const double p1 = static_cast<double>(x1) / n1;
    const double p2 = static_cast<double>(x2) / n2;
    const double pooled = static_cast<double>(x1 + x2) / (n1 + n2);
    const double variance = pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2);
    ZTestResult result;
    if (variance <= 0.0) {
        // pooled proportion of 0 or 1 forces p1 == p2
        result.note = "degenerate pooled variance";
        return result;
    }
    result.z = (p1 - p2) / std::sqrt(variance);
    result.p_two_tailed = std::min(1.0, 2.0 * (1.0 - normal_cdf(std::abs(result.z))));
    return result;
}

ChiSquareResult chi_square_2x2(int x1, int n1, int x2, int n2, bool continuity_correction) {
    check_proportions(x1, n1, x2, n2);
    const std::array<double, 4> observed = {static_cast<double>(x1), static_cast<double>(n1 - x1),
                                            static_cast<double>(x2), static_cast<double>(n2 - x2)};
    const double total = n1 + n2;
    const double col_fixed = x1 + x2;
    const double col_unfixed = total - col_fixed;
    if (col_fixed == 0.0 || col_unfixed == 0.0) {
        throw Error(ErrorKind::domain, "chi-square: zero marginal total");
    }
    const std::array<double, 4> expected = {n1 * col_fixed / total, n1 * col_unfixed / total,
                                            n2 * col_fixed / total, n2 * col_unfixed / total};
    ChiSquareResult result;
    for (std::size_t i = 0; i < 4; ++i) {
        double obs = observed[i];
        if (continuity_correction) {
            const double diff = expected[i] - obs;
            obs += std::copysign(std::min(0.5, std::abs(diff)), diff);
        }
        result.statistic += (obs - expected[i]) * (obs - expected[i]) / expected[i];
    }
    result.p = chi_square_1df_survival(result.statistic);
    return result;
}

double mean(std::span<const double> values) {
    if (values.empty()) return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

namespace {

// Midranks of the pooled sample (a first, then b).
std::vector<double> pooled_ranks(std::span<const double> a, std::span<const double> b, double& tie_term) {
    std::vector<double> values(a.begin(), a.end());
    values.insert(values.end(), b.begin(), b.end());
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return values[l] < values[r]; });
    std::vector<double> ranks(values.size());
    tie_term = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = midrank;
        const double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b, MannWhitneyMethod method) {
    if (a.empty() || b.empty()) throw Error(ErrorKind::domain, "Mann-Whitney U requires two non-empty samples");
    const std::size_t n1 = a.size();
    const std::size_t n2 = b.size();
    const std::size_t total = n1 + n2;
    double tie_term = 0.0;
    const auto ranks = pooled_ranks(a, b, tie_term);
    const double offset = static_cast<double>(n1 * (n1 + 1)) / 2.0;
    const double rank_sum_a = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(n1), 0.0);

    MannWhitneyResult result;
    result.u = rank_sum_a - offset;
    const double mu = static_cast<double>(n1 * n2) / 2.0;
    const double observed_gap = std::abs(result.u - mu);

    const bool exact = method == MannWhitneyMethod::exact ||
                       (method == MannWhitneyMethod::automatic && total <= kMannWhitneyExactLimit);
    if (exact) {
        if (total > 24) throw Error(ErrorKind::domain, "exact Mann-Whitney enumeration limited to 24 values");
        std::uint64_t extreme = 0;
        std::uint64_t count = 0;
        const std::uint32_t limit = 1u << total;
        for (std::uint32_t mask = 0; mask < limit; ++mask) {
            if (static_cast<std::size_t>(std::popcount(mask)) != n1) continue;
            double sum = 0.0;
            for (std::size_t i = 0; i < total; ++i) {
                if (mask & (1u << i)) sum += ranks[i];
            }
            ++count;
            if (std::abs(sum - offset - mu) >= observed_gap - 1e-9) ++extreme;
        }
        result.p_two_tailed = static_cast<double>(extreme) / static_cast<double>(count);
        result.exact = true;
        return result;
    }

    const double nn = static_cast<double>(total);
    const double variance = static_cast<double>(n1 * n2) / 12.0 * ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
    if (variance <= 0.0) {
        result.p_two_tailed = 1.0;
        return result;
    }
    const double z = std::max(0.0, observed_gap - 0.5) / std::sqrt(variance);
    result.p_two_tailed = std::min(1.0, 2.0 * (1.0 - normal_cdf(z)));
    return result;
}

EffectSize cohens_d(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw Error(ErrorKind::domain, "Cohen's d requires at least two values per group");
    const double mean_a = mean(a);
    const double mean_b = mean(b);
    const auto sum_sq = [](std::span<const double> xs, double m) {
        double s = 0.0;
        for (const double x : xs) s += (x - m) * (x - m);
        return s;
    };
    const double pooled_var = (sum_sq(a, mean_a) + sum_sq(b, mean_b)) / static_cast<double>(a.size() + b.size() - 2);
    EffectSize effect;
    const double diff = mean_a - mean_b;
    if (pooled_var <= 0.0) {
        effect.zero_variance = true;
        effect.d = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
        return effect;
    }
    effect.d = diff / std::sqrt(pooled_var);
    return effect;
}

}  // namespace layerfix::eval
