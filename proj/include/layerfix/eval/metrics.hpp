#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "layerfix/core/types.hpp"

namespace layerfix::eval {

/// C(n, k) as an exact integer; nullopt when it does not fit in 64 bits.
std::optional<std::uint64_t> binomial(std::uint64_t n, std::uint64_t k) noexcept;

/// Unbiased pass@k estimate 1 - C(n-c, k) / C(n, k) for one prompt.
/// Requires 0 <= c <= n and 1 <= k <= n (Error{domain} otherwise).
/// Exact integer binomials are used whenever they fit in 64 bits.
double pass_at_k(int n, int c, int k);

/// Number of distinct bugs with at least one plausible sample at any layer.
/// Duplicate (bug_id, layer) pairs raise Error{validation}.
int count_fixed(std::span<const RepairOutcome> outcomes);

}  // namespace layerfix::eval
