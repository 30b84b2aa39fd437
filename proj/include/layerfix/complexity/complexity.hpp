#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "layerfix/pysrc/tokenizer.hpp"

namespace layerfix::complexity {

/// How a token participates in Halstead counts. The full table lives in
/// docs/halstead_tokens.md.
enum class HalsteadClass { operator_token, operand, neither };

HalsteadClass classify(const pysrc::Token& token) noexcept;

/// 1 + decision points: if/elif clauses, for/while statements, except
/// clauses, each `and`/`or`, each conditional expression, each `if` filter
/// of a comprehension, also inside f-string replacement fields.
/// Comprehension `for` clauses and `else`/`finally` add nothing. Nested
/// functions and lambdas are counted with the enclosing source.
int cyclomatic_complexity(std::string_view function_source);

struct HalsteadCounts {
    int distinct_operators = 0;  // eta1
    int distinct_operands = 0;   // eta2
    int total_operators = 0;     // N1
    int total_operands = 0;      // N2
};

struct HalsteadMetrics {
    double volume = 0.0;
    double difficulty = 0.0;
    double effort = 0.0;
};

HalsteadCounts halstead_counts(std::string_view function_source);

/// V = (N1+N2) log2(eta1+eta2), D = (eta1/2)(N2/eta2), E = D V.
/// Sources without operators or without operands give all zeros.
HalsteadMetrics halstead(std::string_view function_source);
HalsteadMetrics halstead_from_counts(const HalsteadCounts& counts) noexcept;

/// Non-blank lines carrying at least one non-comment token.
int source_lines(std::string_view function_source);

/// max(0, 100 (171 - 5.2 ln(max(V,1)) - 0.23 CC - 16.2 ln(SLOC)) / 171),
/// clamped to [0, 100]. Error{domain} when volume < 0, cyclomatic < 1 or
/// sloc < 1.
double maintainability_index(double volume, int cyclomatic, int sloc);

struct ComplexityProfile {
    int cyclomatic = 1;
    int sloc = 1;
    double halstead_volume = 0.0;
    double halstead_difficulty = 0.0;
    double halstead_effort = 0.0;
    double maintainability_index = 100.0;
};

/// All metrics of one function. Error{parse} on untokenizable source.
ComplexityProfile profile(std::string_view function_source);

enum class Metric { cyclomatic, sloc, halstead_volume, halstead_difficulty, halstead_effort, maintainability };

inline constexpr Metric kAllMetrics[] = {Metric::cyclomatic,         Metric::sloc,
                                         Metric::halstead_volume,    Metric::halstead_difficulty,
                                         Metric::halstead_effort,    Metric::maintainability};

std::string_view to_string(Metric metric) noexcept;
double metric_value(const ComplexityProfile& p, Metric metric) noexcept;

struct ComparisonRow {
    Metric metric = Metric::cyclomatic;
    double fixed_mean = 0.0;
    double unresolved_mean = 0.0;
    double cohens_d = 0.0;  // fixed - unresolved
    bool zero_variance = false;
    double u_test_p = 1.0;
};

/// Fixed versus unresolved, one row per metric. Error{domain} when a group
/// has fewer than two profiles.
std::vector<ComparisonRow> compare_groups(std::span<const ComplexityProfile> fixed,
                                          std::span<const ComplexityProfile> unresolved);

std::string render_comparison(std::span<const ComparisonRow> rows);

}  // namespace layerfix::complexity
