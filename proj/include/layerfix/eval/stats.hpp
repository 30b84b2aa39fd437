#pragma once

#include <span>
#include <string>

namespace layerfix::eval {

/// Standard normal CDF via std::erfc.
double normal_cdf(double x) noexcept;

/// Upper tail of the chi-square distribution with one degree of freedom.
double chi_square_1df_survival(double statistic) noexcept;

struct ZTestResult {
    double z = 0.0;
    double p_two_tailed = 1.0;
    std::string note;  // set when the pooled variance degenerates
};

/// Pooled two-proportion z test of x1/n1 against x2/n2.
ZTestResult two_proportion_z(int x1, int n1, int x2, int n2);

struct ChiSquareResult {
    double statistic = 0.0;
    double p = 1.0;
};

/// Pearson chi-square on the 2x2 fixed/unfixed table, one degree of freedom.
/// Yates' continuity correction is applied unless `continuity_correction`
/// is false.
ChiSquareResult chi_square_2x2(int x1, int n1, int x2, int n2, bool continuity_correction = true);

enum class MannWhitneyMethod { automatic, exact, asymptotic };

struct MannWhitneyResult {
    double u = 0.0;  // U statistic of the first sample
    double p_two_tailed = 1.0;
    bool exact = false;
};

/// Largest combined sample size for which `automatic` enumerates exactly.
inline constexpr std::size_t kMannWhitneyExactLimit = 12;

/// Mann-Whitney U with midranks for ties. `automatic` enumerates every
/// assignment of the pooled ranks when n1 + n2 <= 12 and otherwise uses the
/// tie-corrected normal approximation with a 0.5 continuity correction.
MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                                 MannWhitneyMethod method = MannWhitneyMethod::automatic);

struct EffectSize {
    double d = 0.0;               // may be +/-infinity when zero_variance
    bool zero_variance = false;
};

/// (mean(a) - mean(b)) / pooled sample standard deviation. With a = fixed
/// and b = unresolved, negative d means the unresolved group is larger.
/// Throws Error{domain} when either group has fewer than two values.
EffectSize cohens_d(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> values);

}  // namespace layerfix::eval
