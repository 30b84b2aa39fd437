#include <doctest.h>

#include <bit>
#include <cmath>

#include "layerfix/core/error.hpp"
#include "layerfix/eval/metrics.hpp"

using namespace layerfix;
using namespace layerfix::eval;

namespace {

// Fraction of k-subsets of {0..n-1} that hit the first c indices.
double enumerate_pass_at_k(int n, int c, int k) {
    const unsigned successes = (1u << c) - 1u;
    long hits = 0;
    long total = 0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (std::popcount(mask) != k) continue;
        ++total;
        if ((mask & successes) != 0) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("pass@k worked values") {
    for (int k : {1, 3, 5, 10}) CHECK(pass_at_k(10, 0, k) == 0.0);
    CHECK(pass_at_k(10, 5, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(pass_at_k(10, 3, 3) == doctest::Approx(1.0 - 35.0 / 120.0).epsilon(1e-15));
    CHECK(pass_at_k(10, 2, 9) == 1.0);
    CHECK(pass_at_k(1, 1, 1) == 1.0);
}

TEST_CASE("pass@k equals subset enumeration for every n <= 10") {
    for (int n = 1; n <= 10; ++n) {
        for (int c = 0; c <= n; ++c) {
            for (int k = 1; k <= n; ++k) {
                CAPTURE(n);
                CAPTURE(c);
                CAPTURE(k);
                CHECK(std::abs(pass_at_k(n, c, k) - enumerate_pass_at_k(n, c, k)) <= 1e-12);
                if (k > 1) CHECK(pass_at_k(n, c, k) >= pass_at_k(n, c, k - 1));
            }
        }
    }
}

TEST_CASE("pass@k outside its domain") {
    CHECK_THROWS_AS(pass_at_k(0, 0, 1), Error);
    CHECK_THROWS_AS(pass_at_k(10, 11, 1), Error);
    CHECK_THROWS_AS(pass_at_k(10, -1, 1), Error);
    CHECK_THROWS_AS(pass_at_k(10, 3, 0), Error);
    CHECK_THROWS_AS(pass_at_k(10, 3, 11), Error);
}

TEST_CASE("pass@k for sample counts beyond 64-bit binomials") {
    // C(200, 100) overflows; the product form must agree with a log-space evaluation.
    const double expected = 1.0 - std::exp(std::lgamma(191.0) - std::lgamma(91.0) - std::lgamma(201.0) + std::lgamma(101.0));
    CHECK(pass_at_k(200, 10, 100) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("binomials") {
    CHECK(binomial(10, 3) == 120u);
    CHECK(binomial(8, 9) == 0u);
    CHECK(binomial(62, 31) == 465428353255261088u);
    CHECK_FALSE(binomial(200, 100).has_value());
}

TEST_CASE("count_fixed") {
    CHECK(count_fixed({}) == 0);
    const std::vector<RepairOutcome> three = {{"a", Layer::bug, 10, 0, {}}, {"b", Layer::bug, 10, 1, {}},
                                              {"c", Layer::bug, 10, 10, {}}};
    CHECK(count_fixed(three) == 2);
    const std::vector<RepairOutcome> layered = {{"a", Layer::bug, 10, 0, {}}, {"a", Layer::repository, 10, 2, {}},
                                                {"a", Layer::project, 10, 1, {}}};
    CHECK(count_fixed(layered) == 1);
    const std::vector<RepairOutcome> duplicate = {{"a", Layer::bug, 10, 0, {}}, {"a", Layer::bug, 10, 1, {}}};
    CHECK_THROWS_AS(count_fixed(duplicate), Error);
}
