#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lob/rng.hpp"
#include "lob/stats.hpp"

using namespace lob;

TEST_CASE("chi-squared survival function") {
  // 5.99 is the familiar 5% critical value at two degrees of freedom
  CHECK(chi_squared_sf(5.99, 2) == Catch::Approx(0.0500).margin(2e-4));
  CHECK(chi_squared_sf(5.99, 2) == Catch::Approx(std::exp(-5.99 / 2)).epsilon(1e-12));
  CHECK(chi_squared_sf(0.0, 3) == 1.0);
  CHECK(chi_squared_sf(-1.0, 3) == 1.0);
  CHECK_THROWS_AS(chi_squared_sf(1.0, 0), std::domain_error);
}

TEST_CASE("wald p-value") {
  CHECK(wald_pvalue(0.0, 1.0) == Catch::Approx(1.0));
  CHECK(wald_pvalue(1.96, 1.0) == Catch::Approx(0.05).margin(1e-3));
  CHECK(wald_pvalue(5.0, 0.0) == 1.0);  // unusable standard error
  CHECK(wald_pvalue(2.0, 1.0) == wald_pvalue(-2.0, 1.0));
}

TEST_CASE("wilcoxon signed-rank test") {
  SECTION("identical pairs give p = 1 with the all-tied flag") {
    std::vector<std::pair<double, double>> pairs;
    for (int i = 1; i <= 8; ++i) pairs.push_back({i, i});
    WilcoxonResult r = wilcoxon_signed_rank(pairs);
    CHECK(r.all_tied);
    CHECK(r.p_value == 1.0);
    CHECK(r.n_used == 0);
  }
  SECTION("uniformly positive differences: exact two-sided 2/64 at n = 6") {
    std::vector<std::pair<double, double>> pairs = {{1, 2}, {2, 4}, {3, 6},
                                                    {4, 8}, {5, 10}, {6, 12}};
    WilcoxonResult r = wilcoxon_signed_rank(pairs);
    CHECK(r.exact);
    CHECK(r.statistic == Catch::Approx(21.0));
    CHECK(r.p_value == Catch::Approx(2.0 / 64.0).epsilon(1e-12));
  }
  SECTION("swapping the samples preserves the p-value") {
    std::vector<std::pair<double, double>> pairs = {{1, 2.2}, {2, 1.1}, {3, 5.3},
                                                    {4, 2.9}, {5, 10.1}, {6, 7.4},
                                                    {7, 6.2}, {8, 9.9}};
    std::vector<std::pair<double, double>> swapped;
    for (auto& [x, y] : pairs) swapped.push_back({y, x});
    WilcoxonResult r1 = wilcoxon_signed_rank(pairs);
    WilcoxonResult r2 = wilcoxon_signed_rank(swapped);
    CHECK(r1.p_value == Catch::Approx(r2.p_value).epsilon(1e-12));
    CHECK(r1.statistic + r2.statistic == Catch::Approx(8 * 9 / 2.0));
  }
  SECTION("large samples use the normal approximation") {
    std::vector<std::pair<double, double>> pairs;
    CounterRng rng(7);
    for (int i = 0; i < 60; ++i) {
      double x = rng.uniform();
      pairs.push_back({x, x + rng.uniform() - 0.5});
    }
    WilcoxonResult r = wilcoxon_signed_rank(pairs);
    CHECK_FALSE(r.exact);
    CHECK(r.p_value > 0.0);
    CHECK(r.p_value <= 1.0);
  }
  SECTION("the exact null distribution is calibrated") {
    // under the null, P[two-sided p <= alpha] <= alpha; check by enumeration
    // at n = 6: the smallest attainable p is 2/64
    std::vector<std::pair<double, double>> pairs = {{2, 1}, {4, 2}, {6, 3},
                                                    {8, 4}, {10, 5}, {12, 6}};
    WilcoxonResult r = wilcoxon_signed_rank(pairs);
    CHECK(r.p_value == Catch::Approx(2.0 / 64.0).epsilon(1e-12));
  }
}

TEST_CASE("two-sample kolmogorov-smirnov") {
  CounterRng rng(9);
  std::vector<double> a, b, c;
  for (int i = 0; i < 2000; ++i) {
    a.push_back(rng.uniform());
    b.push_back(rng.uniform());
    c.push_back(rng.uniform() + 0.3);  // clearly shifted
  }
  CHECK(ks_two_sample_pvalue(a, b) > 0.01);
  CHECK(ks_two_sample_pvalue(a, c) < 1e-6);
  CHECK_THROWS_AS(ks_two_sample_pvalue({}, a), std::invalid_argument);
}
