#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "lob/rng.hpp"

using namespace lob;

TEST_CASE("rng determinism and stream independence") {
  CounterRng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  CounterRng base(42);
  CounterRng s0 = base.stream(0);
  CounterRng s1 = base.stream(1);
  bool all_equal = true;
  for (int i = 0; i < 32; ++i)
    if (s0.next_u64() != s1.next_u64()) all_equal = false;
  CHECK_FALSE(all_equal);

  // deriving a stream leaves the parent untouched
  CounterRng c(7), d(7);
  (void)c.stream(3);
  CHECK(c.next_u64() == d.next_u64());
}

TEST_CASE("uniform lies in the open unit interval with mean one half") {
  CounterRng rng(1);
  double sum = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // sd of the mean is 1/sqrt(12 n) ~ 0.0009; allow 5 sigma
  CHECK(std::abs(sum / n - 0.5) < 0.005);
}

TEST_CASE("exponential mean matches 1/rate") {
  CounterRng rng(2);
  double sum = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += rng.exponential(2.5);
  CHECK(sum / n == Catch::Approx(1.0 / 2.5).margin(5.0 / 2.5 / std::sqrt(n)));
}

TEST_CASE("poisson mean and variance, small and large regimes") {
  CounterRng rng(3);
  for (double mean : {3.0, 100.0}) {  // the large case exercises the halving branch
    const int n = 50000;
    double s1 = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
      double k = static_cast<double>(rng.poisson(mean));
      s1 += k;
      s2 += k * k;
    }
    double m = s1 / n;
    double v = s2 / n - m * m;
    CHECK(std::abs(m - mean) < 5 * std::sqrt(mean / n));
    CHECK(std::abs(v - mean) < 0.1 * mean);
  }
  CHECK(rng.poisson(0.0) == 0);
  CHECK_THROWS_AS(rng.poisson(-1.0), std::domain_error);
}

TEST_CASE("binomial mean matches np") {
  CounterRng rng(4);
  const int n = 50000;
  double sum = 0;
  for (int i = 0; i < n; ++i) sum += static_cast<double>(rng.binomial(10, 0.3));
  CHECK(sum / n == Catch::Approx(3.0).margin(5 * std::sqrt(10 * 0.3 * 0.7 / n)));
}

TEST_CASE("categorical draws are proportional to weights") {
  CounterRng rng(5);
  std::vector<double> w = {1.0, 3.0, 6.0};
  std::vector<long> counts(3, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[rng.categorical(w, 10.0)];
  CHECK(std::abs(counts[0] / double(n) - 0.1) < 0.01);
  CHECK(std::abs(counts[1] / double(n) - 0.3) < 0.01);
  CHECK(std::abs(counts[2] / double(n) - 0.6) < 0.01);
}
