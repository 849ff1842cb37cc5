#include <catch2/catch_amalgamated.hpp>

#include "lob/model.hpp"

using namespace lob;

TEST_CASE("tick grid price mapping") {
  TickGrid grid{100, 0.01, 10.0};
  CHECK(grid.price_to_tick(10.0) == 1);
  CHECK(grid.price_to_tick(10.05) == 6);
  CHECK(grid.tick_to_price(6) == Catch::Approx(10.05));
  // round-trip through the rounding rule
  for (int p = 1; p <= 100; ++p) CHECK(grid.price_to_tick(grid.tick_to_price(p)) == p);
  CHECK_THROWS_AS((TickGrid{1, 0.01, 0.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((TickGrid{10, 0.0, 0.0}).validate(), std::invalid_argument);
}

TEST_CASE("book state quote conventions") {
  BookState book(4);
  CHECK(book.ask() == 5);  // empty sell book
  CHECK(book.bid() == 0);  // empty buy book
  book.ask_depth[3] = 2;
  book.bid_depth[1] = 1;
  CHECK(book.ask() == 3);
  CHECK(book.bid() == 1);
  CHECK(book.uncrossed());
  L1State x = l1_of(book);
  CHECK(x.a == 3);
  CHECK(x.b == 1);
  CHECK(x.q == 2);
  CHECK(x.r == 1);
}

TEST_CASE("distance intensity per variant") {
  SECTION("constant model returns levels at any distance") {
    ModelParams p;
    p.variant = Variant::S;
    p.kappa_levels = {0.5};
    p.rho_levels = {1.0};
    auto [k, r] = distance_intensity(p, 7);
    CHECK(k == 0.5);
    CHECK(r == 1.0);
  }
  SECTION("one-level tail model: level inside, power tail outside") {
    ModelParams p;
    p.variant = Variant::T1;
    p.kappa_levels = {2.0};
    p.rho_levels = {3.0};
    p.alpha_kappa = -1.0;
    p.alpha_rho = -2.0;
    auto [k1, r1] = distance_intensity(p, 1);
    CHECK(k1 == 2.0);
    CHECK(r1 == 3.0);
    auto [k3, r3] = distance_intensity(p, 3);
    CHECK(k3 == Catch::Approx(2.0 * std::pow(2.0, -1.0)));  // = 1.0
    CHECK(k3 == Catch::Approx(1.0));
    CHECK(r3 == Catch::Approx(3.0 * std::pow(2.0, -2.0)));
  }
  SECTION("splice continuity at the tail junction") {
    for (Variant v : {Variant::T1, Variant::T2, Variant::T3}) {
      ModelParams p;
      p.variant = v;
      int m = level_count(v);
      for (int i = 0; i < m; ++i) {
        p.kappa_levels.push_back(0.3 + 0.1 * i);
        p.rho_levels.push_back(1.1 + 0.2 * i);
      }
      p.alpha_kappa = -1.4;
      p.alpha_rho = -0.7;
      auto [k, r] = distance_intensity(p, m + 1);
      CHECK(k == Catch::Approx(p.kappa_levels[m - 1]));  // (i-m)^alpha = 1^alpha
      CHECK(r == Catch::Approx(p.rho_levels[m - 1]));
    }
  }
  SECTION("nonpositive distance rejected") {
    ModelParams p;
    p.variant = Variant::S;
    p.kappa_levels = {0.5};
    p.rho_levels = {1.0};
    CHECK_THROWS_AS(distance_intensity(p, 0), std::domain_error);
    CHECK_THROWS_AS(distance_intensity(p, -2), std::domain_error);
  }
}

TEST_CASE("parameter counts per variant") {
  ModelParams s;
  s.variant = Variant::S;
  s.kappa_levels = {1};
  s.rho_levels = {1};
  CHECK(s.param_count() == 2);
  ModelParams t3;
  t3.variant = Variant::T3;
  t3.kappa_levels = {1, 1, 1};
  t3.rho_levels = {1, 1, 1};
  CHECK(t3.param_count() == 8);  // 2n + 2 with n = 3
  t3.eta = 0.5;
  CHECK(t3.param_count() == 9);  // GZI adds exactly one
}

TEST_CASE("unconstrained reparameterization round-trips") {
  ModelParams p;
  p.variant = Variant::T2;
  p.kappa_levels = {0.37, 1.9};
  p.rho_levels = {2.4, 0.011};
  p.alpha_kappa = -1.3;
  p.alpha_rho = 0.4;
  p.eta = 0.73;
  for (ParamMap map : {ParamMap::LogLevels, ParamMap::SoftplusLevels}) {
    std::vector<double> x = to_unconstrained(p, map);
    ModelParams back = from_unconstrained(Variant::T2, true, x, map);
    for (int i = 0; i < 2; ++i) {
      CHECK(back.kappa_levels[i] == Catch::Approx(p.kappa_levels[i]).epsilon(1e-12));
      CHECK(back.rho_levels[i] == Catch::Approx(p.rho_levels[i]).epsilon(1e-12));
    }
    CHECK(back.alpha_kappa == Catch::Approx(p.alpha_kappa).epsilon(1e-12));
    CHECK(back.alpha_rho == Catch::Approx(p.alpha_rho).epsilon(1e-12));
    CHECK(*back.eta == Catch::Approx(*p.eta).epsilon(1e-12));
  }
}

TEST_CASE("natural parameter vector matches the declared name order") {
  ModelParams p;
  p.variant = Variant::T1;
  p.kappa_levels = {2.0};
  p.rho_levels = {3.0};
  p.alpha_kappa = -1.0;
  p.alpha_rho = -2.0;
  auto names = p.names();
  auto vals = to_natural(p);
  REQUIRE(names.size() == vals.size());
  REQUIRE(names == std::vector<std::string>{"kappa_0", "alpha_kappa", "rho_0", "alpha_rho"});
  CHECK(vals == std::vector<double>{2.0, -1.0, 3.0, -2.0});
  ModelParams back = from_natural(Variant::T1, false, vals);
  CHECK(back.kappa_levels == p.kappa_levels);
  CHECK(back.alpha_rho == p.alpha_rho);
}

TEST_CASE("smith preset constants everywhere") {
  TickGrid grid{6, 0.01, 0.0};
  IntensitySpec s = smith_preset(1.0, 0.5, 0.2, grid);
  for (int b = 0; b <= grid.n; ++b)
    for (int a = b + 1; a <= grid.n + 1; ++a) {
      CHECK(s.theta(a, b) == 1.0);
      CHECK(s.vartheta(a, b) == 1.0);
      for (int p = 1; p <= grid.n; ++p) {
        CHECK(s.kappa(a, b, p) == 0.5);
        CHECK(s.lambda(a, b, p) == 0.5);
        CHECK(s.rho(a, b, p) == 0.2);
        CHECK(s.sigma(a, b, p) == 0.2);
      }
    }
  CHECK(s.validate(grid).empty());
}

TEST_CASE("luckock preset has no cancellations") {
  TickGrid grid{4, 0.01, 0.0};
  auto K = [](int p) { return std::min(1.0, std::max(0.0, p / 4.0)); };
  IntensitySpec s = luckock_preset(K, K, grid);
  for (int p = 1; p <= grid.n; ++p) {
    CHECK(s.rho(3, 1, p) == 0.0);
    CHECK(s.sigma(3, 1, p) == 0.0);
  }
  // ergodicity precondition warnings fire (rho = sigma = 0 by design)
  CHECK_FALSE(s.validate(grid).empty());
}

TEST_CASE("stigler preset: uniform arrival increments") {
  TickGrid grid{4, 0.01, 0.0};
  IntensitySpec s = stigler_preset(grid);
  for (int p = 1; p <= grid.n; ++p) {
    CHECK(s.kappa(5, 0, p) == Catch::Approx(0.25));
    CHECK(s.lambda(5, 0, p) == Catch::Approx(0.25));
  }
}

TEST_CASE("luckock preset rejects non-monotone arrival cdf") {
  TickGrid grid{4, 0.01, 0.0};
  auto bad = [](int p) { return p == 2 ? 0.9 : p / 4.0; };
  auto good = [](int p) { return std::clamp(p / 4.0, 0.0, 1.0); };
  CHECK_THROWS_AS(luckock_preset(bad, good, grid), std::invalid_argument);
}

TEST_CASE("intensity validation rejects negative rates") {
  TickGrid grid{4, 0.01, 0.0};
  IntensitySpec s = smith_preset(1.0, 0.5, 0.2, grid);
  s.kappa = [](int, int, int p) { return p == 3 ? -0.1 : 0.5; };
  CHECK_THROWS_AS(s.validate(grid), std::invalid_argument);
}

TEST_CASE("model params validation") {
  ModelParams p;
  p.variant = Variant::S;
  p.kappa_levels = {0.5};
  p.rho_levels = {1.0};
  CHECK_NOTHROW(p.validate());
  p.rho_levels = {0.0};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.rho_levels = {1.0, 2.0};  // wrong arity for S
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.rho_levels = {1.0};
  p.eta = 1.5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
