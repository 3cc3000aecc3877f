#include <doctest.h>

#include <cmath>

#include "deps/error.hpp"
#include "deps/evaluation.hpp"
#include "deps/rng.hpp"

using deps::BetaParams;

TEST_CASE("kl of identical distributions is exactly zero") {
  CHECK(deps::kl_beta_beta({3.7, 1.2}, {3.7, 1.2}).nats == 0.0);
  CHECK(deps::kl_numeric_oracle({3.7, 1.2}, {3.7, 1.2}) <= 1e-10);
}

TEST_CASE("uniform against Beta(2,2)") {
  const double expected = 2.0 - std::log(6.0);
  CHECK(deps::kl_beta_beta({1, 1}, {2, 2}).nats == doctest::Approx(expected).epsilon(1e-12));
  CHECK(deps::kl_numeric_oracle({1, 1}, {2, 2}) == doctest::Approx(expected).epsilon(1e-9));
  CHECK(expected == doctest::Approx(0.2082).epsilon(1e-4));
}

TEST_CASE("kl is asymmetric and records its direction") {
  const auto forward = deps::kl_beta_beta({1, 1}, {2, 2});
  const auto backward = deps::kl_beta_beta({2, 2}, {1, 1});
  CHECK(forward.nats != doctest::Approx(backward.nats));
  CHECK(forward.reference == BetaParams{1, 1});
  CHECK(forward.candidate == BetaParams{2, 2});
}

TEST_CASE("kl rejects invalid parameters") {
  CHECK_THROWS_AS(deps::kl_beta_beta({0, 1}, {1, 1}), deps::ParameterError);
  CHECK_THROWS_AS(deps::kl_beta_beta({1, 1}, {1, -2}), deps::ParameterError);
}

TEST_CASE("property: closed form matches quadrature on random pairs") {
  deps::Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const BetaParams x{0.3 + 10 * rng.uniform(), 0.3 + 10 * rng.uniform()};
    const BetaParams y{0.3 + 10 * rng.uniform(), 0.3 + 10 * rng.uniform()};
    CHECK(deps::kl_beta_beta(x, y).nats == doctest::Approx(deps::kl_numeric_oracle(x, y)).epsilon(1e-8));
  }
}

TEST_CASE("property: kl is nonnegative on [0.1, 50]^4") {
  deps::Rng rng(12);
  auto draw = [&] { return 0.1 * std::pow(500.0, rng.uniform()); };
  for (int i = 0; i < 20000; ++i) {
    const BetaParams x{draw(), draw()}, y{draw(), draw()};
    CHECK(deps::kl_beta_beta(x, y).nats >= -1e-9);
  }
}

TEST_CASE("oracle grid size is bounded below") {
  CHECK_THROWS_AS(deps::kl_numeric_oracle({1, 1}, {2, 2}, 10), deps::ConfigError);
}

TEST_CASE("responses_to_threshold finds the first crossing") {
  deps::EfficiencyCurve c{"deps", {{100, 0.5}, {200, 0.25}}};
  CHECK(deps::responses_to_threshold(c, 0.3) == 200);
  CHECK_FALSE(deps::responses_to_threshold(c, 0.1).has_value());
  CHECK(deps::responses_to_threshold(c, 1e300) == 100);
}

TEST_CASE("property: responses_to_threshold is monotone in the threshold") {
  deps::Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    deps::EfficiencyCurve c{"m", {}};
    for (int k = 1; k <= 30; ++k) c.points.push_back({k * 10, rng.uniform()});
    std::int64_t previous = 0;
    for (double t = 1.0; t >= 0.0; t -= 0.05) {
      const auto hit = deps::responses_to_threshold(c, t);
      if (!hit) break;
      CHECK(*hit >= previous);
      previous = *hit;
    }
  }
}

TEST_CASE("curves need strictly increasing budgets") {
  deps::EfficiencyCurve c{"m", {{200, 0.1}, {100, 0.2}}};
  CHECK_THROWS(c.validate());
}
