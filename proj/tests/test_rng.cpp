#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>
#include <unsupported/Eigen/SpecialFunctions>

#include "deps/beta.hpp"
#include "deps/rng.hpp"

TEST_CASE("same seed gives the same stream") {
  deps::Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const double x = a.beta(0.7, 2.5);
    CHECK(x == b.beta(0.7, 2.5));
    differs |= x != c.beta(0.7, 2.5);
  }
  CHECK(differs);
}

TEST_CASE("uniform variates stay in range") {
  deps::Rng rng(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    const double v = rng.uniform_open();
    CHECK((v > 0.0 && v < 1.0));
    CHECK(rng.below(7) < 7u);
  }
}

TEST_CASE("bernoulli handles degenerate probabilities") {
  deps::Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    CHECK(rng.bernoulli(1.0));
    CHECK_FALSE(rng.bernoulli(0.0));
  }
}

TEST_CASE("beta variates are strictly inside the unit interval even for tiny shapes") {
  deps::Rng rng(3);
  for (int i = 0; i < 20000; ++i) {
    const double x = rng.beta(0.01, 0.01);
    CHECK((x > 0.0 && x < 1.0));
  }
}

TEST_CASE("beta variates concentrate for huge shapes") {
  deps::Rng rng(4);
  CHECK(rng.beta(1e6, 1e6) == doctest::Approx(0.5).epsilon(0.01));
}

// Pearson chi-square over 20 equiprobable bins; edges come from inverting
// Eigen's regularized incomplete beta by bisection.
double chi_square_beta(double a, double b, std::uint64_t seed, int n) {
  constexpr int kBins = 20;
  auto cdf = [&](double x) {
    Eigen::Array<double, 1, 1> av, bv, xv;
    av << a;
    bv << b;
    xv << x;
    return Eigen::betainc(av, bv, xv)(0);
  };
  std::array<double, kBins + 1> edges{};
  edges[kBins] = 1.0;
  for (int k = 1; k < kBins; ++k) {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (cdf(mid) < static_cast<double>(k) / kBins ? lo : hi) = mid;
    }
    edges[k] = 0.5 * (lo + hi);
  }
  std::array<int, kBins> counts{};
  deps::Rng rng(seed);
  for (int s = 0; s < n; ++s) {
    const double x = rng.beta(a, b);
    const auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, x);
    ++counts[static_cast<std::size_t>(it - edges.begin() - 1)];
  }
  const double expected = static_cast<double>(n) / kBins;
  double chi = 0.0;
  for (int c : counts) chi += (c - expected) * (c - expected) / expected;
  return chi;
}

TEST_CASE("property: beta sampler passes a chi-square goodness-of-fit test") {
  // 19 degrees of freedom; the 0.999 quantile is 43.8.
  for (auto [a, b] : {std::pair{2.0, 5.0}, {0.5, 0.5}, {1.0, 1.0}, {5.0, 1.0}, {0.3, 3.0}}) {
    CAPTURE(a);
    CAPTURE(b);
    CHECK(chi_square_beta(a, b, 99, 100000) < 43.8);
  }
}

TEST_CASE("normal variates have unit variance") {
  deps::Rng rng(5);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(sum / n == doctest::Approx(0.0).epsilon(0.01));
  CHECK(sq / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("shuffle is a permutation") {
  std::vector<int> v(100);
  for (int i = 0; i < 100; ++i) v[i] = i;
  deps::Rng rng(6);
  rng.shuffle(std::span<int>(v));
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 100; ++i) CHECK(sorted[i] == i);
  CHECK(v != sorted);
}

TEST_CASE("derived seeds separate streams") {
  CHECK(deps::derive_seed(1, 0) != deps::derive_seed(1, 1));
  CHECK(deps::derive_seed(1, 0) != deps::derive_seed(2, 0));
  CHECK(deps::derive_seed(7, 3) == deps::derive_seed(7, 3));
}
