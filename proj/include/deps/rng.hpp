#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace deps {

/// Pseudo-random source threaded through every stochastic operation.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The variate generators are implemented here instead of using
/// the <random> distributions, whose algorithms are implementation-defined,
/// so a seed reproduces the same draws on any conforming toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1), 53 random bits.
  double uniform();

  /// Uniform on (0, 1); never returns either endpoint.
  double uniform_open();

  /// Uniform integer on [0, n). Requires n > 0.
  std::uint64_t below(std::uint64_t n);

  /// True with probability p. p >= 1 is always true, p <= 0 always false.
  bool bernoulli(double p);

  /// Standard normal (Marsaglia polar method).
  double normal();

  /// Natural log of a Gamma(shape, 1) variate (Marsaglia-Tsang, with the
  /// U^(1/shape) boost for shape < 1). Working in logs keeps very small
  /// shapes from underflowing to zero.
  double log_gamma_variate(double shape);

  /// Beta(alpha, beta) variate, always strictly inside (0, 1).
  double beta(double alpha, double beta);

  /// Fisher-Yates shuffle driven by below().
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Mixes a base seed with a stream tag (splitmix64 finalizer) so distinct
/// stages of one replicate draw from unrelated streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace deps
