#include "deps/rng.hpp"

#include <cmath>
#include <limits>

namespace deps {

namespace {
constexpr double kTwoPow53Inv = 1.0 / 9007199254740992.0;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * kTwoPow53Inv; }

double Rng::uniform_open() { return (static_cast<double>(next() >> 11) + 0.5) * kTwoPow53Inv; }

std::uint64_t Rng::below(std::uint64_t n) {
  // Reject the low residue class so every value in [0, n) is equally likely.
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = next();
    if (r >= threshold) return r % n;
  }
}

bool Rng::bernoulli(double p) { return uniform() < p; }

double Rng::normal() {
  for (;;) {
    const double u = 2.0 * uniform() - 1.0;
    const double v = 2.0 * uniform() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

double Rng::log_gamma_variate(double shape) {
  if (shape < 1.0) {
    const double boost = std::log(uniform_open()) / shape;
    return log_gamma_variate(shape + 1.0) + boost;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_open();
    if (u < 1.0 - 0.0331 * x * x * x * x ||
        std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return std::log(d) + std::log(v);
    }
  }
}

double Rng::beta(double alpha, double beta) {
  const double log_x = log_gamma_variate(alpha);
  const double log_y = log_gamma_variate(beta);
  // x / (x + y) evaluated as a logistic of the log ratio.
  const double p = 1.0 / (1.0 + std::exp(log_y - log_x));
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  if (!(p > lo)) return lo;
  if (p > hi) return hi;
  return p;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace deps
