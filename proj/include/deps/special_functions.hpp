#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <type_traits>

namespace deps {

// Digamma and trigamma: upward recurrence until x >= 10, then the
// Bernoulli-number asymptotic expansion (Abramowitz & Stegun 6.3.18 and
// 6.4.12). At x = 10 the first omitted term is below 1e-17 relative.

/// Digamma psi(x) = d/dx ln Gamma(x). NaN at the poles x = 0, -1, -2, ...
template <typename Scalar>
Scalar digamma(Scalar x) {
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  if (std::isnan(x)) return x;
  if (x <= Scalar(0)) {
    if (x == std::floor(x)) return std::numeric_limits<Scalar>::quiet_NaN();
    // Reflection: psi(1 - x) - psi(x) = pi cot(pi x).
    return digamma(Scalar(1) - x) - pi / std::tan(pi * x);
  }
  Scalar shift = 0;
  while (x < Scalar(10)) {
    shift -= Scalar(1) / x;
    x += Scalar(1);
  }
  const Scalar inv2 = Scalar(1) / (x * x);
  // sum_k B_2k / (2k x^2k), k = 1..7
  const Scalar tail =
      inv2 * (Scalar(1) / 12 -
              inv2 * (Scalar(1) / 120 -
                      inv2 * (Scalar(1) / 252 -
                              inv2 * (Scalar(1) / 240 -
                                      inv2 * (Scalar(1) / 132 -
                                              inv2 * (Scalar(691) / 32760 - inv2 * (Scalar(1) / 12)))))));
  return shift + std::log(x) - Scalar(0.5) / x - tail;
}

/// Trigamma psi'(x), x > 0.
template <typename Scalar>
Scalar trigamma(Scalar x) {
  if (std::isnan(x) || x <= Scalar(0)) return std::numeric_limits<Scalar>::quiet_NaN();
  Scalar shift = 0;
  while (x < Scalar(10)) {
    shift += Scalar(1) / (x * x);
    x += Scalar(1);
  }
  const Scalar inv = Scalar(1) / x;
  const Scalar inv2 = inv * inv;
  // 1/x + 1/(2x^2) + sum_k B_2k / x^(2k+1), k = 1..7
  const Scalar series =
      Scalar(1) / 6 -
      inv2 * (Scalar(1) / 30 -
              inv2 * (Scalar(1) / 42 -
                      inv2 * (Scalar(1) / 30 -
                              inv2 * (Scalar(5) / 66 - inv2 * (Scalar(691) / 2730 - inv2 * (Scalar(7) / 6))))));
  return shift + inv + inv2 / 2 + inv2 * inv * series;
}

/// ln Gamma(x) for x > 0, through the reentrant libm entry point where
/// available so concurrent replicates do not race on `signgam`.
template <typename Scalar>
Scalar log_gamma(Scalar x) {
#if defined(__GLIBC__)
  int sign = 0;
  if constexpr (std::is_same_v<Scalar, float>) {
    return ::lgammaf_r(x, &sign);
  } else if constexpr (std::is_same_v<Scalar, long double>) {
    return ::lgammal_r(x, &sign);
  } else {
    return static_cast<Scalar>(::lgamma_r(static_cast<double>(x), &sign));
  }
#else
  return std::lgamma(x);
#endif
}

/// ln B(a, b) = ln Gamma(a) + ln Gamma(b) - ln Gamma(a + b).
template <typename Scalar>
Scalar log_beta(Scalar a, Scalar b) {
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

}  // namespace deps
