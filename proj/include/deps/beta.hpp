#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>

#include "deps/error.hpp"
#include "deps/special_functions.hpp"

namespace deps {

/// Shape parameters of a beta distribution.
template <typename Scalar>
struct BetaParamsT {
  Scalar alpha{1};
  Scalar beta{1};

  bool valid() const {
    return std::isfinite(alpha) && std::isfinite(beta) && alpha > Scalar(0) && beta > Scalar(0);
  }
  Scalar mean() const { return alpha / (alpha + beta); }
  Scalar variance() const {
    const Scalar s = alpha + beta;
    return alpha * beta / (s * s * (s + Scalar(1)));
  }

  friend bool operator==(const BetaParamsT&, const BetaParamsT&) = default;
};

using BetaParams = BetaParamsT<double>;

/// Builds a parameter pair, throwing ParameterError unless both are positive and finite.
template <typename Scalar>
BetaParamsT<Scalar> make_beta(Scalar alpha, Scalar beta) {
  BetaParamsT<Scalar> p{alpha, beta};
  if (!p.valid()) {
    throw ParameterError("beta parameters must be positive and finite, got (" + std::to_string(alpha) + ", " +
                         std::to_string(beta) + ")");
  }
  return p;
}

template <typename Scalar>
void require_valid(const BetaParamsT<Scalar>& p, const char* what = "beta parameters") {
  if (!p.valid()) {
    throw ParameterError(std::string(what) + " must be positive and finite, got (" + std::to_string(p.alpha) + ", " +
                         std::to_string(p.beta) + ")");
  }
}

template <typename Scalar>
Scalar beta_log_density(const BetaParamsT<Scalar>& p, Scalar x) {
  return (p.alpha - Scalar(1)) * std::log(x) + (p.beta - Scalar(1)) * std::log1p(-x) - log_beta(p.alpha, p.beta);
}

/// Sufficient statistics of a sample on (0, 1) for the beta likelihood.
template <typename Scalar>
struct BetaSufficientStats {
  Eigen::Index count = 0;
  Scalar sum_log = 0;    // sum ln x
  Scalar sum_log1m = 0;  // sum ln(1 - x)
};

template <typename Derived>
BetaSufficientStats<typename Derived::Scalar> beta_sufficient_stats(const Eigen::ArrayBase<Derived>& sample) {
  return {sample.size(), sample.log().sum(), (-sample).log1p().sum()};
}

/// Joint log-likelihood of (alpha, beta) given sufficient statistics.
template <typename Scalar>
Scalar beta_log_likelihood(const BetaParamsT<Scalar>& p, const BetaSufficientStats<Scalar>& s) {
  return (p.alpha - Scalar(1)) * s.sum_log + (p.beta - Scalar(1)) * s.sum_log1m -
         static_cast<Scalar>(s.count) * log_beta(p.alpha, p.beta);
}

template <typename Derived>
typename Derived::Scalar beta_log_likelihood(const BetaParamsT<typename Derived::Scalar>& p,
                                             const Eigen::ArrayBase<Derived>& sample) {
  return beta_log_likelihood(p, beta_sufficient_stats(sample));
}

}  // namespace deps
