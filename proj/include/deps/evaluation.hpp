#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "deps/beta.hpp"
#include "deps/special_functions.hpp"

namespace deps {

/// KL(X || Y) in nats for X = Beta(x), Y = Beta(y), closed form:
///   ln(B(a',b') / B(a,b)) + (a-a') psi(a) + (b-b') psi(b) + (a'-a+b'-b) psi(a+b)
template <typename Scalar>
Scalar kl_divergence(const BetaParamsT<Scalar>& x, const BetaParamsT<Scalar>& y) {
  if (x == y) return Scalar(0);
  return log_beta(y.alpha, y.beta) - log_beta(x.alpha, x.beta) + (x.alpha - y.alpha) * digamma(x.alpha) +
         (x.beta - y.beta) * digamma(x.beta) + (y.alpha - x.alpha + y.beta - x.beta) * digamma(x.alpha + x.beta);
}

/// Divergence with its direction attached: `reference` is X (truth or
/// full-data fit), `candidate` is Y (the inferred distribution).
struct KlResult {
  double nats = 0.0;
  BetaParams reference;
  BetaParams candidate;
};

KlResult kl_beta_beta(const BetaParams& reference, const BetaParams& candidate);

/// Tanh-sinh quadrature of f_X ln(f_X / f_Y) over (0, 1) on `grid_size`
/// nodes. The double-exponential substitution sends both endpoints to
/// infinity, which absorbs the x^(a-1) and (1-x)^(b-1) singularities.
/// Densities are normalized with std::lgamma, independently of log_beta.
/// Returns +inf if the integral does not evaluate to a finite value.
double kl_numeric_oracle(const BetaParams& reference, const BetaParams& candidate, int grid_size = 4000);

struct CurvePoint {
  std::int64_t budget_used = 0;
  double nats = 0.0;
};

/// Divergence as a function of responses received, for one method.
struct EfficiencyCurve {
  std::string method;
  std::vector<CurvePoint> points;  // budgets strictly increasing

  void validate() const;
};

/// Smallest budget whose divergence is at or below `threshold`.
std::optional<std::int64_t> responses_to_threshold(const EfficiencyCurve& curve, double threshold);

}  // namespace deps
