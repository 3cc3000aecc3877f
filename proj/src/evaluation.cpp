#include "deps/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "deps/error.hpp"

namespace deps {

namespace {
// ln(1 + e^z) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }
}  // namespace

KlResult kl_beta_beta(const BetaParams& reference, const BetaParams& candidate) {
  require_valid(reference, "reference distribution");
  require_valid(candidate, "candidate distribution");
  return {kl_divergence(reference, candidate), reference, candidate};
}

double kl_numeric_oracle(const BetaParams& reference, const BetaParams& candidate, int grid_size) {
  require_valid(reference, "reference distribution");
  require_valid(candidate, "candidate distribution");
  if (grid_size < 1000) throw ConfigError("quadrature oracle needs at least 1000 nodes");

  const double norm_x = std::lgamma(reference.alpha) + std::lgamma(reference.beta) -
                        std::lgamma(reference.alpha + reference.beta);
  const double norm_y = std::lgamma(candidate.alpha) + std::lgamma(candidate.beta) -
                        std::lgamma(candidate.alpha + candidate.beta);

  // x = 1 / (1 + e^{-2u}), u = (pi/2) sinh(t); t in [-t_max, t_max].
  // ln x, ln(1-x) and dx/dt are formed from u directly so nodes that round
  // to 0 or 1 in x keep full relative precision.
  constexpr double t_max = 6.5;
  const double h = 2.0 * t_max / (grid_size - 1);
  const double half_pi = std::numbers::pi / 2.0;
  double sum = 0.0;
  for (int k = 0; k < grid_size; ++k) {
    const double t = -t_max + k * h;
    const double u = half_pi * std::sinh(t);
    const double log_x = -softplus(-2.0 * u);
    const double log_1mx = -softplus(2.0 * u);
    // dx/dt = 2 x (1-x) du/dt
    const double log_jac = std::log(2.0) + log_x + log_1mx + std::log(half_pi * std::cosh(t));
    const double log_fx = (reference.alpha - 1.0) * log_x + (reference.beta - 1.0) * log_1mx - norm_x;
    const double log_fy = (candidate.alpha - 1.0) * log_x + (candidate.beta - 1.0) * log_1mx - norm_y;
    const double weight = std::exp(log_fx + log_jac);
    if (weight == 0.0) continue;
    sum += weight * (log_fx - log_fy);
  }
  const double result = sum * h;
  return std::isfinite(result) ? result : std::numeric_limits<double>::infinity();
}

void EfficiencyCurve::validate() const {
  if (points.empty()) throw ValidationError("efficiency curve for " + method + " is empty");
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].budget_used <= points[i - 1].budget_used) {
      throw ValidationError("efficiency curve budgets must be strictly increasing");
    }
  }
}

std::optional<std::int64_t> responses_to_threshold(const EfficiencyCurve& curve, double threshold) {
  curve.validate();
  for (const auto& p : curve.points) {
    if (p.nats <= threshold) return p.budget_used;
  }
  return std::nullopt;
}

}  // namespace deps
