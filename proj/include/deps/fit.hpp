#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

#include "deps/beta.hpp"
#include "deps/error.hpp"
#include "deps/special_functions.hpp"

namespace deps {

enum class FitMethod { mle, mom };

inline std::string_view to_string(FitMethod m) { return m == FitMethod::mle ? "mle" : "mom"; }

template <typename Scalar>
struct FitResultT {
  BetaParamsT<Scalar> params;
  FitMethod method = FitMethod::mle;
  int iterations = 0;
  bool converged = false;
  Eigen::Index n_samples = 0;
};

using FitResult = FitResultT<double>;

template <typename Scalar>
struct MleOptions {
  Scalar tolerance = Scalar(1e-10);  // on the per-sample score norm
  int max_iters = 500;
  Scalar lower = Scalar(1e-6);
  Scalar upper = Scalar(1e6);
};

namespace detail {

template <typename Derived>
void require_open_unit(const Eigen::ArrayBase<Derived>& sample) {
  using Scalar = typename Derived::Scalar;
  if (!((sample > Scalar(0)) && (sample < Scalar(1))).all()) {
    throw DomainError("beta fit requires every value strictly inside (0, 1)");
  }
}

template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> mean_score(const BetaParamsT<Scalar>& p, Scalar mean_log, Scalar mean_log1m) {
  const Scalar psi_sum = digamma(p.alpha + p.beta);
  return {mean_log - (digamma(p.alpha) - psi_sum), mean_log1m - (digamma(p.beta) - psi_sum)};
}

}  // namespace detail

/// Method-of-moments beta fit with the unbiased (N - 1) sample variance.
template <typename Derived>
FitResultT<typename Derived::Scalar> fit_beta_mom(const Eigen::ArrayBase<Derived>& sample) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = sample.size();
  if (n < 2) throw DegenerateSampleError("method of moments needs at least two values");
  const Scalar mean = sample.mean();
  const Scalar var = (sample - mean).square().sum() / static_cast<Scalar>(n - 1);
  if (!(var > Scalar(0))) throw DegenerateSampleError("method of moments needs a sample with nonzero variance");
  const Scalar spread = mean * (Scalar(1) - mean);
  if (!(var < spread)) {
    throw MomentInfeasibleError("sample variance " + std::to_string(var) + " is not below mean*(1-mean) = " +
                                std::to_string(spread));
  }
  const Scalar common = spread / var - Scalar(1);
  FitResultT<Scalar> out;
  out.params = {mean * common, (Scalar(1) - mean) * common};
  out.method = FitMethod::mom;
  out.converged = true;
  out.n_samples = n;
  return out;
}

/// Maximum-likelihood beta fit.
///
/// Newton iteration on the two score equations
///   mean ln x       = psi(alpha) - psi(alpha + beta)
///   mean ln (1 - x) = psi(beta)  - psi(alpha + beta)
/// starting from the method-of-moments estimate. The log-likelihood is
/// concave in (alpha, beta), so each Newton step is halved until it
/// increases the likelihood and stays inside [lower, upper]^2.
/// Convergence means the per-sample score norm is within tolerance.
template <typename Derived>
FitResultT<typename Derived::Scalar> fit_beta_mle(const Eigen::ArrayBase<Derived>& sample,
                                                  const MleOptions<typename Derived::Scalar>& opts = {}) {
  using Scalar = typename Derived::Scalar;
  using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
  using Mat2 = Eigen::Matrix<Scalar, 2, 2>;

  const Eigen::Index n = sample.size();
  if (n < 2) throw DegenerateSampleError("maximum likelihood needs at least two values");
  detail::require_open_unit(sample);
  if (sample.maxCoeff() == sample.minCoeff()) {
    throw DegenerateSampleError("maximum likelihood needs at least two distinct values");
  }

  const BetaSufficientStats<Scalar> stats = beta_sufficient_stats(sample);
  const Scalar mean_log = stats.sum_log / static_cast<Scalar>(n);
  const Scalar mean_log1m = stats.sum_log1m / static_cast<Scalar>(n);
  auto clamp = [&](Scalar v) { return std::clamp(v, opts.lower, opts.upper); };

  BetaParamsT<Scalar> cur;
  try {
    const auto mom = fit_beta_mom(sample);
    cur = {clamp(mom.params.alpha), clamp(mom.params.beta)};
  } catch (const MomentInfeasibleError&) {
    // Over-dispersed sample: start from a U-shaped guess with the right mean.
    const Scalar m = sample.mean();
    cur = {clamp(m), clamp(Scalar(1) - m)};
  }

  FitResultT<Scalar> out;
  out.method = FitMethod::mle;
  out.n_samples = n;

  Scalar ll = beta_log_likelihood(cur, stats);
  Vec2 g = detail::mean_score(cur, mean_log, mean_log1m);
  int it = 0;
  for (; it < opts.max_iters && !(g.norm() <= opts.tolerance); ++it) {
    const Scalar t_sum = trigamma(cur.alpha + cur.beta);
    // Hessian of the mean log-likelihood, negative definite.
    Mat2 h;
    h << -(trigamma(cur.alpha) - t_sum), t_sum, t_sum, -(trigamma(cur.beta) - t_sum);
    const Vec2 step = -h.inverse() * g;

    Scalar scale = 1;
    bool moved = false;
    for (int halving = 0; halving < 60; ++halving, scale /= 2) {
      const BetaParamsT<Scalar> trial{clamp(cur.alpha + scale * step(0)), clamp(cur.beta + scale * step(1))};
      const Scalar trial_ll = beta_log_likelihood(trial, stats);
      // Near the optimum the likelihood is flat to rounding; the score
      // norm is the sharper test there.
      const Vec2 trial_g = detail::mean_score(trial, mean_log, mean_log1m);
      if (trial_ll >= ll || trial_g.norm() < g.norm()) {
        moved = !(trial == cur);
        cur = trial;
        ll = trial_ll;
        g = trial_g;
        break;
      }
    }
    if (!moved) {
      ++it;
      break;
    }
  }
  out.params = cur;
  out.iterations = it;
  out.converged = g.norm() <= opts.tolerance;
  return out;
}

}  // namespace deps
