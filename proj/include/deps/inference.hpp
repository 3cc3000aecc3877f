#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "deps/beta.hpp"
#include "deps/fit.hpp"
#include "deps/model.hpp"

namespace deps {

/// Beta prior on a task's difficulty for each decision status.
struct DecisionPriors {
  BetaParams neg{1, 2};
  BetaParams zero{2, 2};
  BetaParams pos{2, 1};

  const BetaParams& for_decision(Decision d) const;
  void validate() const;

  friend bool operator==(const DecisionPriors&, const DecisionPriors&) = default;
};

/// (1,2) / (2,2) / (2,1): the weakly informative set used for recorded data.
DecisionPriors real_data_priors();
/// (1,5) / (5,5) / (5,1): the more confident set used for simulations.
DecisionPriors synthetic_priors();

/// Conjugate update (a + alpha_d, b + beta_d).
BetaParams posterior_params(const TaskState& state, const DecisionPriors& priors);

struct DebiasedSample {
  Eigen::ArrayXd values;
  std::uint64_t seed = 0;
};

/// Draws `samples_per_task` values from every task's decision-conditioned
/// posterior, concatenated task by task.
DebiasedSample sample_debiased(std::span<const TaskState> states, const DecisionPriors& priors,
                               int samples_per_task, std::uint64_t seed);

/// Outcome of running the allocator on gold-standard tasks. Only tasks
/// that ended decided are counted.
struct GoldStandardOutcome {
  int n0 = 0, n1 = 0;    // gold tasks with true label 0 / 1
  int m00 = 0, m01 = 0;  // of n0: decided -1 / decided +1
  int m10 = 0, m11 = 0;  // of n1: decided -1 / decided +1

  void validate() const;
};

/// Tallies decided gold tasks by true label. `truth[i]` is the true label of
/// task i; tasks that are still undecided are skipped.
GoldStandardOutcome tally_gold_outcome(std::span<const TaskState> states, std::span<const Label> truth);

struct CalibrationOptions {
  bool smooth = true;  // add one to every m count (and two to n0, n1)
  BetaParams zero_prior{2, 2};
};

/// Neg prior (1, log2(n0 / m01)) so it puts mass m00/n0 on [0, 1/2];
/// pos prior (log2(n1 / m10), 1) so it puts mass m11/n1 on [1/2, 1].
DecisionPriors calibrate_priors(const GoldStandardOutcome& gold, const CalibrationOptions& options = {});

/// Mass a Beta(1, b) puts on [0, 1/2]: 1 - 2^-b.
double neg_prior_mass_below_half(const BetaParams& neg);

enum class WaldVariant { smoothed, transformed };

std::string_view to_string(WaldVariant v);

/// Per-task Wald point estimates.
/// smoothed:    (a + eps) / (n + 2 eps), defined for every task;
/// transformed: ((a/n)(N - 1) + 1/2) / N, throws UndefinedEstimateError for n = 0.
Eigen::ArrayXd wald_estimates(std::span<const TaskState> states, WaldVariant variant, double epsilon,
                              std::size_t n_tasks);

/// Smoothed estimates fitted by MLE, transformed ones by the method of
/// moments. Tasks with no responses are dropped from the transformed
/// sample; `n_samples` of the result tells how many were kept.
FitResult fit_wald(std::span<const TaskState> states, WaldVariant variant, double epsilon = 1.0);

/// posterior_params -> sample_debiased -> beta fit.
FitResult deps_pipeline(std::span<const TaskState> states, const DecisionPriors& priors, FitMethod fit_method,
                        std::uint64_t seed, int samples_per_task = 1);

/// Reference-free counts of every response in a replay pool.
std::vector<TaskState> full_data_states(const ProblemInstance& problem);

}  // namespace deps
