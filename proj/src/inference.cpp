#include "deps/inference.hpp"

#include <cmath>

#include "deps/error.hpp"

namespace deps {

const BetaParams& DecisionPriors::for_decision(Decision d) const {
  switch (d) {
    case Decision::negative:
      return neg;
    case Decision::positive:
      return pos;
    case Decision::undecided:
      break;
  }
  return zero;
}

void DecisionPriors::validate() const {
  require_valid(neg, "prior for d = -1");
  require_valid(zero, "prior for d = 0");
  require_valid(pos, "prior for d = +1");
}

DecisionPriors real_data_priors() { return {{1, 2}, {2, 2}, {2, 1}}; }

DecisionPriors synthetic_priors() { return {{1, 5}, {5, 5}, {5, 1}}; }

BetaParams posterior_params(const TaskState& state, const DecisionPriors& priors) {
  const BetaParams& prior = priors.for_decision(state.d);
  return {state.a + prior.alpha, state.b + prior.beta};
}

DebiasedSample sample_debiased(std::span<const TaskState> states, const DecisionPriors& priors,
                               int samples_per_task, std::uint64_t seed) {
  priors.validate();
  if (samples_per_task < 1) throw ConfigError("samples_per_task must be at least 1");
  Rng rng(seed);
  DebiasedSample out;
  out.seed = seed;
  out.values.resize(static_cast<Eigen::Index>(states.size()) * samples_per_task);
  Eigen::Index k = 0;
  for (const auto& s : states) {
    const BetaParams post = posterior_params(s, priors);
    for (int r = 0; r < samples_per_task; ++r) out.values(k++) = rng.beta(post.alpha, post.beta);
  }
  return out;
}

void GoldStandardOutcome::validate() const {
  if (n0 < 0 || n1 < 0 || m00 < 0 || m01 < 0 || m10 < 0 || m11 < 0) {
    throw ValidationError("gold-standard counts must be nonnegative");
  }
  if (m00 + m01 != n0) throw ValidationError("gold-standard counts need m00 + m01 = n0");
  if (m10 + m11 != n1) throw ValidationError("gold-standard counts need m10 + m11 = n1");
}

GoldStandardOutcome tally_gold_outcome(std::span<const TaskState> states, std::span<const Label> truth) {
  if (states.size() != truth.size()) throw ValidationError("gold labels and task states differ in length");
  GoldStandardOutcome g;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const Decision d = states[i].d;
    if (d == Decision::undecided) continue;
    if (truth[i] == Label::zero) {
      ++g.n0;
      (d == Decision::negative ? g.m00 : g.m01)++;
    } else {
      ++g.n1;
      (d == Decision::positive ? g.m11 : g.m10)++;
    }
  }
  return g;
}

DecisionPriors calibrate_priors(const GoldStandardOutcome& gold, const CalibrationOptions& options) {
  gold.validate();
  require_valid(options.zero_prior, "prior for d = 0");
  const double add = options.smooth ? 1.0 : 0.0;
  const double n0 = gold.n0 + 2.0 * add;
  const double n1 = gold.n1 + 2.0 * add;
  const double m01 = gold.m01 + add;
  const double m10 = gold.m10 + add;
  if (m01 == 0.0) throw CalibrationError("no gold task with z = 0 was decided +1; enable smoothing");
  if (m10 == 0.0) throw CalibrationError("no gold task with z = 1 was decided -1; enable smoothing");

  const double b_neg = std::log2(n0 / m01);
  const double a_pos = std::log2(n1 / m10);
  if (!(b_neg > 0.0)) throw CalibrationError("every z = 0 gold task was decided +1; the d = -1 prior is undefined");
  if (!(a_pos > 0.0)) throw CalibrationError("every z = 1 gold task was decided -1; the d = +1 prior is undefined");

  DecisionPriors out;
  out.neg = {1.0, b_neg};
  out.zero = options.zero_prior;
  out.pos = {a_pos, 1.0};
  return out;
}

double neg_prior_mass_below_half(const BetaParams& neg) { return 1.0 - std::exp2(-neg.beta); }

std::string_view to_string(WaldVariant v) { return v == WaldVariant::smoothed ? "wald-smoothed" : "wald-transformed"; }

Eigen::ArrayXd wald_estimates(std::span<const TaskState> states, WaldVariant variant, double epsilon,
                              std::size_t n_tasks) {
  Eigen::ArrayXd out(static_cast<Eigen::Index>(states.size()));
  if (variant == WaldVariant::smoothed) {
    if (!(epsilon > 0.0)) throw ConfigError("smoothed Wald needs epsilon > 0");
    for (std::size_t i = 0; i < states.size(); ++i) {
      out(static_cast<Eigen::Index>(i)) = (states[i].a + epsilon) / (states[i].n() + 2.0 * epsilon);
    }
    return out;
  }
  if (n_tasks < 1) throw ConfigError("transformed Wald needs N >= 1");
  const double big_n = static_cast<double>(n_tasks);
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].n() == 0) {
      throw UndefinedEstimateError("transformed Wald estimate undefined for task " + std::to_string(i) +
                                   " with no responses");
    }
    out(static_cast<Eigen::Index>(i)) = (point_estimate(states[i]) * (big_n - 1.0) + 0.5) / big_n;
  }
  return out;
}

FitResult fit_wald(std::span<const TaskState> states, WaldVariant variant, double epsilon) {
  if (variant == WaldVariant::smoothed) {
    return fit_beta_mle(wald_estimates(states, variant, epsilon, states.size()));
  }
  std::vector<TaskState> observed;
  observed.reserve(states.size());
  for (const auto& s : states) {
    if (s.n() > 0) observed.push_back(s);
  }
  return fit_beta_mom(wald_estimates(observed, variant, epsilon, observed.size()));
}

FitResult deps_pipeline(std::span<const TaskState> states, const DecisionPriors& priors, FitMethod fit_method,
                        std::uint64_t seed, int samples_per_task) {
  const DebiasedSample sample = sample_debiased(states, priors, samples_per_task, seed);
  return fit_method == FitMethod::mle ? fit_beta_mle(sample.values) : fit_beta_mom(sample.values);
}

std::vector<TaskState> full_data_states(const ProblemInstance& problem) {
  if (problem.mode != ProblemInstance::Mode::replay) {
    throw ContractError("full-data counts need a replay instance");
  }
  std::vector<TaskState> out(problem.n_tasks());
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (const auto& rec : problem.pools[i]) out[i] = record_response(out[i], rec.label);
  }
  return out;
}

}  // namespace deps
