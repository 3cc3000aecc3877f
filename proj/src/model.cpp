#include "deps/model.hpp"

#include <numeric>

#include "deps/error.hpp"

namespace deps {

TaskState record_response(TaskState state, Label label) {
  if (label == Label::one) {
    ++state.a;
  } else {
    ++state.b;
  }
  return state;
}

double point_estimate(const TaskState& state) {
  if (state.n() == 0) throw UndefinedEstimateError("point estimate undefined for a task with no responses");
  return static_cast<double>(state.a) / state.n();
}

std::int64_t ProblemInstance::responses_total() const {
  if (mode == Mode::synthetic) return kUnbounded;
  return std::accumulate(pools.begin(), pools.end(), std::int64_t{0},
                         [](std::int64_t acc, const ResponsePool& p) { return acc + std::int64_t(p.size()); });
}

ProblemInstance ProblemInstance::from_synthetic(std::vector<SyntheticTask> tasks) {
  if (tasks.empty()) throw ConfigError("a problem instance needs at least one task");
  ProblemInstance out;
  out.mode = Mode::synthetic;
  out.synthetic = std::move(tasks);
  return out;
}

ProblemInstance ProblemInstance::from_pools(std::vector<ResponsePool> pools, std::int64_t budget_cap) {
  if (pools.empty()) throw ValidationError("a problem instance needs at least one task");
  ProblemInstance out;
  out.mode = Mode::replay;
  out.pools = std::move(pools);
  const std::int64_t total = out.responses_total();
  if (budget_cap < 0) budget_cap = total / 2;
  if (budget_cap > total) {
    throw ConfigError("budget cap " + std::to_string(budget_cap) + " exceeds the " + std::to_string(total) +
                      " pooled responses");
  }
  out.budget_cap = budget_cap;
  return out;
}

ProblemInstance generate_synthetic_problem(std::size_t n_tasks, const BetaParams& prior, std::uint64_t seed) {
  require_valid(prior, "synthetic prior");
  if (n_tasks == 0) throw ConfigError("n_tasks must be at least 1");
  Rng rng(seed);
  std::vector<SyntheticTask> tasks(n_tasks);
  for (auto& t : tasks) {
    t.p = rng.beta(prior.alpha, prior.beta);
    if (t.p > 0.5) {
      t.z = Label::one;
    } else if (t.p < 0.5) {
      t.z = Label::zero;
    } else {
      t.z = rng.bernoulli(0.5) ? Label::one : Label::zero;
    }
  }
  return ProblemInstance::from_synthetic(std::move(tasks));
}

Label sample_response(const SyntheticTask& task, Rng& rng) {
  return rng.bernoulli(task.p) ? Label::one : Label::zero;
}

}  // namespace deps
