#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "deps/beta.hpp"
#include "deps/rng.hpp"

namespace deps {

/// A binary worker response.
enum class Label : std::uint8_t { zero = 0, one = 1 };

inline int to_int(Label l) { return static_cast<int>(l); }

/// Decision indicator: decided z = 0, undecided, decided z = 1.
enum class Decision : std::int8_t { negative = -1, undecided = 0, positive = 1 };

inline int to_int(Decision d) { return static_cast<int>(d); }

struct ResponseRecord {
  int task_id = 0;
  int worker_id = 0;
  Label label = Label::zero;

  friend bool operator==(const ResponseRecord&, const ResponseRecord&) = default;
};

/// Label counts of one task and its decision.
struct TaskState {
  int a = 0;  // 1-labels
  int b = 0;  // 0-labels
  Decision d = Decision::undecided;

  int n() const { return a + b; }

  friend bool operator==(const TaskState&, const TaskState&) = default;
};

/// Counts after one more response; the decision is left untouched.
TaskState record_response(TaskState state, Label label);

/// Raw a / n. Throws UndefinedEstimateError when n = 0.
double point_estimate(const TaskState& state);

/// Latent difficulty and true label of a simulated task.
struct SyntheticTask {
  double p = 0.5;
  Label z = Label::zero;
};

using ResponsePool = std::vector<ResponseRecord>;

/// A set of tasks: either simulated (responses drawn on demand) or a
/// recorded log replayed in pool order.
struct ProblemInstance {
  enum class Mode { synthetic, replay };

  static constexpr std::int64_t kUnbounded = std::numeric_limits<std::int64_t>::max();

  Mode mode = Mode::synthetic;
  std::vector<SyntheticTask> synthetic;  // synthetic mode
  std::vector<ResponsePool> pools;       // replay mode, in reveal order
  std::int64_t budget_cap = kUnbounded;

  std::size_t n_tasks() const { return mode == Mode::synthetic ? synthetic.size() : pools.size(); }
  std::int64_t responses_total() const;

  static ProblemInstance from_synthetic(std::vector<SyntheticTask> tasks);
  /// budget_cap < 0 selects the default, half of the pooled responses.
  static ProblemInstance from_pools(std::vector<ResponsePool> pools, std::int64_t budget_cap = -1);
};

/// Draws n_tasks difficulties iid from `prior`. z = 1 iff p > 1/2, with a
/// seeded fair coin at exactly p = 1/2.
ProblemInstance generate_synthetic_problem(std::size_t n_tasks, const BetaParams& prior, std::uint64_t seed);

/// One Bernoulli(p) worker response.
Label sample_response(const SyntheticTask& task, Rng& rng);

}  // namespace deps
