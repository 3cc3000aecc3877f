#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "deps/model.hpp"
#include "deps/rng.hpp"

namespace deps {

/// Ratio completion requirement on smoothed counts.
struct CompletionConfig {
  double c = 4.0;          // ratio threshold, > 1
  double smoothing = 1.0;  // pseudo-count added to a and b, >= 0

  void validate() const;
};

/// True iff (a+s)/(b+s) > c or (b+s)/(a+s) > c. A zero denominator with a
/// nonzero numerator counts as an infinite ratio.
bool is_complete(const TaskState& state, const CompletionConfig& cfg);

/// 0 when incomplete, otherwise the sign of the majority.
Decision decide(const TaskState& state, const CompletionConfig& cfg);

/// Probability that one more response completes the task, with the next
/// label predicted by the uniform-prior posterior predictive (a+1)/(n+2).
/// Throws ContractError for an already complete task.
double completion_probability_one_step(const TaskState& state, const CompletionConfig& cfg);

enum class PolicyKind { requallo_greedy, uniform_random };

/// Fewest further responses after which the task could be complete, all of
/// them agreeing with the current majority. 0 for a complete task, 1 exactly
/// when the one-step completion probability is positive.
int responses_to_completion(const TaskState& state, const CompletionConfig& cfg);

/// Ordering among greedy candidates with equal one-step score.
enum class TieBreak {
  nearest_completion,  // fewer responses_to_completion, then fewer responses, then lower id
  fewest_responses,    // fewer responses first, then lower task id
  lowest_id,
  random,  // uniform among the tied set
};

std::string_view to_string(PolicyKind p);
std::string_view to_string(TieBreak t);

/// Picks the next task to query among undecided tasks that still have
/// responses. `available`, when non-empty, flags tasks whose response pool
/// is not exhausted. Returns nullopt when nothing is eligible.
std::optional<int> select_next_task(std::span<const TaskState> states, const CompletionConfig& cfg,
                                    PolicyKind policy, Rng& rng, TieBreak tie_break = TieBreak::nearest_completion,
                                    std::span<const std::uint8_t> available = {});

struct AllocationOptions {
  CompletionConfig completion;
  PolicyKind policy = PolicyKind::requallo_greedy;
  TieBreak tie_break = TieBreak::nearest_completion;
  /// Budgets (step counts) at which to copy every TaskState.
  std::vector<std::int64_t> checkpoints;
};

struct TraceStep {
  std::int64_t t = 0;
  int task_id = 0;
  int worker_id = 0;
  Label label = Label::zero;
  Decision decision_after = Decision::undecided;
};

struct Snapshot {
  std::int64_t checkpoint_t = 0;
  std::vector<TaskState> states;
};

struct AllocationTrace {
  std::vector<TraceStep> steps;
  std::vector<Snapshot> snapshots;
  std::vector<TaskState> final_states;
  std::int64_t budget_used = 0;
};

/// Sequential allocation of up to `budget` responses.
///
/// Each step selects a task, reveals its next response (a Bernoulli draw in
/// synthetic mode, the next pooled record in replay mode), updates the
/// counts and re-evaluates the decision. Stops when the budget is spent or
/// no task is eligible. Snapshots are taken at every checkpoint reached,
/// plus one at the final step if the run ends before a pending checkpoint.
AllocationTrace run_allocation(const ProblemInstance& problem, std::int64_t budget, const AllocationOptions& options,
                               std::uint64_t seed);

/// Evenly spaced checkpoints at the given budget fractions, clipped to
/// [1, budget], sorted and deduplicated.
std::vector<std::int64_t> checkpoints_from_fractions(std::int64_t budget, std::span<const double> fractions);

/// Fractions step, 2*step, ..., 1.
std::vector<double> fraction_grid(double step);

std::size_t count_completed(std::span<const TaskState> states);

/// `t,task_id,worker_id,label,decision_after`
void write_trace_csv(std::ostream& os, const AllocationTrace& trace);
/// `checkpoint_t,task_id,a,b,d`
void write_snapshots_csv(std::ostream& os, const AllocationTrace& trace);

}  // namespace deps
