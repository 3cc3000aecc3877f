#include "deps/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <tuple>

#include "deps/error.hpp"

namespace deps {

void CompletionConfig::validate() const {
  if (!(c > 1.0) || !std::isfinite(c)) throw ConfigError("completion ratio c must be a finite value > 1");
  if (!(smoothing >= 0.0) || !std::isfinite(smoothing)) throw ConfigError("smoothing must be >= 0");
}

namespace {

// num / den > c, with num / 0 = +inf for num > 0 and 0 / 0 never passing.
bool ratio_exceeds(double num, double den, double c) {
  if (den == 0.0) return num > 0.0;
  return num > c * den;
}

}  // namespace

bool is_complete(const TaskState& state, const CompletionConfig& cfg) {
  const double a = state.a + cfg.smoothing;
  const double b = state.b + cfg.smoothing;
  return ratio_exceeds(a, b, cfg.c) || ratio_exceeds(b, a, cfg.c);
}

Decision decide(const TaskState& state, const CompletionConfig& cfg) {
  if (!is_complete(state, cfg)) return Decision::undecided;
  return state.a > state.b ? Decision::positive : Decision::negative;
}

double completion_probability_one_step(const TaskState& state, const CompletionConfig& cfg) {
  if (is_complete(state, cfg)) throw ContractError("one-step completion probability asked for a complete task");
  const double q = (state.a + 1.0) / (state.n() + 2.0);
  double prob = 0.0;
  if (is_complete(record_response(state, Label::one), cfg)) prob += q;
  if (is_complete(record_response(state, Label::zero), cfg)) prob += 1.0 - q;
  return prob;
}

int responses_to_completion(const TaskState& state, const CompletionConfig& cfg) {
  if (is_complete(state, cfg)) return 0;
  const double hi = std::max(state.a, state.b) + cfg.smoothing;
  const double lo = std::min(state.a, state.b) + cfg.smoothing;
  // Smallest k >= 1 with hi + k > c * lo.
  const double gap = cfg.c * lo - hi;
  return static_cast<int>(std::floor(gap)) + 1;
}

std::string_view to_string(PolicyKind p) {
  return p == PolicyKind::requallo_greedy ? "requallo" : "random";
}

std::string_view to_string(TieBreak t) {
  switch (t) {
    case TieBreak::nearest_completion:
      return "nearest-completion";
    case TieBreak::fewest_responses:
      return "fewest-responses";
    case TieBreak::lowest_id:
      return "lowest-id";
    case TieBreak::random:
      return "random";
  }
  return "?";
}

namespace {

bool eligible(std::span<const TaskState> states, std::span<const std::uint8_t> available, std::size_t i) {
  return states[i].d == Decision::undecided && (available.empty() || available[i] != 0);
}

// Greedy ordering key; smaller is better.
struct GreedyKey {
  double neg_score;
  int tie;
  int id;
  auto operator<=>(const GreedyKey&) const = default;
};

int tie_value(const TaskState& s, const CompletionConfig& cfg, TieBreak tie) {
  switch (tie) {
    case TieBreak::nearest_completion:
      return responses_to_completion(s, cfg) * (1 << 20) + std::min(s.n(), (1 << 20) - 1);
    case TieBreak::fewest_responses:
      return s.n();
    case TieBreak::lowest_id:
    case TieBreak::random:
      break;
  }
  return 0;
}

GreedyKey greedy_key(const TaskState& s, int id, const CompletionConfig& cfg, TieBreak tie) {
  return {-completion_probability_one_step(s, cfg), tie_value(s, cfg, tie), id};
}

}  // namespace

std::optional<int> select_next_task(std::span<const TaskState> states, const CompletionConfig& cfg,
                                    PolicyKind policy, Rng& rng, TieBreak tie_break,
                                    std::span<const std::uint8_t> available) {
  if (!available.empty() && available.size() != states.size()) {
    throw ContractError("availability mask size does not match the task count");
  }
  if (policy == PolicyKind::uniform_random) {
    std::vector<int> candidates;
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (eligible(states, available, i)) candidates.push_back(static_cast<int>(i));
    }
    if (candidates.empty()) return std::nullopt;
    return candidates[rng.below(candidates.size())];
  }

  if (tie_break == TieBreak::random) {
    double best = -1.0;
    std::vector<int> tied;
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (!eligible(states, available, i)) continue;
      const double score = completion_probability_one_step(states[i], cfg);
      if (score > best) {
        best = score;
        tied.clear();
      }
      if (score == best) tied.push_back(static_cast<int>(i));
    }
    if (tied.empty()) return std::nullopt;
    return tied[rng.below(tied.size())];
  }

  std::optional<GreedyKey> best;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (!eligible(states, available, i)) continue;
    const GreedyKey key = greedy_key(states[i], static_cast<int>(i), cfg, tie_break);
    if (!best || key < *best) best = key;
  }
  if (!best) return std::nullopt;
  return best->id;
}

namespace {

// Incremental selectors: only the task that just received a response changes
// its key, so each step costs O(log N). They pick exactly what
// select_next_task would pick for the same states and rng.

class GreedySelector {
 public:
  GreedySelector(std::span<const TaskState> states, std::span<const std::uint8_t> available,
                 const CompletionConfig& cfg, TieBreak tie)
      : cfg_(cfg), tie_(tie), keys_(states.size()), in_set_(states.size(), 0) {
    for (std::size_t i = 0; i < states.size(); ++i) update(static_cast<int>(i), states[i], eligible(states, available, i));
  }

  std::optional<int> select() const {
    if (set_.empty()) return std::nullopt;
    return set_.begin()->id;
  }

  void update(int id, const TaskState& s, bool is_eligible) {
    if (in_set_[id]) set_.erase(keys_[id]);
    in_set_[id] = is_eligible ? 1 : 0;
    if (is_eligible) {
      keys_[id] = greedy_key(s, id, cfg_, tie_);
      set_.insert(keys_[id]);
    }
  }

 private:
  CompletionConfig cfg_;
  TieBreak tie_;
  std::vector<GreedyKey> keys_;
  std::vector<std::uint8_t> in_set_;
  std::set<GreedyKey> set_;
};

// Fenwick tree over eligibility flags; the k-th eligible id in ascending
// order is the same candidate the linear scan would index.
class UniformSelector {
 public:
  UniformSelector(std::span<const TaskState> states, std::span<const std::uint8_t> available)
      : tree_(states.size() + 1, 0), flag_(states.size(), 0) {
    for (std::size_t i = 0; i < states.size(); ++i) update(static_cast<int>(i), eligible(states, available, i));
  }

  std::optional<int> select(Rng& rng) const {
    if (count_ == 0) return std::nullopt;
    return kth(static_cast<int>(rng.below(static_cast<std::uint64_t>(count_))));
  }

  void update(int id, bool is_eligible) {
    const int want = is_eligible ? 1 : 0;
    const int delta = want - flag_[id];
    if (delta == 0) return;
    flag_[id] = static_cast<std::uint8_t>(want);
    count_ += delta;
    for (std::size_t i = static_cast<std::size_t>(id) + 1; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
  }

 private:
  int kth(int k) const {
    std::size_t pos = 0;
    std::size_t mask = 1;
    while (mask * 2 < tree_.size()) mask *= 2;
    for (; mask > 0; mask /= 2) {
      const std::size_t next = pos + mask;
      if (next < tree_.size() && tree_[next] <= k) {
        pos = next;
        k -= tree_[next];
      }
    }
    return static_cast<int>(pos);
  }

  std::vector<int> tree_;
  std::vector<std::uint8_t> flag_;
  int count_ = 0;
};

}  // namespace

AllocationTrace run_allocation(const ProblemInstance& problem, std::int64_t budget, const AllocationOptions& options,
                               std::uint64_t seed) {
  options.completion.validate();
  if (budget < 1) throw ConfigError("budget must be at least 1");
  const bool replay = problem.mode == ProblemInstance::Mode::replay;
  if (replay && budget > problem.budget_cap) {
    throw ConfigError("budget " + std::to_string(budget) + " exceeds the replay budget cap " +
                      std::to_string(problem.budget_cap));
  }

  const std::size_t n = problem.n_tasks();
  std::vector<TaskState> states(n);
  std::vector<std::size_t> cursor(n, 0);
  std::vector<std::uint8_t> available(n, 1);
  if (replay) {
    for (std::size_t i = 0; i < n; ++i) available[i] = problem.pools[i].empty() ? 0 : 1;
  }

  std::vector<std::int64_t> checkpoints = options.checkpoints;
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  std::erase_if(checkpoints, [&](std::int64_t c) { return c < 1 || c > budget; });
  auto next_checkpoint = checkpoints.begin();

  Rng rng(seed);
  std::optional<GreedySelector> greedy;
  std::optional<UniformSelector> uniform;
  const bool scan = options.policy == PolicyKind::requallo_greedy && options.tie_break == TieBreak::random;
  if (options.policy == PolicyKind::uniform_random) {
    uniform.emplace(states, available);
  } else if (!scan) {
    greedy.emplace(states, available, options.completion, options.tie_break);
  }

  AllocationTrace trace;
  trace.steps.reserve(static_cast<std::size_t>(std::min<std::int64_t>(budget, 1 << 20)));
  for (std::int64_t t = 1; t <= budget; ++t) {
    std::optional<int> pick;
    if (uniform) {
      pick = uniform->select(rng);
    } else if (greedy) {
      pick = greedy->select();
    } else {
      pick = select_next_task(states, options.completion, options.policy, rng, options.tie_break, available);
    }
    if (!pick) break;
    const int id = *pick;

    TraceStep step;
    step.t = t;
    step.task_id = id;
    if (replay) {
      const ResponseRecord& rec = problem.pools[id][cursor[id]++];
      step.worker_id = rec.worker_id;
      step.label = rec.label;
      if (cursor[id] == problem.pools[id].size()) available[id] = 0;
    } else {
      // Responses are iid given p, so synthetic workers are numbered per response.
      step.worker_id = static_cast<int>(t - 1);
      step.label = sample_response(problem.synthetic[id], rng);
    }

    TaskState& s = states[id];
    s = record_response(s, step.label);
    s.d = decide(s, options.completion);
    step.decision_after = s.d;
    trace.steps.push_back(step);

    const bool still_eligible = s.d == Decision::undecided && available[id] != 0;
    if (uniform) uniform->update(id, still_eligible);
    if (greedy) greedy->update(id, s, still_eligible);

    if (next_checkpoint != checkpoints.end() && *next_checkpoint == t) {
      trace.snapshots.push_back({t, states});
      ++next_checkpoint;
    }
  }

  trace.budget_used = static_cast<std::int64_t>(trace.steps.size());
  if (next_checkpoint != checkpoints.end() && trace.budget_used > 0 &&
      (trace.snapshots.empty() || trace.snapshots.back().checkpoint_t != trace.budget_used)) {
    trace.snapshots.push_back({trace.budget_used, states});
  }
  trace.final_states = std::move(states);
  return trace;
}

std::vector<std::int64_t> checkpoints_from_fractions(std::int64_t budget, std::span<const double> fractions) {
  std::vector<std::int64_t> out;
  for (double f : fractions) {
    if (!(f > 0.0) || f > 1.0) throw ConfigError("checkpoint fractions must lie in (0, 1]");
    const auto t = static_cast<std::int64_t>(std::llround(f * static_cast<double>(budget)));
    out.push_back(std::clamp<std::int64_t>(t, 1, budget));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> fraction_grid(double step) {
  if (!(step > 0.0) || step > 1.0) throw ConfigError("checkpoint step must lie in (0, 1]");
  std::vector<double> out;
  const auto count = static_cast<int>(std::llround(1.0 / step));
  for (int k = 1; k <= count; ++k) out.push_back(std::min(1.0, k * step));
  if (out.empty() || out.back() < 1.0) out.push_back(1.0);
  return out;
}

std::size_t count_completed(std::span<const TaskState> states) {
  return static_cast<std::size_t>(
      std::count_if(states.begin(), states.end(), [](const TaskState& s) { return s.d != Decision::undecided; }));
}

void write_trace_csv(std::ostream& os, const AllocationTrace& trace) {
  os << "t,task_id,worker_id,label,decision_after\n";
  for (const auto& s : trace.steps) {
    os << s.t << ',' << s.task_id << ',' << s.worker_id << ',' << to_int(s.label) << ',' << to_int(s.decision_after)
       << '\n';
  }
}

void write_snapshots_csv(std::ostream& os, const AllocationTrace& trace) {
  os << "checkpoint_t,task_id,a,b,d\n";
  for (const auto& snap : trace.snapshots) {
    for (std::size_t i = 0; i < snap.states.size(); ++i) {
      const auto& s = snap.states[i];
      os << snap.checkpoint_t << ',' << i << ',' << s.a << ',' << s.b << ',' << to_int(s.d) << '\n';
    }
  }
}

}  // namespace deps
