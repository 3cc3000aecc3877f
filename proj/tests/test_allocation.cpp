#include <doctest.h>

#include <vector>

#include "deps/allocation.hpp"
#include "deps/error.hpp"

using deps::CompletionConfig;
using deps::Decision;
using deps::PolicyKind;
using deps::TaskState;
using deps::TieBreak;

TEST_CASE("completion is a strict ratio test") {
  const CompletionConfig cfg;
  CHECK(deps::is_complete({8, 1}, cfg));
  CHECK_FALSE(deps::is_complete({7, 1}, cfg));
  CHECK_FALSE(deps::is_complete({0, 0}, cfg));
  CHECK_FALSE(deps::is_complete({0, 0}, {1.5, 1.0}));
  CHECK(deps::is_complete({1, 8}, cfg));
}

TEST_CASE("decision follows the majority of a complete task") {
  const CompletionConfig cfg;
  CHECK(deps::decide({9, 1}, cfg) == Decision::positive);
  CHECK(deps::decide({1, 9}, cfg) == Decision::negative);
  CHECK(deps::decide({2, 2}, cfg) == Decision::undecided);
}

TEST_CASE("zero smoothing treats a zero denominator as an infinite ratio") {
  const CompletionConfig cfg{4.0, 0.0};
  CHECK(deps::is_complete({1, 0}, cfg));
  CHECK_FALSE(deps::is_complete({0, 0}, cfg));
}

TEST_CASE("invalid completion configs are rejected") {
  CHECK_THROWS_AS((CompletionConfig{1.0, 1.0}.validate()), deps::ConfigError);
  CHECK_THROWS_AS((CompletionConfig{4.0, -1.0}.validate()), deps::ConfigError);
}

TEST_CASE("one-step completion probability") {
  const CompletionConfig cfg;
  CHECK(deps::completion_probability_one_step({7, 1}, cfg) == doctest::Approx(0.8));
  CHECK(deps::completion_probability_one_step({0, 0}, cfg) == 0.0);
  CHECK(deps::completion_probability_one_step({3, 0}, cfg) == doctest::Approx(0.8));
  CHECK(deps::completion_probability_one_step({0, 3}, cfg) == doctest::Approx(0.8));
  CHECK_THROWS_AS(deps::completion_probability_one_step({9, 1}, cfg), deps::ContractError);
}

TEST_CASE("responses to completion") {
  const CompletionConfig cfg;
  CHECK(deps::responses_to_completion({0, 0}, cfg) == 4);
  CHECK(deps::responses_to_completion({3, 0}, cfg) == 1);
  CHECK(deps::responses_to_completion({9, 1}, cfg) == 0);
  for (int a = 0; a < 12; ++a) {
    for (int b = 0; b < 12; ++b) {
      const TaskState s{a, b};
      if (deps::is_complete(s, cfg)) continue;
      const bool one_step = deps::completion_probability_one_step(s, cfg) > 0.0;
      CHECK(one_step == (deps::responses_to_completion(s, cfg) == 1));
    }
  }
}

TEST_CASE("greedy selection") {
  const CompletionConfig cfg;
  deps::Rng rng(1);
  std::vector<TaskState> states{{7, 1}, {0, 0}};
  CHECK(deps::select_next_task(states, cfg, PolicyKind::requallo_greedy, rng) == 0);

  std::vector<TaskState> done{{9, 1, Decision::positive}, {1, 9, Decision::negative}};
  CHECK_FALSE(deps::select_next_task(done, cfg, PolicyKind::requallo_greedy, rng).has_value());

  std::vector<TaskState> twins{{1, 1}, {1, 1}};
  for (auto tie : {TieBreak::nearest_completion, TieBreak::fewest_responses, TieBreak::lowest_id}) {
    CHECK(deps::select_next_task(twins, cfg, PolicyKind::requallo_greedy, rng, tie) == 0);
  }
}

TEST_CASE("tie-breaks order equal scores differently") {
  const CompletionConfig cfg;
  deps::Rng rng(1);
  // Both have zero one-step probability; task 1 is nearer to completion.
  std::vector<TaskState> states{{0, 0}, {2, 0}};
  CHECK(deps::select_next_task(states, cfg, PolicyKind::requallo_greedy, rng, TieBreak::nearest_completion) == 1);
  CHECK(deps::select_next_task(states, cfg, PolicyKind::requallo_greedy, rng, TieBreak::fewest_responses) == 0);
  CHECK(deps::select_next_task(states, cfg, PolicyKind::requallo_greedy, rng, TieBreak::lowest_id) == 0);
}

TEST_CASE("exhausted pools are skipped") {
  const CompletionConfig cfg;
  deps::Rng rng(1);
  std::vector<TaskState> states{{3, 0}, {0, 0}};
  std::vector<std::uint8_t> available{0, 1};
  CHECK(deps::select_next_task(states, cfg, PolicyKind::requallo_greedy, rng, TieBreak::nearest_completion,
                               available) == 1);
}

TEST_CASE("a single-step budget takes one step") {
  const auto problem = deps::generate_synthetic_problem(50, {1, 1}, 3);
  const auto trace = deps::run_allocation(problem, 1, {}, 4);
  CHECK(trace.steps.size() == 1);
  int touched = 0;
  for (const auto& s : trace.final_states) touched += s.n() > 0;
  CHECK(touched == 1);
}

TEST_CASE("budgets must be positive and within the replay cap") {
  const auto problem = deps::generate_synthetic_problem(5, {1, 1}, 3);
  CHECK_THROWS_AS(deps::run_allocation(problem, 0, {}, 1), deps::ConfigError);
  std::vector<deps::ResponsePool> pools{{{0, 0, deps::Label::one}, {0, 1, deps::Label::one}}};
  const auto replay = deps::ProblemInstance::from_pools(pools);
  CHECK_THROWS_AS(deps::run_allocation(replay, 2, {}, 1), deps::ConfigError);
}

namespace {

// Reference allocator: a full scan per step through select_next_task.
std::vector<deps::TraceStep> naive_allocation(const deps::ProblemInstance& problem, std::int64_t budget,
                                              const deps::AllocationOptions& opt, std::uint64_t seed) {
  deps::Rng rng(seed);
  std::vector<TaskState> states(problem.n_tasks());
  std::vector<std::size_t> cursor(problem.n_tasks(), 0);
  std::vector<std::uint8_t> available(problem.n_tasks(), 1);
  const bool replay = problem.mode == deps::ProblemInstance::Mode::replay;
  if (replay) {
    for (std::size_t i = 0; i < problem.n_tasks(); ++i) available[i] = !problem.pools[i].empty();
  }
  std::vector<deps::TraceStep> steps;
  for (std::int64_t t = 1; t <= budget; ++t) {
    const auto pick = deps::select_next_task(states, opt.completion, opt.policy, rng, opt.tie_break, available);
    if (!pick) break;
    deps::TraceStep step{t, *pick, 0, deps::Label::zero, Decision::undecided};
    if (replay) {
      const auto& rec = problem.pools[*pick][cursor[*pick]++];
      step.worker_id = rec.worker_id;
      step.label = rec.label;
      if (cursor[*pick] == problem.pools[*pick].size()) available[*pick] = 0;
    } else {
      step.worker_id = static_cast<int>(t - 1);
      step.label = deps::sample_response(problem.synthetic[*pick], rng);
    }
    auto& s = states[*pick];
    s = deps::record_response(s, step.label);
    s.d = deps::decide(s, opt.completion);
    step.decision_after = s.d;
    steps.push_back(step);
  }
  return steps;
}

bool same_steps(const std::vector<deps::TraceStep>& a, const std::vector<deps::TraceStep>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].task_id != b[i].task_id || a[i].label != b[i].label || a[i].worker_id != b[i].worker_id ||
        a[i].decision_after != b[i].decision_after) {
      return false;
    }
  }
  return true;
}

deps::ProblemInstance random_pools(std::size_t n, deps::Rng& rng) {
  std::vector<deps::ResponsePool> pools(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto size = rng.below(8);
    const double p = rng.uniform();
    for (std::uint64_t w = 0; w < size; ++w) {
      pools[i].push_back({static_cast<int>(i), static_cast<int>(w), rng.bernoulli(p) ? deps::Label::one : deps::Label::zero});
    }
  }
  return deps::ProblemInstance::from_pools(std::move(pools));
}

}  // namespace

TEST_CASE("property: incremental selection reproduces the full scan") {
  for (auto policy : {PolicyKind::requallo_greedy, PolicyKind::uniform_random}) {
    for (auto tie : {TieBreak::nearest_completion, TieBreak::fewest_responses, TieBreak::lowest_id, TieBreak::random}) {
      for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        deps::AllocationOptions opt;
        opt.policy = policy;
        opt.tie_break = tie;
        opt.completion.c = 2.0 + static_cast<double>(seed);
        const auto problem = deps::generate_synthetic_problem(60, {0.8, 0.8}, seed);
        CHECK(same_steps(deps::run_allocation(problem, 400, opt, seed).steps, naive_allocation(problem, 400, opt, seed)));

        deps::Rng rng(seed * 77);
        const auto replay = random_pools(40, rng);
        CHECK(same_steps(deps::run_allocation(replay, replay.budget_cap, opt, seed).steps,
                         naive_allocation(replay, replay.budget_cap, opt, seed)));
      }
    }
  }
}

TEST_CASE("property: budget conservation") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto problem = deps::generate_synthetic_problem(100, {1, 1}, seed);
    const std::int64_t budget = 50 + static_cast<std::int64_t>(seed) * 37;
    const auto trace = deps::run_allocation(problem, budget, {}, seed);
    std::int64_t total = 0;
    for (const auto& s : trace.final_states) total += s.n();
    CHECK(total == trace.budget_used);
    CHECK(trace.budget_used <= budget);
    CHECK(trace.steps.size() == static_cast<std::size_t>(trace.budget_used));
  }
}

TEST_CASE("property: replay never exceeds pools or cap") {
  deps::Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto problem = random_pools(30, rng);
    if (problem.budget_cap < 1) continue;
    const auto trace = deps::run_allocation(problem, problem.budget_cap, {}, static_cast<std::uint64_t>(trial));
    CHECK(trace.budget_used <= problem.budget_cap);
    for (std::size_t i = 0; i < problem.n_tasks(); ++i) {
      CHECK(trace.final_states[i].n() <= static_cast<int>(problem.pools[i].size()));
    }
  }
}

TEST_CASE("property: decisions are permanent and completed tasks get no more responses") {
  for (auto policy : {PolicyKind::requallo_greedy, PolicyKind::uniform_random}) {
    deps::AllocationOptions opt;
    opt.policy = policy;
    const auto problem = deps::generate_synthetic_problem(200, {1, 1}, 9);
    const auto trace = deps::run_allocation(problem, 1500, opt, 10);
    std::vector<Decision> seen(200, Decision::undecided);
    for (const auto& step : trace.steps) {
      CHECK(seen[step.task_id] == Decision::undecided);
      seen[step.task_id] = step.decision_after;
    }
    for (std::size_t i = 0; i < 200; ++i) CHECK(seen[i] == trace.final_states[i].d);
  }
}

TEST_CASE("snapshots are taken at checkpoints") {
  const auto problem = deps::generate_synthetic_problem(100, {1, 1}, 1);
  deps::AllocationOptions opt;
  opt.checkpoints = deps::checkpoints_from_fractions(200, deps::fraction_grid(0.25));
  REQUIRE(opt.checkpoints == std::vector<std::int64_t>{50, 100, 150, 200});
  const auto trace = deps::run_allocation(problem, 200, opt, 2);
  REQUIRE(trace.snapshots.size() == 4);
  for (const auto& snap : trace.snapshots) {
    int total = 0;
    for (const auto& s : snap.states) total += s.n();
    CHECK(total == snap.checkpoint_t);
  }
  CHECK(trace.snapshots.back().states == trace.final_states);
}

TEST_CASE("a run that stops early still ends with a snapshot") {
  const auto problem = deps::ProblemInstance::from_synthetic(
      {{1.0, deps::Label::one}, {0.0, deps::Label::zero}, {0.95, deps::Label::one}});
  deps::AllocationOptions opt;
  opt.checkpoints = {10, 100000};
  const auto trace = deps::run_allocation(problem, 100000, opt, 2);
  CHECK(trace.budget_used < 100000);
  CHECK(trace.snapshots.back().checkpoint_t == trace.budget_used);
  CHECK(deps::count_completed(trace.final_states) == 3);
}

TEST_CASE("allocation is deterministic in the seed") {
  const auto problem = deps::generate_synthetic_problem(300, {2, 3}, 1);
  for (auto policy : {PolicyKind::requallo_greedy, PolicyKind::uniform_random}) {
    deps::AllocationOptions opt;
    opt.policy = policy;
    CHECK(same_steps(deps::run_allocation(problem, 900, opt, 5).steps, deps::run_allocation(problem, 900, opt, 5).steps));
  }
}
