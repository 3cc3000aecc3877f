#include "deps/harness/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "deps/error.hpp"

namespace deps {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stream tags for derive_seed.
enum Stream : std::uint64_t {
  kSetting = 0x5e771,
  kReplicate = 0x4e91,
  kProblem = 1,
  kAllocation = 2,
  kShuffle = 3,
  kInference = 0x1000,
  kBootstrap = 0xb007,
};

std::uint64_t replicate_seed(std::uint64_t seed, std::size_t setting, std::size_t replicate) {
  return derive_seed(derive_seed(derive_seed(seed, kSetting + setting), kReplicate), replicate);
}

std::uint64_t inference_seed(std::uint64_t rep_seed, std::size_t checkpoint, Estimator e) {
  return derive_seed(rep_seed, kInference + 4 * checkpoint + static_cast<std::uint64_t>(e));
}

AllocationOptions allocation_options(const ExperimentConfig& cfg, std::vector<std::int64_t> checkpoints = {}) {
  AllocationOptions opt;
  opt.completion = cfg.completion;
  opt.policy = cfg.policy;
  opt.tie_break = cfg.tie_break;
  opt.checkpoints = std::move(checkpoints);
  return opt;
}

std::string beta_label(const BetaParams& p) {
  return "beta-" + format_number(p.alpha) + "-" + format_number(p.beta);
}

double nats_or_nan(const BetaParams& reference, const FitOutcome& f) {
  if (!f.fit) return kNaN;
  return kl_beta_beta(reference, f.fit->params).nats;
}

FitResult reference_fit(const ProblemInstance& instance, const ExperimentConfig& cfg) {
  const auto states = full_data_states(instance);
  return cfg.reference_fit == ReferenceFit::wald_transformed_mom
             ? fit_wald(states, WaldVariant::transformed, cfg.wald_epsilon)
             : fit_wald(states, WaldVariant::smoothed, cfg.wald_epsilon);
}

Dataset load_configured_dataset(const ExperimentConfig& cfg) {
  return load_dataset(cfg.dataset_path, cfg.dataset_format, std::nullopt);
}

std::int64_t replay_budget(const ExperimentConfig& cfg, const ProblemInstance& instance) {
  const auto budget =
      static_cast<std::int64_t>(std::floor(cfg.budget_fraction * static_cast<double>(instance.responses_total())));
  if (budget < 1) throw ConfigError("budget_fraction leaves no responses to allocate");
  return std::min(budget, instance.budget_cap);
}

// One allocation run evaluated at every checkpoint: fits[k][e].
struct CheckpointFits {
  std::vector<std::array<FitOutcome, 3>> fits;
};

CheckpointFits evaluate_checkpoints(const ProblemInstance& problem, std::int64_t budget,
                                    std::span<const std::int64_t> checkpoints, const ExperimentConfig& cfg,
                                    std::uint64_t rep_seed, int replicate) {
  const auto trace = run_allocation(problem, budget, allocation_options(cfg, {checkpoints.begin(), checkpoints.end()}),
                                    derive_seed(rep_seed, kAllocation));
  if (trace.snapshots.empty()) throw ContractError("allocation produced no snapshot");
  CheckpointFits out;
  out.fits.resize(checkpoints.size());
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    const auto& snap = trace.snapshots[std::min(k, trace.snapshots.size() - 1)];
    for (auto e : kEstimators) {
      auto f = fit_estimator(snap.states, e, cfg, inference_seed(rep_seed, k, e));
      f.replicate = replicate;
      f.budget_used = snap.checkpoint_t;
      out.fits[k][static_cast<std::size_t>(e)] = std::move(f);
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::bias_demo: return "bias-demo";
    case ExperimentKind::sweep: return "sweep";
    case ExperimentKind::timeseries: return "timeseries";
    case ExperimentKind::threshold: return "threshold";
    case ExperimentKind::replay: return "replay";
    case ExperimentKind::calibrate: return "calibrate";
  }
  return "?";
}

ExperimentKind parse_experiment_kind(std::string_view s) {
  for (auto k : {ExperimentKind::bias_demo, ExperimentKind::sweep, ExperimentKind::timeseries,
                 ExperimentKind::threshold, ExperimentKind::replay, ExperimentKind::calibrate}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown experiment '" + std::string(s) + "'");
}

std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::deps: return "deps";
    case Estimator::wald_smoothed: return "wald-smoothed";
    case Estimator::wald_transformed: return "wald-transformed";
  }
  return "?";
}

std::string_view to_string(ReferenceFit r) {
  return r == ReferenceFit::wald_transformed_mom ? "wald-transformed-mom" : "wald-smoothed-mle";
}

std::vector<BetaParams> default_synthetic_settings() { return {{0.5, 0.5}, {1, 1}, {2, 5}, {5, 5}}; }

std::int64_t ExperimentConfig::synthetic_budget() const {
  if (budget > 0) return budget;
  return static_cast<std::int64_t>(std::llround(responses_per_task * static_cast<double>(n_tasks)));
}

DecisionPriors ExperimentConfig::resolved_priors() const {
  if (priors) return *priors;
  return replay_mode() ? real_data_priors() : synthetic_priors();
}

std::vector<double> ExperimentConfig::resolved_fractions() const {
  if (checkpoint_fractions) {
    if (checkpoint_fractions->empty()) throw ConfigError("checkpoint list is empty");
    for (double f : *checkpoint_fractions) {
      if (!(f > 0.0 && f <= 1.0)) throw ConfigError("checkpoint fractions must lie in (0, 1]");
    }
    return *checkpoint_fractions;
  }
  if (!(checkpoint_step > 0.0 && checkpoint_step <= 1.0)) throw ConfigError("checkpoint_step must lie in (0, 1]");
  return fraction_grid(checkpoint_step);
}

std::vector<BetaParams> ExperimentConfig::resolved_settings() const {
  return settings.empty() ? default_synthetic_settings() : settings;
}

void ExperimentConfig::validate() const {
  completion.validate();
  if (replicates < 1) throw ConfigError("replicates must be >= 1");
  if (samples_per_task < 1) throw ConfigError("samples_per_task must be >= 1");
  if (!(wald_epsilon > 0.0)) throw ConfigError("wald epsilon must be positive");
  if (bootstrap_resamples < 0) throw ConfigError("bootstrap_resamples must be >= 0");
  if (histogram_bins < 1) throw ConfigError("histogram bins must be >= 1");
  if (!(threshold >= 0.0)) throw ConfigError("threshold must be >= 0");
  resolved_priors().validate();
  resolved_fractions();

  const bool needs_data = experiment == ExperimentKind::replay;
  if (needs_data && !replay_mode()) throw ConfigError("replay needs a dataset path");
  if (replay_mode()) {
    if (!(budget_fraction > 0.0 && budget_fraction <= 0.5)) throw ConfigError("budget_fraction must lie in (0, 0.5]");
    if (experiment == ExperimentKind::bias_demo || experiment == ExperimentKind::sweep ||
        experiment == ExperimentKind::threshold) {
      throw ConfigError(std::string(to_string(experiment)) + " runs on synthetic tasks only");
    }
    if (experiment == ExperimentKind::calibrate && gold_path.empty()) {
      throw ConfigError("calibrate on a dataset needs a gold label file");
    }
  } else {
    if (n_tasks < 1) throw ConfigError("n_tasks must be >= 1");
    if (synthetic_budget() < 1) throw ConfigError("budget must be >= 1");
    require_valid(truth, "truth");
    for (const auto& s : resolved_settings()) require_valid(s, "setting");
    if (experiment == ExperimentKind::sweep) {
      if (grid_points < 1) throw ConfigError("grid_points must be >= 1");
      if (!(grid_min > 0.0 && grid_max >= grid_min)) throw ConfigError("grid bounds must satisfy 0 < min <= max");
    }
  }
}

FitOutcome fit_estimator(std::span<const TaskState> states, Estimator estimator, const ExperimentConfig& cfg,
                         std::uint64_t seed) {
  FitOutcome out;
  out.estimator = estimator;
  out.seed = seed;
  try {
    switch (estimator) {
      case Estimator::deps:
        out.fit = deps_pipeline(states, cfg.resolved_priors(), cfg.fit_method, seed, cfg.samples_per_task);
        break;
      case Estimator::wald_smoothed:
        out.fit = fit_wald(states, WaldVariant::smoothed, cfg.wald_epsilon);
        break;
      case Estimator::wald_transformed:
        out.fit = fit_wald(states, WaldVariant::transformed, cfg.wald_epsilon);
        break;
    }
  } catch (const Error& err) {
    out.fit.reset();
    out.error = err.what();
  }
  return out;
}

BiasDemoResult run_bias_demo(const ExperimentConfig& cfg) {
  cfg.validate();
  const int bins = cfg.histogram_bins;
  const auto reps = static_cast<std::size_t>(cfg.replicates);
  const auto budget = cfg.synthetic_budget();

  struct Slot {
    explicit Slot(int bins) : all(0, 1, bins), completed(0, 1, bins), smoothed_completed(0, 1, bins),
                              smoothed_undecided(0, 1, bins) {}
    Histogram all, completed, smoothed_completed, smoothed_undecided;
    std::size_t n_completed = 0;
    std::array<FitOutcome, 3> fits;
  };
  std::vector<Slot> slots(reps, Slot(bins));

  parallel_for(
      reps,
      [&](std::size_t r) {
        const auto rs = replicate_seed(cfg.seed, 0, r);
        const auto problem = generate_synthetic_problem(cfg.n_tasks, cfg.truth, derive_seed(rs, kProblem));
        const auto trace = run_allocation(problem, budget, allocation_options(cfg), derive_seed(rs, kAllocation));
        auto& s = slots[r];
        for (std::size_t i = 0; i < problem.n_tasks(); ++i) {
          const auto& st = trace.final_states[i];
          const double p = problem.synthetic[i].p;
          const double smoothed = (st.a + cfg.wald_epsilon) / (st.n() + 2 * cfg.wald_epsilon);
          s.all.add(p);
          if (st.d != Decision::undecided) {
            s.completed.add(p);
            s.smoothed_completed.add(smoothed);
            ++s.n_completed;
          } else {
            s.smoothed_undecided.add(smoothed);
          }
        }
        for (auto e : kEstimators) {
          auto f = fit_estimator(trace.final_states, e, cfg, inference_seed(rs, 0, e));
          f.replicate = static_cast<int>(r);
          f.budget_used = trace.budget_used;
          s.fits[static_cast<std::size_t>(e)] = std::move(f);
        }
      },
      cfg.threads);

  BiasDemoResult out{Histogram(0, 1, bins), Histogram(0, 1, bins), Histogram(0, 1, bins), Histogram(0, 1, bins), {},
                     {}};
  for (auto& s : slots) {
    out.true_p_all.merge(s.all);
    out.true_p_completed.merge(s.completed);
    out.smoothed_completed.merge(s.smoothed_completed);
    out.smoothed_undecided.merge(s.smoothed_undecided);
    out.completed_per_replicate.push_back(s.n_completed);
    for (auto& f : s.fits) out.fits.push_back(std::move(f));
  }
  return out;
}

SweepResult run_grid_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto g = static_cast<std::size_t>(cfg.grid_points);
  const auto reps = static_cast<std::size_t>(cfg.replicates);
  const auto budget = cfg.synthetic_budget();
  auto axis = [&](std::size_t i) {
    return g == 1 ? cfg.grid_min : cfg.grid_min + (cfg.grid_max - cfg.grid_min) * static_cast<double>(i) / (g - 1);
  };

  const std::size_t cells = g * g;
  std::vector<std::array<double, 3>> nats(cells * reps);
  parallel_for(
      cells * reps,
      [&](std::size_t job) {
        const std::size_t cell = job / reps, r = job % reps;
        const BetaParams truth{axis(cell / g), axis(cell % g)};
        const auto rs = replicate_seed(cfg.seed, cell, r);
        const auto problem = generate_synthetic_problem(cfg.n_tasks, truth, derive_seed(rs, kProblem));
        const auto trace = run_allocation(problem, budget, allocation_options(cfg), derive_seed(rs, kAllocation));
        for (auto e : kEstimators) {
          const auto f = fit_estimator(trace.final_states, e, cfg, inference_seed(rs, 0, e));
          nats[job][static_cast<std::size_t>(e)] = nats_or_nan(truth, f);
        }
      },
      cfg.threads);

  SweepResult out;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    const BetaParams truth{axis(cell / g), axis(cell % g)};
    for (auto e : kEstimators) {
      std::vector<double> values;
      for (std::size_t r = 0; r < reps; ++r) values.push_back(nats[cell * reps + r][static_cast<std::size_t>(e)]);
      SweepCell c;
      c.truth = truth;
      c.estimator = e;
      c.mean_nats = finite_mean(values);
      c.nats_ci = bootstrap_mean_ci(values, cfg.bootstrap_resamples,
                                    derive_seed(derive_seed(cfg.seed, kBootstrap), cell * 4 + static_cast<std::size_t>(e)));
      c.fits_ok = static_cast<int>(std::count_if(values.begin(), values.end(), [](double v) { return std::isfinite(v); }));
      c.fits_failed = static_cast<int>(reps) - c.fits_ok;
      out.cells.push_back(c);
    }
  }
  return out;
}

TimeseriesResult run_timeseries(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto fractions = cfg.resolved_fractions();
  const auto reps = static_cast<std::size_t>(cfg.replicates);

  // Per setting: the instance (or its generator), the budget and the reference.
  struct Setting {
    std::string label;
    BetaParams reference;
    std::optional<ProblemInstance> recorded;
    BetaParams truth;
    std::int64_t budget = 0;
  };
  std::vector<Setting> settings;
  if (cfg.replay_mode()) {
    auto data = load_configured_dataset(cfg);
    Setting s;
    s.label = data.descriptor.name;
    s.reference = reference_fit(data.instance, cfg).params;
    s.budget = replay_budget(cfg, data.instance);
    s.recorded = std::move(data.instance);
    settings.push_back(std::move(s));
  } else {
    for (const auto& truth : cfg.resolved_settings()) {
      Setting s;
      s.label = beta_label(truth);
      s.reference = truth;
      s.truth = truth;
      s.budget = cfg.synthetic_budget();
      settings.push_back(std::move(s));
    }
  }

  TimeseriesResult out;
  std::vector<std::vector<std::int64_t>> checkpoints;
  for (const auto& s : settings) {
    out.setting_labels.push_back(s.label);
    out.references.push_back(s.reference);
    checkpoints.push_back(checkpoints_from_fractions(s.budget, fractions));
  }

  std::vector<CheckpointFits> runs(settings.size() * reps);
  parallel_for(
      runs.size(),
      [&](std::size_t job) {
        const std::size_t si = job / reps, r = job % reps;
        const auto& s = settings[si];
        const auto rs = replicate_seed(cfg.seed, si, r);
        const auto problem = s.recorded ? reshuffle_pools(*s.recorded, derive_seed(rs, kShuffle))
                                        : generate_synthetic_problem(cfg.n_tasks, s.truth, derive_seed(rs, kProblem));
        runs[job] = evaluate_checkpoints(problem, s.budget, checkpoints[si], cfg, rs, static_cast<int>(r));
      },
      cfg.threads);

  for (std::size_t si = 0; si < settings.size(); ++si) {
    const auto& cps = checkpoints[si];
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& run = runs[si * reps + r];
      for (auto e : kEstimators) {
        ReplicateCurve rc;
        rc.setting = static_cast<int>(si);
        rc.replicate = static_cast<int>(r);
        rc.estimator = e;
        rc.curve.method = std::string(to_string(e));
        for (std::size_t k = 0; k < cps.size(); ++k) {
          rc.curve.points.push_back({cps[k], nats_or_nan(settings[si].reference, run.fits[k][static_cast<std::size_t>(e)])});
        }
        out.curves.push_back(std::move(rc));
        out.final_fits.push_back(run.fits.back()[static_cast<std::size_t>(e)]);
      }
    }
    for (auto e : kEstimators) {
      for (std::size_t k = 0; k < cps.size(); ++k) {
        std::vector<double> values;
        for (std::size_t r = 0; r < reps; ++r) {
          values.push_back(out.curves[(si * reps + r) * kEstimators.size() + static_cast<std::size_t>(e)].curve.points[k].nats);
        }
        const auto seed = derive_seed(derive_seed(cfg.seed, kBootstrap), (si * 4 + static_cast<std::size_t>(e)) * 100000 + k);
        out.bands.push_back({static_cast<int>(si), e, cps[k], bootstrap_mean_ci(values, cfg.bootstrap_resamples, seed)});
      }
    }
  }
  return out;
}

ThresholdResult run_threshold_study(const ExperimentConfig& cfg) {
  if (cfg.replay_mode()) throw ConfigError("threshold runs on synthetic tasks only");
  ThresholdResult out;
  out.series = run_timeseries(cfg);
  const auto n_settings = out.series.setting_labels.size();
  std::map<std::pair<int, int>, std::vector<double>> reached_at, responses;
  std::map<std::pair<int, int>, int> censored;
  for (const auto& rc : out.series.curves) {
    const auto key = std::make_pair(rc.setting, static_cast<int>(rc.estimator));
    const auto hit = responses_to_threshold(rc.curve, cfg.threshold);
    if (hit) {
      reached_at[key].push_back(static_cast<double>(*hit));
      responses[key].push_back(static_cast<double>(*hit));
    } else {
      ++censored[key];
      responses[key].push_back(static_cast<double>(rc.curve.points.back().budget_used));
    }
  }
  for (std::size_t si = 0; si < n_settings; ++si) {
    for (auto e : kEstimators) {
      const auto key = std::make_pair(static_cast<int>(si), static_cast<int>(e));
      ThresholdRow row;
      row.setting = static_cast<int>(si);
      row.estimator = e;
      row.mean_responses = finite_mean(responses[key]);
      row.mean_reached = finite_mean(reached_at[key]);
      row.reached = static_cast<int>(reached_at[key].size());
      row.censored = censored[key];
      out.rows.push_back(row);
    }
  }
  return out;
}

ReplayResult run_replay(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto data = load_configured_dataset(cfg);
  const auto budget = replay_budget(cfg, data.instance);
  const auto reps = static_cast<std::size_t>(cfg.replicates);

  ReplayResult out;
  out.dataset = data.descriptor;
  out.full_data = reference_fit(data.instance, cfg);

  const std::array<std::int64_t, 1> checkpoint{budget};
  std::vector<CheckpointFits> runs(reps);
  parallel_for(
      reps,
      [&](std::size_t r) {
        const auto rs = replicate_seed(cfg.seed, 0, r);
        const auto problem = reshuffle_pools(data.instance, derive_seed(rs, kShuffle));
        runs[r] = evaluate_checkpoints(problem, budget, checkpoint, cfg, rs, static_cast<int>(r));
      },
      cfg.threads);

  for (auto e : kEstimators) {
    std::vector<double> alphas, betas, nats;
    ReplayRow row;
    row.estimator = e;
    for (auto& run : runs) {
      auto& f = run.fits.front()[static_cast<std::size_t>(e)];
      if (f.fit) {
        alphas.push_back(f.fit->params.alpha);
        betas.push_back(f.fit->params.beta);
        nats.push_back(kl_beta_beta(out.full_data.params, f.fit->params).nats);
      } else {
        ++row.fits_failed;
      }
      out.fits.push_back(f);
    }
    const auto seed = derive_seed(derive_seed(cfg.seed, kBootstrap), static_cast<std::uint64_t>(e));
    row.alpha = bootstrap_mean_ci(alphas, cfg.bootstrap_resamples, derive_seed(seed, 0));
    row.beta = bootstrap_mean_ci(betas, cfg.bootstrap_resamples, derive_seed(seed, 1));
    row.nats = bootstrap_mean_ci(nats, cfg.bootstrap_resamples, derive_seed(seed, 2));
    out.rows.push_back(row);
  }
  return out;
}

CalibrateResult run_calibration(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto reps = static_cast<std::size_t>(cfg.replicates);

  std::optional<Dataset> data;
  std::vector<int> gold_index;  // dense task index of each gold task
  std::vector<Label> gold_truth;
  if (cfg.replay_mode()) {
    data = load_configured_dataset(cfg);
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < data->task_keys.size(); ++i) index[data->task_keys[i]] = static_cast<int>(i);
    for (const auto& [key, label] : load_gold_labels(cfg.gold_path)) {
      const auto it = index.find(key);
      if (it == index.end()) throw ValidationError("gold task '" + key + "' is not in the dataset");
      gold_index.push_back(it->second);
      gold_truth.push_back(label);
    }
  }

  struct Slot {
    GoldStandardOutcome outcome;
    int undecided = 0;
  };
  std::vector<Slot> slots(reps);
  parallel_for(
      reps,
      [&](std::size_t r) {
        const auto rs = replicate_seed(cfg.seed, 0, r);
        std::vector<TaskState> states;
        std::vector<Label> truth;
        if (data) {
          const auto problem = reshuffle_pools(data->instance, derive_seed(rs, kShuffle));
          const auto trace =
              run_allocation(problem, replay_budget(cfg, problem), allocation_options(cfg), derive_seed(rs, kAllocation));
          for (int i : gold_index) states.push_back(trace.final_states[static_cast<std::size_t>(i)]);
          truth = gold_truth;
        } else {
          const auto problem = generate_synthetic_problem(cfg.n_tasks, cfg.truth, derive_seed(rs, kProblem));
          const auto trace =
              run_allocation(problem, cfg.synthetic_budget(), allocation_options(cfg), derive_seed(rs, kAllocation));
          states = trace.final_states;
          for (const auto& t : problem.synthetic) truth.push_back(t.z);
        }
        slots[r].outcome = tally_gold_outcome(states, truth);
        slots[r].undecided = static_cast<int>(
            std::count_if(states.begin(), states.end(), [](const TaskState& s) { return s.d == Decision::undecided; }));
      },
      cfg.threads);

  CalibrateResult out;
  for (const auto& s : slots) {
    out.outcome.n0 += s.outcome.n0;
    out.outcome.n1 += s.outcome.n1;
    out.outcome.m00 += s.outcome.m00;
    out.outcome.m01 += s.outcome.m01;
    out.outcome.m10 += s.outcome.m10;
    out.outcome.m11 += s.outcome.m11;
    out.undecided += s.undecided;
  }
  CalibrationOptions opt;
  opt.smooth = cfg.calibration_smoothing;
  opt.zero_prior = cfg.resolved_priors().zero;
  out.priors = calibrate_priors(out.outcome, opt);
  return out;
}

}  // namespace deps
