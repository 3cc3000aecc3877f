#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "deps/allocation.hpp"
#include "deps/evaluation.hpp"
#include "deps/fit.hpp"
#include "deps/harness/dataset.hpp"
#include "deps/harness/stats.hpp"
#include "deps/inference.hpp"

namespace deps {

enum class ExperimentKind { bias_demo, sweep, timeseries, threshold, replay, calibrate };

std::string_view to_string(ExperimentKind k);
ExperimentKind parse_experiment_kind(std::string_view s);

/// The three estimators every experiment compares.
enum class Estimator { deps, wald_smoothed, wald_transformed };
inline constexpr std::array<Estimator, 3> kEstimators{Estimator::deps, Estimator::wald_smoothed,
                                                      Estimator::wald_transformed};
std::string_view to_string(Estimator e);

/// How the full-data reference distribution of a recorded dataset is fitted.
enum class ReferenceFit { wald_transformed_mom, wald_smoothed_mle };
std::string_view to_string(ReferenceFit r);

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::bias_demo;

  CompletionConfig completion;
  PolicyKind policy = PolicyKind::requallo_greedy;
  TieBreak tie_break = TieBreak::nearest_completion;

  // Synthetic problems.
  std::size_t n_tasks = 1000;
  BetaParams truth{1, 1};            // bias-demo and calibrate
  double responses_per_task = 5.0;   // budget = responses_per_task * n_tasks ...
  std::int64_t budget = 0;           // ... unless this is positive
  double grid_min = 0.5;             // sweep grid over alpha and beta
  double grid_max = 5.0;
  int grid_points = 10;
  std::vector<BetaParams> settings;  // timeseries / threshold; empty = defaults

  // Recorded data.
  std::string dataset_path;
  DatasetFormat dataset_format = DatasetFormat::csv;
  double budget_fraction = 0.5;  // of all responses, in (0, 0.5]
  std::string gold_path;
  ReferenceFit reference_fit = ReferenceFit::wald_transformed_mom;

  // Inference.
  std::optional<DecisionPriors> priors;  // empty = synthetic or real-data set by mode
  FitMethod fit_method = FitMethod::mle;
  int samples_per_task = 1;
  double wald_epsilon = 1.0;
  bool calibration_smoothing = true;

  // Protocol.
  int replicates = 100;
  std::uint64_t seed = 1;
  double checkpoint_step = 0.02;
  std::optional<std::vector<double>> checkpoint_fractions;  // overrides the step grid
  double threshold = 0.3;
  int bootstrap_resamples = 1000;
  int histogram_bins = 20;
  unsigned threads = 0;

  std::filesystem::path output_dir;

  bool replay_mode() const { return !dataset_path.empty(); }
  std::int64_t synthetic_budget() const;
  DecisionPriors resolved_priors() const;
  std::vector<double> resolved_fractions() const;
  std::vector<BetaParams> resolved_settings() const;
  /// Throws ConfigError on inconsistent values.
  void validate() const;
};

/// Synthetic configurations used by timeseries and threshold when none are
/// given: U-shaped, uniform, skewed and peaked.
std::vector<BetaParams> default_synthetic_settings();

/// One fit attempt; `error` is set and `fit` empty when the estimator failed.
struct FitOutcome {
  Estimator estimator = Estimator::deps;
  std::optional<FitResult> fit;
  std::string error;
  std::uint64_t seed = 0;
  int replicate = 0;
  std::int64_t budget_used = 0;
};

FitOutcome fit_estimator(std::span<const TaskState> states, Estimator estimator, const ExperimentConfig& cfg,
                         std::uint64_t seed);

// ----- bias demonstration -----

struct BiasDemoResult {
  Histogram true_p_all;
  Histogram true_p_completed;
  Histogram smoothed_completed;
  Histogram smoothed_undecided;
  std::vector<std::size_t> completed_per_replicate;
  std::vector<FitOutcome> fits;  // per replicate, final states
};

BiasDemoResult run_bias_demo(const ExperimentConfig& cfg);

// ----- grid sweep -----

struct SweepCell {
  BetaParams truth;
  Estimator estimator = Estimator::deps;
  double mean_nats = 0.0;
  Interval nats_ci;
  int fits_ok = 0;
  int fits_failed = 0;
};

struct SweepResult {
  std::vector<SweepCell> cells;  // grid order, estimators innermost
};

SweepResult run_grid_sweep(const ExperimentConfig& cfg);

// ----- divergence against budget -----

struct ReplicateCurve {
  int setting = 0;
  int replicate = 0;
  Estimator estimator = Estimator::deps;
  EfficiencyCurve curve;
};

struct CurveBand {
  int setting = 0;
  Estimator estimator = Estimator::deps;
  std::int64_t budget_used = 0;
  Interval nats;
};

struct TimeseriesResult {
  std::vector<std::string> setting_labels;
  std::vector<BetaParams> references;
  std::vector<ReplicateCurve> curves;  // setting, replicate, estimator order
  std::vector<CurveBand> bands;
  std::vector<FitOutcome> final_fits;
};

TimeseriesResult run_timeseries(const ExperimentConfig& cfg);

struct ThresholdRow {
  int setting = 0;
  Estimator estimator = Estimator::deps;
  double mean_responses = 0.0;  // censored runs counted at their final budget
  double mean_reached = 0.0;    // over runs that reached the threshold
  int reached = 0;
  int censored = 0;
};

struct ThresholdResult {
  TimeseriesResult series;
  std::vector<ThresholdRow> rows;
};

ThresholdResult run_threshold_study(const ExperimentConfig& cfg);

// ----- recorded-data replay -----

struct ReplayRow {
  Estimator estimator = Estimator::deps;
  Interval alpha;
  Interval beta;
  Interval nats;  // against the full-data fit
  int fits_failed = 0;
};

struct ReplayResult {
  DatasetDescriptor dataset;
  FitResult full_data;
  std::vector<ReplayRow> rows;
  std::vector<FitOutcome> fits;
};

ReplayResult run_replay(const ExperimentConfig& cfg);

// ----- prior calibration -----

struct CalibrateResult {
  GoldStandardOutcome outcome;
  DecisionPriors priors;
  int undecided = 0;
};

CalibrateResult run_calibration(const ExperimentConfig& cfg);

// ----- output -----

/// Runs the configured experiment and writes config.json, results.csv,
/// curves.csv and fits.json (plus priors.json for calibrate) into
/// cfg.output_dir.
void run_experiment(const ExperimentConfig& cfg);

std::string config_to_json(const ExperimentConfig& cfg);
/// Keys absent from the document keep their defaults. Throws ConfigError.
ExperimentConfig config_from_json(std::string_view text);
/// `{"neg": {"alpha": .., "beta": ..}, "zero": {..}, "pos": {..}}`
DecisionPriors priors_from_json(std::string_view text);
std::string priors_to_json(const DecisionPriors& priors);

FitMethod parse_fit_method(std::string_view s);
PolicyKind parse_policy(std::string_view s);
TieBreak parse_tie_break(std::string_view s);
ReferenceFit parse_reference_fit(std::string_view s);
DatasetFormat parse_dataset_format(std::string_view s);

}  // namespace deps
