// Command-line front end for the experiments.
#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "deps/error.hpp"
#include "deps/harness/experiments.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw deps::ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Flag values as strings so they can be layered over a --config file.
struct Flags {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::optional<int> replicates;
  std::optional<double> c_ratio;
  std::optional<double> budget_fraction;
  std::optional<std::int64_t> budget;
  std::optional<double> responses_per_task;
  std::optional<std::size_t> n_tasks;
  std::string priors_file;
  std::string fit;
  std::string policy;
  std::string tie_break;
  std::string out;
  std::string dataset;
  std::string format;
  std::string gold;
  std::string reference_fit;
  std::optional<double> alpha, beta;
  std::optional<double> threshold;
  std::optional<double> checkpoint_step;
  std::optional<int> grid_points;
  std::optional<int> bootstrap;
  unsigned threads = 0;
};

deps::ExperimentConfig build_config(deps::ExperimentKind kind, const Flags& f) {
  deps::ExperimentConfig cfg = f.config_file.empty() ? deps::ExperimentConfig{}
                                                     : deps::config_from_json(read_file(f.config_file));
  cfg.experiment = kind;
  if (f.seed) cfg.seed = *f.seed;
  if (f.replicates) cfg.replicates = *f.replicates;
  if (f.c_ratio) cfg.completion.c = *f.c_ratio;
  if (f.budget_fraction) cfg.budget_fraction = *f.budget_fraction;
  if (f.budget) cfg.budget = *f.budget;
  if (f.responses_per_task) cfg.responses_per_task = *f.responses_per_task;
  if (f.n_tasks) cfg.n_tasks = *f.n_tasks;
  if (!f.priors_file.empty()) cfg.priors = deps::priors_from_json(read_file(f.priors_file));
  if (!f.fit.empty()) cfg.fit_method = deps::parse_fit_method(f.fit);
  if (!f.policy.empty()) cfg.policy = deps::parse_policy(f.policy);
  if (!f.tie_break.empty()) cfg.tie_break = deps::parse_tie_break(f.tie_break);
  if (!f.dataset.empty()) cfg.dataset_path = f.dataset;
  if (!f.format.empty()) cfg.dataset_format = deps::parse_dataset_format(f.format);
  if (!f.gold.empty()) cfg.gold_path = f.gold;
  if (!f.reference_fit.empty()) cfg.reference_fit = deps::parse_reference_fit(f.reference_fit);
  if (f.alpha || f.beta) {
    cfg.truth = deps::make_beta(f.alpha.value_or(cfg.truth.alpha), f.beta.value_or(cfg.truth.beta));
    if (kind == deps::ExperimentKind::timeseries || kind == deps::ExperimentKind::threshold) cfg.settings = {cfg.truth};
  }
  if (f.threshold) cfg.threshold = *f.threshold;
  if (f.checkpoint_step) {
    cfg.checkpoint_step = *f.checkpoint_step;
    cfg.checkpoint_fractions.reset();
  }
  if (f.grid_points) cfg.grid_points = *f.grid_points;
  if (f.bootstrap) cfg.bootstrap_resamples = *f.bootstrap;
  cfg.threads = f.threads;
  cfg.output_dir = f.out.empty() ? std::filesystem::path("out") / std::string(deps::to_string(kind)) : std::filesystem::path(f.out);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Allocation bias and debiased difficulty inference experiments"};
  app.require_subcommand(1);
  Flags flags;

  const std::pair<deps::ExperimentKind, const char*> commands[] = {
      {deps::ExperimentKind::bias_demo, "Histograms of completed and undecided tasks under greedy allocation"},
      {deps::ExperimentKind::sweep, "Divergence per method over an (alpha, beta) grid"},
      {deps::ExperimentKind::timeseries, "Divergence per method against budget used"},
      {deps::ExperimentKind::threshold, "Responses needed to reach a divergence threshold"},
      {deps::ExperimentKind::replay, "Fits on a recorded response log at a budget fraction"},
      {deps::ExperimentKind::calibrate, "Decision priors from gold-standard outcomes"},
  };

  std::optional<deps::ExperimentKind> chosen;
  for (const auto& [kind, help] : commands) {
    auto* sub = app.add_subcommand(std::string(deps::to_string(kind)), help);
    sub->add_option("--config", flags.config_file, "JSON config; flags override its values")->check(CLI::ExistingFile);
    sub->add_option("--seed", flags.seed, "Base seed");
    sub->add_option("--replicates", flags.replicates, "Independent runs");
    sub->add_option("--c-ratio", flags.c_ratio, "Completion ratio threshold (default 4)");
    sub->add_option("--budget-fraction", flags.budget_fraction, "Share of recorded responses to allocate, (0, 0.5]");
    sub->add_option("--budget", flags.budget, "Total responses for synthetic runs");
    sub->add_option("--responses-per-task", flags.responses_per_task, "Synthetic budget per task when --budget is unset");
    sub->add_option("--tasks", flags.n_tasks, "Synthetic task count");
    sub->add_option("--priors", flags.priors_file, "Decision priors JSON")->check(CLI::ExistingFile);
    sub->add_option("--fit", flags.fit, "DEPS fit method")->check(CLI::IsMember({"mle", "mom"}));
    sub->add_option("--policy", flags.policy, "Allocation policy")->check(CLI::IsMember({"requallo", "random"}));
    sub->add_option("--tie-break", flags.tie_break, "Greedy tie-break")
        ->check(CLI::IsMember({"nearest-completion", "fewest-responses", "lowest-id", "random"}));
    sub->add_option("--dataset", flags.dataset, "Response log task_id,worker_id,label")->check(CLI::ExistingFile);
    sub->add_option("--format", flags.format, "Dataset format")->check(CLI::IsMember({"csv", "tsv"}));
    sub->add_option("--gold", flags.gold, "Gold labels task_id,true_label")->check(CLI::ExistingFile);
    sub->add_option("--reference-fit", flags.reference_fit, "Full-data reference fit")
        ->check(CLI::IsMember({"wald-transformed-mom", "wald-smoothed-mle"}));
    sub->add_option("--alpha", flags.alpha, "True alpha of synthetic difficulties");
    sub->add_option("--beta", flags.beta, "True beta of synthetic difficulties");
    sub->add_option("--threshold", flags.threshold, "Divergence threshold in nats");
    sub->add_option("--checkpoint-step", flags.checkpoint_step, "Budget fraction between checkpoints");
    sub->add_option("--grid-points", flags.grid_points, "Grid points per axis");
    sub->add_option("--bootstrap", flags.bootstrap, "Bootstrap resamples");
    sub->add_option("--threads", flags.threads, "Worker threads (0 = all cores)");
    sub->add_option("--out", flags.out, "Output directory");
    sub->callback([&chosen, kind = kind] { chosen = kind; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    const auto cfg = build_config(*chosen, flags);
    deps::run_experiment(cfg);
    std::printf("%s written to %s\n", std::string(deps::to_string(cfg.experiment)).c_str(),
                cfg.output_dir.string().c_str());
    return 0;
  } catch (const deps::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const deps::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const deps::ParameterError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
