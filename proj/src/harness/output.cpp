#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "deps/error.hpp"
#include "deps/harness/experiments.hpp"

namespace deps {

using nlohmann::json;

namespace {

json beta_json(const BetaParams& p) { return {{"alpha", p.alpha}, {"beta", p.beta}}; }

BetaParams beta_from(const json& j, const char* what) {
  if (!j.is_object() || !j.contains("alpha") || !j.contains("beta")) {
    throw ConfigError(std::string(what) + " needs numeric alpha and beta");
  }
  return make_beta(j.at("alpha").get<double>(), j.at("beta").get<double>());
}

json priors_json(const DecisionPriors& p) {
  return {{"neg", beta_json(p.neg)}, {"zero", beta_json(p.zero)}, {"pos", beta_json(p.pos)}};
}

DecisionPriors priors_from(const json& j) {
  DecisionPriors p;
  p.neg = beta_from(j.at("neg"), "neg");
  p.zero = beta_from(j.at("zero"), "zero");
  p.pos = beta_from(j.at("pos"), "pos");
  p.validate();
  return p;
}

json fit_json(const FitOutcome& f) {
  json j;
  j["method"] = std::string(to_string(f.estimator));
  if (f.fit) {
    j["fit"] = std::string(to_string(f.fit->method));
    j["alpha"] = f.fit->params.alpha;
    j["beta"] = f.fit->params.beta;
    j["converged"] = f.fit->converged;
    j["iterations"] = f.fit->iterations;
    j["n_samples"] = static_cast<std::int64_t>(f.fit->n_samples);
  } else {
    j["alpha"] = nullptr;
    j["beta"] = nullptr;
    j["converged"] = false;
    j["error"] = f.error;
  }
  j["seed"] = f.seed;
  j["replicate"] = f.replicate;
  j["budget_used"] = f.budget_used;
  return j;
}

json fits_json(const std::vector<FitOutcome>& fits) {
  json arr = json::array();
  for (const auto& f : fits) arr.push_back(fit_json(f));
  return arr;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  os << text;
  if (!os) throw Error("write failed for " + path.string());
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

const char* kCurvesHeader = "setting,budget_used,method,nats,ci_low,ci_high\n";

std::string num(double x) { return format_number(x); }

std::string curves_csv(const TimeseriesResult& r) {
  std::ostringstream os;
  os << kCurvesHeader;
  for (const auto& b : r.bands) {
    os << r.setting_labels[static_cast<std::size_t>(b.setting)] << ',' << b.budget_used << ',' << to_string(b.estimator)
       << ',' << num(b.nats.estimate) << ',' << num(b.nats.low) << ',' << num(b.nats.high) << '\n';
  }
  return os.str();
}

std::string label_of(const BetaParams& p) {
  return "beta-" + format_number(p.alpha) + "-" + format_number(p.beta);
}

template <typename E>
E parse_enum(std::string_view s, std::initializer_list<E> values, const char* what) {
  for (auto v : values) {
    if (s == to_string(v)) return v;
  }
  throw ConfigError("unknown " + std::string(what) + " '" + std::string(s) + "'");
}

}  // namespace

FitMethod parse_fit_method(std::string_view s) { return parse_enum(s, {FitMethod::mle, FitMethod::mom}, "fit method"); }

PolicyKind parse_policy(std::string_view s) {
  return parse_enum(s, {PolicyKind::requallo_greedy, PolicyKind::uniform_random}, "policy");
}

TieBreak parse_tie_break(std::string_view s) {
  return parse_enum(s, {TieBreak::nearest_completion, TieBreak::fewest_responses, TieBreak::lowest_id, TieBreak::random},
                    "tie-break");
}

ReferenceFit parse_reference_fit(std::string_view s) {
  return parse_enum(s, {ReferenceFit::wald_transformed_mom, ReferenceFit::wald_smoothed_mle}, "reference fit");
}

DatasetFormat parse_dataset_format(std::string_view s) {
  if (s == "csv") return DatasetFormat::csv;
  if (s == "tsv") return DatasetFormat::tsv;
  throw ConfigError("unknown dataset format '" + std::string(s) + "'");
}

std::string priors_to_json(const DecisionPriors& priors) { return dump(priors_json(priors)); }

DecisionPriors priors_from_json(std::string_view text) {
  try {
    return priors_from(json::parse(text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("priors: ") + e.what());
  }
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = std::string(to_string(cfg.experiment));
  j["c"] = cfg.completion.c;
  j["smoothing"] = cfg.completion.smoothing;
  j["policy"] = std::string(to_string(cfg.policy));
  j["tie_break"] = std::string(to_string(cfg.tie_break));
  if (cfg.replay_mode()) {
    j["dataset"] = cfg.dataset_path;
    j["dataset_format"] = cfg.dataset_format == DatasetFormat::csv ? "csv" : "tsv";
    j["budget_fraction"] = cfg.budget_fraction;
    j["reference_fit"] = std::string(to_string(cfg.reference_fit));
  } else {
    j["n_tasks"] = cfg.n_tasks;
    j["truth"] = beta_json(cfg.truth);
    j["budget"] = cfg.synthetic_budget();
    json settings = json::array();
    for (const auto& s : cfg.resolved_settings()) settings.push_back(beta_json(s));
    j["settings"] = settings;
    j["grid"] = {{"min", cfg.grid_min}, {"max", cfg.grid_max}, {"points", cfg.grid_points}};
  }
  if (!cfg.gold_path.empty()) j["gold"] = cfg.gold_path;
  j["priors"] = priors_json(cfg.resolved_priors());
  j["fit_method"] = std::string(to_string(cfg.fit_method));
  j["samples_per_task"] = cfg.samples_per_task;
  j["wald_epsilon"] = cfg.wald_epsilon;
  j["calibration_smoothing"] = cfg.calibration_smoothing;
  j["replicates"] = cfg.replicates;
  j["seed"] = cfg.seed;
  j["checkpoints"] = cfg.resolved_fractions();
  j["threshold"] = cfg.threshold;
  j["bootstrap_resamples"] = cfg.bootstrap_resamples;
  j["histogram_bins"] = cfg.histogram_bins;
  return dump(j);
}

ExperimentConfig config_from_json(std::string_view text) {
  ExperimentConfig cfg;
  try {
    const auto j = json::parse(text);
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    if (j.contains("experiment")) cfg.experiment = parse_experiment_kind(j.at("experiment").get<std::string>());
    get("c", cfg.completion.c);
    get("smoothing", cfg.completion.smoothing);
    if (j.contains("policy")) cfg.policy = parse_policy(j.at("policy").get<std::string>());
    if (j.contains("tie_break")) cfg.tie_break = parse_tie_break(j.at("tie_break").get<std::string>());
    get("dataset", cfg.dataset_path);
    if (j.contains("dataset_format")) cfg.dataset_format = parse_dataset_format(j.at("dataset_format").get<std::string>());
    get("budget_fraction", cfg.budget_fraction);
    if (j.contains("reference_fit")) cfg.reference_fit = parse_reference_fit(j.at("reference_fit").get<std::string>());
    get("n_tasks", cfg.n_tasks);
    if (j.contains("truth")) cfg.truth = beta_from(j.at("truth"), "truth");
    get("budget", cfg.budget);
    get("responses_per_task", cfg.responses_per_task);
    if (j.contains("settings")) {
      cfg.settings.clear();
      for (const auto& s : j.at("settings")) cfg.settings.push_back(beta_from(s, "setting"));
    }
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      if (g.contains("min")) cfg.grid_min = g.at("min").get<double>();
      if (g.contains("max")) cfg.grid_max = g.at("max").get<double>();
      if (g.contains("points")) cfg.grid_points = g.at("points").get<int>();
    }
    get("gold", cfg.gold_path);
    if (j.contains("priors")) cfg.priors = priors_from(j.at("priors"));
    if (j.contains("fit_method")) cfg.fit_method = parse_fit_method(j.at("fit_method").get<std::string>());
    get("samples_per_task", cfg.samples_per_task);
    get("wald_epsilon", cfg.wald_epsilon);
    get("calibration_smoothing", cfg.calibration_smoothing);
    get("replicates", cfg.replicates);
    get("seed", cfg.seed);
    get("checkpoint_step", cfg.checkpoint_step);
    if (j.contains("checkpoints")) cfg.checkpoint_fractions = j.at("checkpoints").get<std::vector<double>>();
    get("threshold", cfg.threshold);
    get("bootstrap_resamples", cfg.bootstrap_resamples);
    get("histogram_bins", cfg.histogram_bins);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

void run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.output_dir.empty()) throw ConfigError("no output directory");
  const auto& dir = cfg.output_dir;
  std::filesystem::create_directories(dir);

  std::ostringstream results;
  std::string curves = kCurvesHeader;
  json fits = json::array();

  switch (cfg.experiment) {
    case ExperimentKind::bias_demo: {
      const auto r = run_bias_demo(cfg);
      results << "histogram,bin_low,bin_high,count,density\n";
      const std::pair<const char*, const Histogram*> tables[] = {{"true_p_all", &r.true_p_all},
                                                                 {"true_p_completed", &r.true_p_completed},
                                                                 {"smoothed_completed", &r.smoothed_completed},
                                                                 {"smoothed_undecided", &r.smoothed_undecided}};
      for (const auto& [name, h] : tables) {
        for (int i = 0; i < h->bins(); ++i) {
          results << name << ',' << num(h->lower_edge(i)) << ',' << num(h->lower_edge(i) + h->width()) << ','
                  << num(h->count(i)) << ',' << num(h->density(i)) << '\n';
        }
      }
      std::ostringstream c;
      c << kCurvesHeader;
      for (auto e : kEstimators) {
        std::vector<double> nats;
        std::int64_t budget = 0;
        for (const auto& f : r.fits) {
          if (f.estimator != e) continue;
          nats.push_back(f.fit ? kl_beta_beta(cfg.truth, f.fit->params).nats : std::nan(""));
          budget = std::max(budget, f.budget_used);
        }
        const auto ci = bootstrap_mean_ci(nats, cfg.bootstrap_resamples, derive_seed(cfg.seed, 0xb1a5 + static_cast<int>(e)));
        c << label_of(cfg.truth) << ',' << budget << ',' << to_string(e) << ',' << num(ci.estimate) << ','
          << num(ci.low) << ',' << num(ci.high) << '\n';
      }
      curves = c.str();
      fits = fits_json(r.fits);
      std::ostringstream completed;
      completed << "replicate,completed\n";
      for (std::size_t i = 0; i < r.completed_per_replicate.size(); ++i) {
        completed << i << ',' << r.completed_per_replicate[i] << '\n';
      }
      write_text(dir / "completed.csv", completed.str());
      break;
    }
    case ExperimentKind::sweep: {
      const auto r = run_grid_sweep(cfg);
      results << "alpha_true,beta_true,method,nats,fits_ok,fits_failed\n";
      std::ostringstream c;
      c << kCurvesHeader;
      for (const auto& cell : r.cells) {
        results << num(cell.truth.alpha) << ',' << num(cell.truth.beta) << ',' << to_string(cell.estimator) << ','
                << num(cell.mean_nats) << ',' << cell.fits_ok << ',' << cell.fits_failed << '\n';
        c << label_of(cell.truth) << ',' << cfg.synthetic_budget() << ',' << to_string(cell.estimator) << ','
          << num(cell.nats_ci.estimate) << ',' << num(cell.nats_ci.low) << ',' << num(cell.nats_ci.high) << '\n';
      }
      curves = c.str();
      break;
    }
    case ExperimentKind::timeseries: {
      const auto r = run_timeseries(cfg);
      results << "setting,replicate,budget_used,method,nats\n";
      for (const auto& rc : r.curves) {
        for (const auto& p : rc.curve.points) {
          results << r.setting_labels[static_cast<std::size_t>(rc.setting)] << ',' << rc.replicate << ','
                  << p.budget_used << ',' << rc.curve.method << ',' << num(p.nats) << '\n';
        }
      }
      curves = curves_csv(r);
      fits = fits_json(r.final_fits);
      break;
    }
    case ExperimentKind::threshold: {
      const auto r = run_threshold_study(cfg);
      results << "setting,alpha_true,beta_true,method,threshold,mean_responses,mean_reached,reached,censored\n";
      for (const auto& row : r.rows) {
        const auto& ref = r.series.references[static_cast<std::size_t>(row.setting)];
        results << r.series.setting_labels[static_cast<std::size_t>(row.setting)] << ',' << num(ref.alpha) << ','
                << num(ref.beta) << ',' << to_string(row.estimator) << ',' << num(cfg.threshold) << ','
                << num(row.mean_responses) << ',' << num(row.mean_reached) << ',' << row.reached << ','
                << row.censored << '\n';
      }
      curves = curves_csv(r.series);
      fits = fits_json(r.series.final_fits);
      break;
    }
    case ExperimentKind::replay: {
      const auto r = run_replay(cfg);
      results << "dataset,method,alpha,alpha_low,alpha_high,beta,beta_low,beta_high,fits_failed\n";
      const auto& full = r.full_data.params;
      results << r.dataset.name << ",full-data," << num(full.alpha) << ',' << num(full.alpha) << ','
              << num(full.alpha) << ',' << num(full.beta) << ',' << num(full.beta) << ',' << num(full.beta)
              << ",0\n";
      std::ostringstream c;
      c << kCurvesHeader;
      const auto budget = r.fits.empty() ? 0 : r.fits.front().budget_used;
      for (const auto& row : r.rows) {
        results << r.dataset.name << ',' << to_string(row.estimator) << ',' << num(row.alpha.estimate) << ','
                << num(row.alpha.low) << ',' << num(row.alpha.high) << ',' << num(row.beta.estimate) << ','
                << num(row.beta.low) << ',' << num(row.beta.high) << ',' << row.fits_failed << '\n';
        c << r.dataset.name << ',' << budget << ',' << to_string(row.estimator) << ',' << num(row.nats.estimate) << ','
          << num(row.nats.low) << ',' << num(row.nats.high) << '\n';
      }
      curves = c.str();
      fits = fits_json(r.fits);
      FitOutcome ref;
      ref.fit = r.full_data;
      auto ref_json = fit_json(ref);
      ref_json["method"] = "full-data-" + std::string(to_string(cfg.reference_fit));
      fits.push_back(ref_json);
      break;
    }
    case ExperimentKind::calibrate: {
      const auto r = run_calibration(cfg);
      results << "n0,n1,m00,m01,m10,m11,undecided\n";
      const auto& o = r.outcome;
      results << o.n0 << ',' << o.n1 << ',' << o.m00 << ',' << o.m01 << ',' << o.m10 << ',' << o.m11 << ','
              << r.undecided << '\n';
      write_text(dir / "priors.json", priors_to_json(r.priors));
      break;
    }
  }

  write_text(dir / "config.json", config_to_json(cfg));
  write_text(dir / "results.csv", results.str());
  write_text(dir / "curves.csv", curves);
  write_text(dir / "fits.json", dump(fits));
}

}  // namespace deps
