#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "deps/error.hpp"
#include "deps/harness/experiments.hpp"

namespace fs = std::filesystem;
using deps::Estimator;
using deps::ExperimentConfig;
using deps::ExperimentKind;

namespace {

ExperimentConfig small(ExperimentKind kind) {
  ExperimentConfig cfg;
  cfg.experiment = kind;
  cfg.n_tasks = 200;
  cfg.replicates = 4;
  cfg.bootstrap_resamples = 50;
  cfg.checkpoint_step = 0.25;
  cfg.grid_points = 2;
  cfg.threads = 2;
  return cfg;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("deps_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t data_rows(const fs::path& p) {
  const auto text = slurp(p);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) - 1;
}

fs::path write_dataset(const fs::path& dir, int n_tasks, int per_task) {
  fs::create_directories(dir);
  const auto path = dir / "responses.csv";
  std::ofstream os(path);
  os << "task_id,worker_id,label\n";
  deps::Rng rng(17);
  for (int t = 0; t < n_tasks; ++t) {
    const double p = rng.beta(1.2, 0.9);
    for (int w = 0; w < per_task; ++w) os << "q" << t << ',' << w << ',' << rng.bernoulli(p) << '\n';
  }
  return path;
}

}  // namespace

TEST_CASE("config validation") {
  auto cfg = small(ExperimentKind::timeseries);
  cfg.replicates = 0;
  CHECK_THROWS_AS(cfg.validate(), deps::ConfigError);

  cfg = small(ExperimentKind::timeseries);
  cfg.checkpoint_fractions = std::vector<double>{};
  CHECK_THROWS_AS(cfg.validate(), deps::ConfigError);

  cfg = small(ExperimentKind::replay);
  CHECK_THROWS_AS(cfg.validate(), deps::ConfigError);

  cfg.dataset_path = "somewhere.csv";
  cfg.budget_fraction = 0.6;
  CHECK_THROWS_AS(cfg.validate(), deps::ConfigError);

  cfg = small(ExperimentKind::sweep);
  cfg.dataset_path = "somewhere.csv";
  CHECK_THROWS_AS(cfg.validate(), deps::ConfigError);
}

TEST_CASE("priors follow the data mode unless given") {
  ExperimentConfig cfg;
  CHECK(cfg.resolved_priors() == deps::synthetic_priors());
  cfg.dataset_path = "x.csv";
  CHECK(cfg.resolved_priors() == deps::real_data_priors());
  cfg.priors = deps::DecisionPriors{};
  CHECK(cfg.resolved_priors() == deps::DecisionPriors{});
}

TEST_CASE("config JSON round trip") {
  auto cfg = small(ExperimentKind::threshold);
  cfg.settings = {{2, 3}, {0.5, 4}};
  cfg.seed = 0xfeedfacecafeULL;
  cfg.fit_method = deps::FitMethod::mom;
  cfg.policy = deps::PolicyKind::uniform_random;
  const auto text = deps::config_to_json(cfg);
  const auto back = deps::config_from_json(text);
  CHECK(deps::config_to_json(back) == text);
  CHECK(back.seed == cfg.seed);
  CHECK(back.settings.size() == 2);
  CHECK_THROWS_AS(deps::config_from_json("{\"experiment\": \"nope\"}"), deps::ConfigError);
  CHECK_THROWS_AS(deps::config_from_json("not json"), deps::ConfigError);
}

TEST_CASE("priors JSON") {
  const auto p = deps::priors_from_json(R"({"neg": {"alpha": 1, "beta": 3}, "zero": {"alpha": 2, "beta": 2},
                                            "pos": {"alpha": 3, "beta": 1}})");
  CHECK(p.neg == deps::BetaParams{1, 3});
  CHECK(deps::priors_from_json(deps::priors_to_json(p)) == p);
  CHECK_THROWS_AS(deps::priors_from_json(R"({"neg": {"alpha": 1}})"), deps::ConfigError);
  CHECK_THROWS(deps::priors_from_json(R"({"neg": {"alpha": -1, "beta": 1}, "zero": {"alpha": 2, "beta": 2},
                                          "pos": {"alpha": 3, "beta": 1}})"));
}

TEST_CASE("bias demo histograms account for every task") {
  const auto r = deps::run_bias_demo(small(ExperimentKind::bias_demo));
  CHECK(r.true_p_all.total() == doctest::Approx(800));
  CHECK(r.true_p_completed.total() + r.smoothed_undecided.total() == doctest::Approx(800));
  CHECK(r.smoothed_completed.total() == r.true_p_completed.total());
  CHECK(r.fits.size() == 12);
}

TEST_CASE("a single-cell sweep equals the final timeseries point") {
  auto sweep = small(ExperimentKind::sweep);
  sweep.grid_points = 1;
  sweep.grid_min = sweep.grid_max = 2.0;
  const auto cells = deps::run_grid_sweep(sweep).cells;
  REQUIRE(cells.size() == 3);

  auto ts = small(ExperimentKind::timeseries);
  ts.settings = {{2.0, 2.0}};
  ts.checkpoint_fractions = std::vector<double>{1.0};
  const auto series = deps::run_timeseries(ts);
  REQUIRE(series.bands.size() == 3);
  for (std::size_t e = 0; e < 3; ++e) {
    CHECK(series.bands[e].estimator == cells[e].estimator);
    CHECK(series.bands[e].nats.estimate == doctest::Approx(cells[e].mean_nats).epsilon(1e-12));
  }
}

TEST_CASE("timeseries cardinalities") {
  const auto cfg = small(ExperimentKind::timeseries);
  const auto r = deps::run_timeseries(cfg);
  const std::size_t settings = deps::default_synthetic_settings().size();
  CHECK(r.curves.size() == settings * 4 * 3);
  for (const auto& c : r.curves) CHECK(c.curve.points.size() == 4);
  CHECK(r.bands.size() == settings * 3 * 4);
}

TEST_CASE("degenerate thresholds") {
  auto cfg = small(ExperimentKind::threshold);
  cfg.settings = {{1, 1}};
  cfg.threshold = 1e300;
  auto r = deps::run_threshold_study(cfg);
  for (const auto& row : r.rows) {
    CHECK(row.reached == 4);
    CHECK(row.mean_reached == doctest::Approx(250));  // first checkpoint: 25% of 5 x 200
  }
  cfg.threshold = 0.0;
  r = deps::run_threshold_study(cfg);
  for (const auto& row : r.rows) CHECK(row.censored == 4);
}

TEST_CASE("uniform-random control leaves completed tasks representative") {
  auto cfg = small(ExperimentKind::bias_demo);
  cfg.policy = deps::PolicyKind::uniform_random;
  cfg.n_tasks = 1000;
  cfg.replicates = 20;
  cfg.histogram_bins = 10;
  const auto r = deps::run_bias_demo(cfg);
  // Random allocation spreads responses thinly, so completion still favours
  // easy tasks a little; compare the two halves rather than single bins.
  const double completed_rate = r.true_p_completed.total() / r.true_p_all.total();
  REQUIRE(completed_rate > 0.05);
  auto share = [](const deps::Histogram& h, int from, int to) {
    double s = 0;
    for (int i = from; i < to; ++i) s += h.count(i);
    return s / h.total();
  };
  CHECK(share(r.true_p_completed, 0, 5) == doctest::Approx(share(r.true_p_all, 0, 5)).epsilon(0.05));
}

TEST_CASE("run_experiment writes the four files and is reproducible") {
  for (auto kind : {ExperimentKind::bias_demo, ExperimentKind::sweep, ExperimentKind::timeseries,
                    ExperimentKind::threshold, ExperimentKind::calibrate}) {
    CAPTURE(deps::to_string(kind));
    auto cfg = small(kind);
    cfg.output_dir = scratch(std::string(deps::to_string(kind)) + "_a");
    deps::run_experiment(cfg);
    auto again = cfg;
    again.output_dir = scratch(std::string(deps::to_string(kind)) + "_b");
    again.threads = 1;
    deps::run_experiment(again);
    for (const char* file : {"config.json", "results.csv", "curves.csv", "fits.json"}) {
      CAPTURE(file);
      REQUIRE(fs::exists(cfg.output_dir / file));
      CHECK(slurp(cfg.output_dir / file) == slurp(again.output_dir / file));
    }
  }
}

TEST_CASE("timeseries rows match replicate x checkpoint x method") {
  auto cfg = small(ExperimentKind::timeseries);
  cfg.output_dir = scratch("ts_rows");
  deps::run_experiment(cfg);
  const std::size_t settings = deps::default_synthetic_settings().size();
  CHECK(data_rows(cfg.output_dir / "results.csv") == settings * 4 * 4 * 3);
  CHECK(data_rows(cfg.output_dir / "curves.csv") == settings * 4 * 3);
}

TEST_CASE("replay on a recorded log") {
  const auto dir = scratch("replay");
  auto cfg = small(ExperimentKind::replay);
  cfg.dataset_path = write_dataset(dir, 150, 8).string();
  cfg.output_dir = dir / "out";
  const auto r = deps::run_replay(cfg);
  CHECK(r.dataset.responses_total == 1200);
  CHECK(r.rows.size() == 3);
  CHECK(r.fits.size() == 12);
  for (const auto& f : r.fits) CHECK(f.budget_used <= 600);
  deps::run_experiment(cfg);
  CHECK(data_rows(cfg.output_dir / "results.csv") == 4);

  cfg.budget_fraction = 0.25;
  const auto quarter = deps::run_replay(cfg);
  for (const auto& f : quarter.fits) CHECK(f.budget_used <= 300);
}

TEST_CASE("replay timeseries is measured against the full-data fit") {
  const auto dir = scratch("replay_ts");
  auto cfg = small(ExperimentKind::timeseries);
  cfg.dataset_path = write_dataset(dir, 120, 6).string();
  const auto r = deps::run_timeseries(cfg);
  REQUIRE(r.references.size() == 1);
  CHECK(r.setting_labels[0] == "responses");
}

TEST_CASE("calibration on gold tasks") {
  const auto dir = scratch("calibrate");
  auto cfg = small(ExperimentKind::calibrate);
  cfg.dataset_path = write_dataset(dir, 100, 10).string();
  {
    std::ofstream gold(dir / "gold.csv");
    gold << "task_id,true_label\n";
    for (int t = 0; t < 40; ++t) gold << 'q' << t << ',' << (t % 3 == 0) << '\n';
  }
  cfg.gold_path = (dir / "gold.csv").string();
  const auto r = deps::run_calibration(cfg);
  CHECK(r.outcome.n0 + r.outcome.n1 + r.undecided == 40 * cfg.replicates);
  CHECK_NOTHROW(r.priors.validate());
}
