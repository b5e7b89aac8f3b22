#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

#include "gsr/bench.hpp"
#include "gsr/io.hpp"
#include "sensor_fixture.hpp"
#include "test_util.hpp"

using namespace gsr;
using namespace gsr_test;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("gsr_bench_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// Shrunk configuration so plumbing tests stay fast.
ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.graph.n = 16;
  cfg.bandwidth = 8;
  cfg.k_train = 10;
  cfg.trials = 2;
  cfg.snr_db = {10.0};
  cfg.sampling_ratios = {0.5};
  cfg.model = TableModel::bcnn1;
  cfg.train.max_iter = 3;
  cfg.train.patches_per_iter = 8;
  cfg.train.batch_size = 8;
  cfg.train.patch_size = 4;
  cfg.recovery.max_iter = 30;
  cfg.seed = 3;
  return cfg;
}

}  // namespace

TEST_CASE("config json parsing with defaults and overrides") {
  const nlohmann::json j = {
      {"distribution", "ggd"},
      {"graph", {{"n", 32}, {"kernel_width", 0.4}}},
      {"model", "bcnn2"},
      {"snr_db", {5.0, 15.0}},
      {"train", {{"max_iter", 7}, {"learning_rate", 0.01}}},
      {"recovery", {{"split", "per_filter"}}},
      {"variance", {{"trials", 3}}},
  };
  const ExperimentConfig cfg = config_from_json(j);
  CHECK(cfg.distribution == Distribution::ggd);
  CHECK(cfg.graph.n == 32);
  CHECK(cfg.graph.kernel_width == 0.4);
  CHECK(cfg.graph.edge_threshold == 0.75);  // untouched default
  CHECK(cfg.model == TableModel::bcnn2);
  CHECK(cfg.snr_db == std::vector<double>{5.0, 15.0});
  CHECK(cfg.train.max_iter == 7);
  CHECK(cfg.train.learning_rate == 0.01);
  CHECK(cfg.train.cd_steps == 5);  // untouched default
  CHECK(cfg.recovery.split == LikelihoodSplit::per_filter);
  CHECK(cfg.variance.trials == 3);
  CHECK(cfg.variance.snr_db == 30.0);  // untouched default
  CHECK_THROWS(config_from_json({{"distribution", "unknown"}}));
  CHECK_THROWS(config_from_json({{"recovery", {{"split", "bogus"}}}}));
}

TEST_CASE("benchmark graph generation is deterministic per seed") {
  const ExperimentConfig cfg = tiny_config();
  const Graph a = make_benchmark_graph(cfg, 5);
  const Graph b = make_benchmark_graph(cfg, 5);
  const Graph c = make_benchmark_graph(cfg, 6);
  CHECK((a.adjacency - b.adjacency).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.adjacency - c.adjacency).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("signal dispatch per distribution") {
  const ExperimentConfig cfg = tiny_config();
  const Graph g = make_benchmark_graph(cfg, 7);
  const auto gmrf = generate_signals(cfg, Distribution::gmrf, g, 3, 1);
  const auto gmm = generate_signals(cfg, Distribution::gmm, g, 3, 1);
  const auto ggd = generate_signals(cfg, Distribution::ggd, g, 3, 1);
  REQUIRE(gmrf.size() == 3);
  REQUIRE(gmm.size() == 3);
  REQUIRE(ggd.size() == 3);
  for (const auto& s : gmrf) CHECK(s.size() == g.size());
  // The three laws produce visibly different signals.
  CHECK((gmrf[0] - gmm[0]).cwiseAbs().maxCoeff() > 1e-6);
  CHECK((gmm[0] - ggd[0]).cwiseAbs().maxCoeff() > 1e-6);
}

TEST_CASE("recovery benchmark pairs methods on identical realizations") {
  const ExperimentConfig cfg = tiny_config();
  const BenchResult result = run_recovery_benchmark(cfg);
  REQUIRE(result.summary.size() == 2);  // one cell, two methods
  REQUIRE(result.details.size() == 2 * cfg.trials);
  for (int trial = 0; trial < cfg.trials; ++trial) {
    const auto& a = result.details[2 * trial];
    const auto& b = result.details[2 * trial + 1];
    CHECK(a.realization_hash == b.realization_hash);
    CHECK(a.method != b.method);
    CHECK(a.trial == trial);
  }
  // Summary means reproduce the detail rows.
  for (const auto& row : result.summary) {
    double acc = 0.0;
    int count = 0;
    for (const auto& d : result.details)
      if (d.method == row.method) {
        acc += d.nmse;
        ++count;
      }
    REQUIRE(count == row.trials);
    CHECK(row.nmse_mean == doctest::Approx(acc / count).epsilon(1e-12));
  }
  SUBCASE("rerun is identical") {
    const BenchResult again = run_recovery_benchmark(cfg);
    REQUIRE(again.details.size() == result.details.size());
    for (size_t i = 0; i < result.details.size(); ++i) {
      CHECK(again.details[i].nmse == result.details[i].nmse);
      CHECK(again.details[i].realization_hash == result.details[i].realization_hash);
    }
  }
}

TEST_CASE("variance study shapes and determinism") {
  ExperimentConfig cfg = tiny_config();
  cfg.distribution = Distribution::gmm;
  cfg.variance.trials = 3;
  cfg.variance.sampling_ratio = 0.9;
  const auto rows = run_variance_study(cfg);
  REQUIRE(static_cast<int>(rows.size()) == cfg.graph.n);
  const Graph g = make_benchmark_graph(cfg, cfg.seed);
  const Vec truth = generate_signals(cfg, cfg.distribution, g, 1, derive_seed(cfg.seed, 0x1707)).front();
  for (int v = 0; v < cfg.graph.n; ++v) {
    CHECK(rows[v].node == v);
    CHECK(std::isfinite(rows[v].mean_estimate));
    CHECK(rows[v].variance >= 0.0);
    CHECK(rows[v].truth == truth[v]);
  }
  SUBCASE("single trial has zero variance") {
    cfg.variance.trials = 1;
    for (const auto& row : run_variance_study(cfg)) CHECK(row.variance == 0.0);
  }
}

TEST_CASE("sensor ingestion") {
  TempDir tmp;
  const SensorFixture fx = write_sensor_fixture(tmp.path, 20, 60, 777);
  ExperimentConfig cfg;
  cfg.sensor.readings = fx.readings;
  cfg.sensor.coords = fx.coords;
  cfg.sensor.k_train = 50;
  cfg.graph.kernel_width = 0.5;
  cfg.graph.edge_threshold = 0.75;

  SUBCASE("complete rounds split into train and holdout in file order") {
    const IngestResult result = ingest_sensor_dataset(cfg);
    CHECK(result.graph.size() == 20);
    CHECK(static_cast<int>(result.train_signals.size()) == 50);
    CHECK(static_cast<int>(result.holdout_signals.size()) == fx.complete_epochs - 50);
    for (const Vec& s : result.train_signals) {
      CHECK(s.size() == 20);
      CHECK(s.allFinite());
      CHECK(s.minCoeff() > 10.0);  // plausible temperatures
      CHECK(s.maxCoeff() < 35.0);
    }
  }
  SUBCASE("unknown node ids are an error") {
    std::ofstream app(fx.readings, std::ios::app);
    app << "2004-03-09 00:00:00.000 99999 4040 21.5 38.0 45.2 2.68\n";
    app.close();
    CHECK_THROWS_WITH_AS(ingest_sensor_dataset(cfg), doctest::Contains("unknown node id"),
                         std::runtime_error);
  }
  SUBCASE("no complete round reports a coverage histogram") {
    // Keep only rows of nodes 2..N: node id 1 never reports.
    std::ifstream in(fx.readings);
    std::string line, kept;
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      std::string d, t, e, id;
      ls >> d >> t >> e >> id;
      if (id != "1") kept += line + "\n";
    }
    in.close();
    std::ofstream out(fx.readings, std::ios::trunc);
    out << kept;
    out.close();
    CHECK_THROWS_WITH_AS(ingest_sensor_dataset(cfg), doctest::Contains("coverage histogram"),
                         std::runtime_error);
  }
}

TEST_CASE("signal scaler") {
  SUBCASE("fit recovers the global mean and standard deviation") {
    // Values {1, 3, 5, 7} across two signals: mean 4, population sd sqrt(5).
    Vec a(2), b(2);
    a << 1.0, 3.0;
    b << 5.0, 7.0;
    const SignalScaler s = fit_signal_scaler({a, b});
    CHECK(s.offset == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(s.scale == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
    CHECK(s.apply(a).sum() + s.apply(b).sum() == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("apply and invert round-trip") {
    const Vec v = 20.0 + 3.0 * random_vec(16, 881).array();
    const SignalScaler s = fit_signal_scaler({v});
    CHECK((s.invert(s.apply(v)) - v).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("constant signals fall back to unit scale") {
    const SignalScaler s = fit_signal_scaler({Vec::Constant(4, 9.0)});
    CHECK(s.offset == 9.0);
    CHECK(s.scale == 1.0);
  }
  SUBCASE("no signals is an error") {
    CHECK_THROWS_AS(fit_signal_scaler({}), std::invalid_argument);
  }
}

TEST_CASE("sensor level decomposition") {
  SUBCASE("centering removes each signal's own mean") {
    const Vec a = 5.0 + random_vec(12, 907).array();
    const Vec b = -3.0 + 2.0 * random_vec(12, 908).array();
    const auto centered = center_each({a, b});
    REQUIRE(centered.size() == 2);
    CHECK(std::abs(centered[0].mean()) < 1e-14);
    CHECK(std::abs(centered[1].mean()) < 1e-14);
    CHECK((centered[0] - (a.array() - a.mean()).matrix()).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("level-plus-residual recovery reproduces loosely constrained data") {
    // With a near-flat prior and every node observed the recovery follows the
    // data, so splitting off the level and adding it back must round-trip.
    const Graph g = random_graph(10, 909);
    PriorParams theta;
    theta.coeffs = Mat::Ones(1, 4);
    theta.weight_logits = Mat::Zero(1, 1);
    theta.component_vars = Mat::Constant(1, 1, 1e6);
    const SamplingMask mask = make_sampling_mask(10, 10, 910);
    const Vec x = 25.0 + 0.5 * random_vec(10, 911).array();
    const Vec y = mask.apply(x);
    RecoverConfig rc;
    rc.tol = 1e-12;
    rc.max_iter = 2000;
    const SignalScaler residual{0.0, 0.5};
    const Vec est = recover_sensor_signal(theta, g, mask, y, rc, residual);
    CHECK((est - x).norm() < 1e-2 * x.norm());
  }
  SUBCASE("empty observation is an error") {
    const Graph g = random_graph(4, 912);
    PriorParams theta;
    theta.coeffs = Mat::Ones(1, 4);
    theta.weight_logits = Mat::Zero(1, 1);
    theta.component_vars = Mat::Constant(1, 1, 1.0);
    CHECK_THROWS_AS(
        recover_sensor_signal(theta, g, make_sampling_mask(4, 2, 913), Vec(), RecoverConfig{},
                              SignalScaler{}),
        std::invalid_argument);
  }
}

TEST_CASE("sensor climatology decomposition") {
  SUBCASE("node_means averages per node") {
    Vec a(3), b(3);
    a << 1.0, 4.0, -2.0;
    b << 3.0, 0.0, 2.0;
    const Vec mu = node_means({a, b});
    REQUIRE(mu.size() == 3);
    CHECK(mu(0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(mu(1) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(mu(2) == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("node_means rejects empty or ragged input") {
    CHECK_THROWS_AS(node_means({}), std::invalid_argument);
    CHECK_THROWS_AS(node_means({Vec::Zero(3), Vec::Zero(4)}), std::invalid_argument);
  }
  SUBCASE("zero climatology matches the plain overload") {
    const Graph g = random_graph(12, 914);
    PriorParams theta;
    theta.coeffs = Mat::Ones(2, 4);
    theta.weight_logits = Mat::Zero(2, 2);
    theta.component_vars = Mat::Constant(2, 2, 0.7);
    const SamplingMask mask = make_sampling_mask(12, 7, 915);
    const Vec x = 18.0 + random_vec(12, 916).array();
    const Vec y = mask.apply(x);
    const SignalScaler residual{0.0, 0.8};
    const Vec plain = recover_sensor_signal(theta, g, mask, y, RecoverConfig{}, residual);
    const Vec zero =
        recover_sensor_signal(theta, g, mask, y, RecoverConfig{}, residual, Vec::Zero(12));
    CHECK((plain - zero).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("pure climatology fields are reproduced even where unobserved") {
    // Truth = shared level + static spatial pattern, zero anomaly.  The
    // innovations vanish, the posterior has nothing to explain, and the
    // prediction must equal level + climatology at every node, observed or
    // not, no matter how tight the prior or how biased the observed subset's
    // share of the pattern.
    const Graph g = random_graph(10, 917);
    PriorParams theta;
    theta.coeffs = Mat::Ones(1, 4);
    theta.weight_logits = Mat::Zero(1, 1);
    theta.component_vars = Mat::Constant(1, 1, 0.05);
    const Vec mu = 4.0 * random_vec(10, 918);
    const Vec x = mu.array() + 22.0;
    const SamplingMask mask = make_sampling_mask(10, 4, 919);
    const Vec y = mask.apply(x);
    const Vec est =
        recover_sensor_signal(theta, g, mask, y, RecoverConfig{}, SignalScaler{0.0, 1.0}, mu);
    CHECK((est - x).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("climatology must match the graph size") {
    const Graph g = random_graph(6, 920);
    PriorParams theta;
    theta.coeffs = Mat::Ones(1, 4);
    theta.weight_logits = Mat::Zero(1, 1);
    theta.component_vars = Mat::Constant(1, 1, 1.0);
    const SamplingMask mask = make_sampling_mask(6, 3, 921);
    const Vec y = Vec::Zero(3);
    CHECK_THROWS_AS(recover_sensor_signal(theta, g, mask, y, RecoverConfig{}, SignalScaler{},
                                          Vec::Zero(5)),
                    std::invalid_argument);
  }
}

TEST_CASE("plot data emission") {
  TempDir tmp;
  SUBCASE("benchmark schema groups by distribution and snr with one series per method") {
    const fs::path results = tmp.path / "benchmark.csv";
    {
      CsvWriter csv(results, {"distribution", "snr_db", "sampling_ratio", "method", "nmse"});
      for (const char* dist : {"gmrf", "gmm"})
        for (const char* snr : {"10", "20"})
          for (const char* method : {"bcnn_gsr", "gmrf_vb"})
            for (const char* ratio : {"0.3", "0.7", "0.5"})
              csv.write_row({dist, snr, ratio, method, "0.25"});
    }
    const auto written = emit_plot_data(results, tmp.path / "plots");
    CHECK(written.size() == 4);  // 2 distributions x 2 snrs
    for (const auto& p : written) {
      const auto rows = read_csv(p);
      REQUIRE(rows.size() == 7);  // header + 2 methods x 3 ratios
      CHECK(rows[0] == std::vector<std::string>{"x", "y", "series"});
      std::set<std::string> series;
      for (size_t r = 1; r < rows.size(); ++r) series.insert(rows[r][2]);
      CHECK(series == std::set<std::string>{"bcnn_gsr", "gmrf_vb"});
      // Points arrive sorted by x within a series.
      CHECK(rows[1][0] == "0.29999999999999999");
    }
  }
  SUBCASE("variance schema flattens to three series") {
    const fs::path results = tmp.path / "variance_study.csv";
    {
      CsvWriter csv(results, {"node", "mean_estimate", "variance", "truth"});
      csv.write_row({"0", "1.5", "0.1", "1.4"});
      csv.write_row({"1", "2.5", "0.2", "2.4"});
    }
    const auto written = emit_plot_data(results, tmp.path / "plots2");
    REQUIRE(written.size() == 1);
    const auto rows = read_csv(written.front());
    REQUIRE(rows.size() == 7);  // header + 3 series x 2 nodes
    std::set<std::string> series;
    for (size_t r = 1; r < rows.size(); ++r) series.insert(rows[r][2]);
    CHECK(series == std::set<std::string>{"mean_estimate", "truth", "variance"});
  }
  SUBCASE("empty baseline input produces a header-only file") {
    const fs::path results = tmp.path / "empty.csv";
    { CsvWriter csv(results, {"distribution", "snr_db", "sampling_ratio", "method", "nmse"}); }
    const auto written = emit_plot_data(results, tmp.path / "plots3");
    REQUIRE(written.size() == 1);
    const auto rows = read_csv(written.front());
    REQUIRE(rows.size() == 1);
    CHECK(rows[0] == std::vector<std::string>{"x", "y", "series"});
  }
  SUBCASE("unknown schemas are rejected") {
    const fs::path results = tmp.path / "odd.csv";
    { CsvWriter csv(results, {"foo", "bar"}); }
    CHECK_THROWS_WITH_AS(emit_plot_data(results, tmp.path / "plots4"),
                         doctest::Contains("unrecognized"), std::runtime_error);
  }
}
