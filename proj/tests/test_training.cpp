#include <doctest.h>

#include "gsr/training.hpp"
#include "test_util.hpp"

using namespace gsr;
using namespace gsr_test;

namespace {

std::vector<Patch> gaussian_patches(const Graph& g, int count, double sigma, uint64_t seed) {
  std::vector<Patch> patches(count);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  std::vector<int> all(g.size());
  std::iota(all.begin(), all.end(), 0);
  for (Patch& p : patches) {
    p.subgraph = g;
    p.nodes = all;
    p.values.resize(g.size());
    for (int i = 0; i < g.size(); ++i) p.values[i] = gauss(rng);
  }
  return patches;
}

ModelSampler echo_data_sampler() {
  return [](const PriorParams&, const std::vector<Patch>& batch, uint64_t) {
    std::vector<Vec> out;
    out.reserve(batch.size());
    for (const Patch& p : batch) out.push_back(p.values);
    return out;
  };
}

}  // namespace

TEST_CASE("cd update") {
  const Graph g = random_graph(5, 401);
  TrainConfig cfg;
  cfg.seed = 17;

  SUBCASE("model samples equal to the data leave parameters untouched") {
    const PriorParams theta = random_prior(3, 3, 4, 402);
    const auto patches = gaussian_patches(g, 8, 1.0, 403);
    const ModelSampler sampler = echo_data_sampler();
    const PriorParams next = cd_update(theta, patches, cfg, 5, nullptr, &sampler);
    CHECK((next.coeffs - theta.coeffs).cwiseAbs().maxCoeff() == 0.0);
    CHECK((next.weight_logits - theta.weight_logits).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("invalid configurations are rejected") {
    TrainConfig bad = cfg;
    bad.learning_rate = 0.0;
    const PriorParams theta = random_prior(2, 2, 3, 404);
    const auto patches = gaussian_patches(g, 2, 1.0, 405);
    CHECK_THROWS_AS(cd_update(theta, patches, bad, 1), std::invalid_argument);
    CHECK_THROWS_AS(cd_update(theta, {}, cfg, 1), std::invalid_argument);
  }
  SUBCASE("data-side coefficient gradient matches the Gaussian-moment oracle") {
    // Identity filter, single component with variance vm, data N(0, vd I):
    // the score derivative is -|x|^2 / vm per patch, so its expectation over
    // patches is -n vd / vm.
    PriorParams theta;
    theta.coeffs = Mat::Ones(1, 1);
    theta.weight_logits = Mat::Zero(1, 1);
    const double vm = 0.7, vd = 1.3;
    theta.component_vars = Mat::Constant(1, 1, vm);
    const int count = 1000;
    const auto patches = gaussian_patches(g, count, std::sqrt(vd), 406);
    double acc = 0.0;
    for (const Patch& p : patches)
      acc += grad_params_log_density(theta, p.subgraph, p.values).coeffs(0, 0);
    const double expected = -g.size() * vd / vm;
    // Standard error of the mean of -|x|^2/vm is sqrt(2 n) vd / (vm sqrt(count)).
    const double se = std::sqrt(2.0 * g.size()) * vd / (vm * std::sqrt(double(count)));
    CHECK(std::abs(acc / count - expected) < 5.0 * se);
  }
  SUBCASE("diverging chains abort the update and warn") {
    PriorParams theta;
    theta.coeffs = Mat::Constant(1, 1, 50.0);
    theta.weight_logits = Mat::Zero(1, 1);
    theta.component_vars = Mat::Constant(1, 1, 1e-6);
    TrainConfig wild = cfg;
    wild.langevin_step = 0.5;
    const auto patches = gaussian_patches(g, 4, 10.0, 407);
    CdDiagnostics diag;
    const PriorParams next = cd_update(theta, patches, wild, 3, &diag);
    CHECK(diag.aborted);
    CHECK(!diag.warning.empty());
    CHECK((next.coeffs - theta.coeffs).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("train prior") {
  const auto coords = random_coords(32, 411);
  const Graph g = build_rbf_graph(coords, 0.5, 0.75, true);
  const auto signals = gen_gmm_signal(default_scalar_mixture(), g.size(), 20, 412);
  const ModelHyper hyper{4, 3, variance_set_narrow()};

  SUBCASE("zero iterations return the seeded initialization") {
    TrainConfig cfg;
    cfg.max_iter = 0;
    cfg.seed = 7;
    const auto [theta, trace] = train_prior(g, signals, hyper, cfg);
    const PriorParams init = train_init(signals, hyper, derive_seed(cfg.seed, 0x1717));
    CHECK((theta.coeffs - init.coeffs).cwiseAbs().maxCoeff() == 0.0);
    CHECK(trace.iterations.empty());
  }
  SUBCASE("echoing the data converges at the first iteration") {
    TrainConfig cfg;
    cfg.seed = 8;
    cfg.max_iter = 50;
    const ModelSampler sampler = echo_data_sampler();
    const auto [theta, trace] = train_prior(g, signals, hyper, cfg, &sampler);
    REQUIRE(trace.iterations.size() == 1);
    CHECK(trace.converged);
    CHECK(trace.iterations.front().param_delta == 0.0);
  }
  SUBCASE("training is reproducible") {
    TrainConfig cfg;
    cfg.seed = 9;
    cfg.max_iter = 5;
    cfg.patches_per_iter = 16;
    cfg.batch_size = 16;
    const auto [a, ta] = train_prior(g, signals, hyper, cfg);
    const auto [b, tb] = train_prior(g, signals, hyper, cfg);
    CHECK((a.coeffs - b.coeffs).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.weight_logits - b.weight_logits).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(ta.iterations.size() == tb.iterations.size());
    for (size_t i = 0; i < ta.iterations.size(); ++i)
      CHECK(ta.iterations[i].param_delta == tb.iterations[i].param_delta);
  }
  SUBCASE("training improves the histogram kld") {
    TrainConfig cfg;
    cfg.seed = 10;
    cfg.max_iter = 60;
    cfg.patches_per_iter = 32;
    cfg.batch_size = 32;
    const ModelHyper h3 = table_model(TableModel::bcnn3);
    const PriorParams init = train_init(signals, h3, derive_seed(cfg.seed, 0x1717));
    const auto [theta, trace] = train_prior(g, signals, h3, cfg);
    const double kld_before = estimate_kld(init, g, signals, 100, 20, 999);
    const double kld_after = estimate_kld(theta, g, signals, 100, 20, 999);
    CHECK(kld_after < kld_before);
  }
}

TEST_CASE("train init calibration") {
  const ModelHyper hyper{4, 3, variance_set_narrow()};
  // Signals of per-node second moment exactly 4, so the calibrated identity
  // gain must satisfy alpha^2 * 4 = max variance of the ladder.
  std::vector<Vec> signals(10, Vec::Constant(8, 2.0));
  for (size_t i = 1; i < signals.size(); i += 2) signals[i] = -signals[i];

  SUBCASE("every filter starts at the calibrated identity plus a small tail") {
    const PriorParams theta = train_init(signals, hyper, 77);
    const double alpha = std::sqrt(hyper.variance_set.maxCoeff() / 4.0);
    for (int m = 0; m < theta.coeffs.rows(); ++m) {
      CHECK(std::abs(theta.coeffs(m, 0) - alpha) < 0.1);
      for (int p = 1; p < theta.coeffs.cols(); ++p) CHECK(std::abs(theta.coeffs(m, p)) < 0.1);
    }
    CHECK(theta.weight_logits.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("deterministic under seed") {
    const PriorParams a = train_init(signals, hyper, 78);
    const PriorParams b = train_init(signals, hyper, 78);
    CHECK((a.coeffs - b.coeffs).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("degenerate inputs throw") {
    CHECK_THROWS_AS(train_init({}, hyper, 1), std::invalid_argument);
    const std::vector<Vec> silent(3, Vec::Zero(8));
    CHECK_THROWS_AS(train_init(silent, hyper, 1), std::invalid_argument);
  }
}

TEST_CASE("model presets") {
  CHECK(table_model(TableModel::bcnn1).num_filters == 6);
  CHECK(table_model(TableModel::bcnn2).num_filters == 8);
  CHECK(table_model(TableModel::bcnn3).num_filters == 8);
  CHECK(table_model(TableModel::bcnn1).order == 3);
  CHECK(table_model(TableModel::bcnn1).variance_set.size() == 5);
  CHECK(table_model(TableModel::bcnn3).variance_set.size() == 8);
  // Hand values: 0.001 / exp(-7) and 0.001 / exp(7) bracket the narrow set.
  const Vec narrow = variance_set_narrow();
  CHECK(narrow[0] == doctest::Approx(0.001 * std::exp(7.0)).epsilon(1e-14));
  CHECK(narrow[4] == doctest::Approx(0.001 * std::exp(-7.0)).epsilon(1e-14));
  const Vec wide = variance_set_wide();
  CHECK(wide[0] == doctest::Approx(0.001 * std::exp(7.0)).epsilon(1e-14));
  CHECK(wide[7] == doctest::Approx(0.001 * std::exp(-7.0)).epsilon(1e-14));
}

TEST_CASE("histogram kld") {
  std::mt19937_64 rng(421);
  std::normal_distribution<double> gauss;

  SUBCASE("resampled data stays near zero divergence") {
    std::vector<Vec> data;
    for (int k = 0; k < 1000; ++k) {
      Vec v(4);
      for (int i = 0; i < 4; ++i) v[i] = gauss(rng);
      data.push_back(v);
    }
    std::uniform_int_distribution<size_t> pick(0, data.size() - 1);
    std::vector<Vec> resampled;
    for (int k = 0; k < 1000; ++k) resampled.push_back(data[pick(rng)]);
    CHECK(histogram_kld(data, resampled, 20) < 0.01);
    CHECK(histogram_kld(data, data, 20) == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("divergence is nonnegative") {
    std::vector<Vec> a, b;
    for (int k = 0; k < 200; ++k) {
      Vec u(3), v(3);
      for (int i = 0; i < 3; ++i) {
        u[i] = gauss(rng);
        v[i] = 2.0 * gauss(rng) + 0.5;
      }
      a.push_back(u);
      b.push_back(v);
    }
    CHECK(histogram_kld(a, b, 15) >= 0.0);
    CHECK(histogram_kld(a, b, 15) > 0.05);  // clearly different laws
  }
  SUBCASE("matches the binned analytic divergence for known gaussians") {
    // Data N(0, 4), model N(0, 1).  Oracle: bin both densities with the same
    // edges the estimator uses and take the discrete divergence directly.
    const int bins = 20, n_data = 100000, n_model = 100000;
    std::vector<Vec> data, model;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int k = 0; k < n_data; ++k) {
      Vec v(1);
      v[0] = 2.0 * gauss(rng);
      lo = std::min(lo, v[0]);
      hi = std::max(hi, v[0]);
      data.push_back(v);
    }
    for (int k = 0; k < n_model; ++k) {
      Vec v(1);
      v[0] = gauss(rng);
      model.push_back(v);
    }
    const double pad = 0.1 * (hi - lo);
    lo -= pad;
    hi += pad;
    const double width = (hi - lo) / bins;
    auto mass = [&](double sigma, int b) {
      // Clamping pushes out-of-range mass into the edge bins.
      const double a = lo + b * width, e = lo + (b + 1) * width;
      double m = normal_cdf(e / sigma) - normal_cdf(a / sigma);
      if (b == 0) m += normal_cdf(a / sigma);
      if (b == bins - 1) m += 1.0 - normal_cdf(e / sigma);
      return m;
    };
    // The estimator adds one pseudo-count per bin, so the oracle smooths the
    // analytic masses the same way; far-tail bins whose true model mass
    // underflows then carry the same finite floor on both sides.
    double oracle = 0.0;
    for (int b = 0; b < bins; ++b) {
      const double p = (n_data * mass(2.0, b) + 1.0) / (n_data + bins);
      const double q = (n_model * mass(1.0, b) + 1.0) / (n_model + bins);
      oracle += p * std::log(p / q);
    }
    const double est = histogram_kld(data, model, bins);
    CHECK(est == doctest::Approx(oracle).epsilon(0.05));
  }
}

TEST_CASE("estimate kld is reproducible and finite") {
  const Graph g = random_graph(16, 431);
  const PriorParams theta = random_prior(2, 2, 3, 432);
  const auto data = gen_gmm_signal(default_scalar_mixture(), g.size(), 30, 433);
  const double a = estimate_kld(theta, g, data, 50, 15, 77);
  const double b = estimate_kld(theta, g, data, 50, 15, 77);
  CHECK(a == b);
  CHECK(std::isfinite(a));
  CHECK(a >= 0.0);
}
