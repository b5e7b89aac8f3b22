#pragma once

#include <filesystem>
#include <nlohmann/json_fwd.hpp>

#include "gsr/recovery.hpp"
#include "gsr/training.hpp"

namespace gsr {

inline constexpr const char* kMethodBcnn = "bcnn_gsr";
inline constexpr const char* kMethodGmrfVb = "gmrf_vb";

enum class Distribution { gmrf, gmm, ggd };
const char* distribution_name(Distribution d);
Distribution distribution_from_name(const std::string& name);

struct GraphSpec {
  int n = 64;
  double kernel_width = 0.5;
  double edge_threshold = 0.75;
  bool normalize_trace = true;
};

struct GgdSpec {
  double shape = 2.0;
  double power = 1.5;
  double scale = 1.0;
  bool symmetrize = true;
};

struct KldSpec {
  int model_samples = 200;
  int bins = 20;
};

struct HyperparamSpec {
  int n_seeds = 10;
  std::vector<Distribution> distributions{Distribution::gmrf, Distribution::gmm};
};

// Defaults keep the posterior-mean bias (shrinkage plus interpolation at
// unobserved nodes) small against the Monte-Carlo error band while noise,
// mask, and training randomness all stay in play.
struct VarianceSpec {
  int trials = 100;
  double snr_db = 30.0;
  double sampling_ratio = 0.98;
};

struct SensorSpec {
  std::filesystem::path readings;
  std::filesystem::path coords;
  int timestamp_fields = 3;
  int k_train = 500;
};

struct ExperimentConfig {
  Distribution distribution = Distribution::gmrf;
  GraphSpec graph;
  TableModel model = TableModel::bcnn3;
  int bandwidth = 25;
  int k_train = 50;
  int trials = 50;
  std::vector<double> snr_db{10.0, 20.0};
  std::vector<double> sampling_ratios{0.3, 0.5, 0.7, 0.9};
  uint64_t seed = 1;
  TrainConfig train;
  RecoverConfig recovery;
  GmrfVbConfig baseline;
  ScalarMixture gmm = default_scalar_mixture();
  GgdSpec ggd;
  KldSpec kld;
  HyperparamSpec hyperparam;
  VarianceSpec variance;
  SensorSpec sensor;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

// Graph and signal sources shared by every study: node coordinates uniform on
// the unit square, signals per the configured test distribution.
Graph make_benchmark_graph(const ExperimentConfig& cfg, uint64_t seed);
std::vector<Vec> generate_signals(const ExperimentConfig& cfg, Distribution dist, const Graph& g,
                                  int count, uint64_t seed);

// Hyperparameter study: trains each preset model on shared per-seed data and
// reports the mean histogram KLD per (model, distribution). Per-seed values
// are kept alongside the means so ordering stability across seeds can be
// examined, not just the aggregate.
struct KldRow {
  std::string model;
  std::string distribution;
  double mean_kld = 0.0;
};
struct KldRunRow {
  std::string model;
  std::string distribution;
  int seed_index = 0;
  double kld = 0.0;
};
struct HyperparamResult {
  std::vector<KldRow> summary;
  std::vector<KldRunRow> runs;
};
HyperparamResult run_hyperparam_study(const ExperimentConfig& cfg);

// Paired recovery benchmark over an (snr, sampling-ratio) grid; both methods
// see identical (signal, mask, noise) realizations whose fingerprint lands in
// the detail rows.
struct BenchRow {
  std::string distribution;
  double snr_db = 0.0;
  double sampling_ratio = 0.0;
  std::string method;
  double nmse_mean = 0.0;
  int trials = 0;
};
struct BenchDetailRow {
  std::string distribution;
  double snr_db = 0.0;
  double sampling_ratio = 0.0;
  int trial = 0;
  std::string method;
  double nmse = 0.0;
  uint64_t realization_hash = 0;
};
struct BenchResult {
  std::vector<BenchRow> summary;
  std::vector<BenchDetailRow> details;
};
BenchResult run_recovery_benchmark(const ExperimentConfig& cfg);

// Estimator variance study: fixed ground truth, fresh training set and
// observation per trial; per-node mean and variance of the recovered values.
struct VarianceRow {
  int node = 0;
  double mean_estimate = 0.0;
  double variance = 0.0;
  double truth = 0.0;
};
std::vector<VarianceRow> run_variance_study(const ExperimentConfig& cfg);

// Sensor-network ingestion: readings rows carry a timestamp (a configurable
// number of leading fields), a node id and a temperature; timestamps missing
// any node or holding a non-finite temperature are dropped; the first
// `k_train` complete timestamps become training signals, the rest hold out.
struct IngestResult {
  Graph graph;
  std::vector<Vec> train_signals;
  std::vector<Vec> holdout_signals;
};
IngestResult ingest_sensor_dataset(const ExperimentConfig& cfg);

// Global affine standardization for real-world signals.  The prior's variance
// ladder is calibrated for roughly unit-scale, zero-mean data; raw readings
// (e.g. temperatures near 25 with a few degrees of spread) sit far outside it
// and blow up the Langevin negative phase.  Fit on the training set, apply to
// everything, invert on recovered estimates.
struct SignalScaler {
  double offset = 0.0;
  double scale = 1.0;
  Vec apply(const Vec& v) const { return (v.array() - offset) / scale; }
  Vec invert(const Vec& v) const { return v.array() * scale + offset; }
};
SignalScaler fit_signal_scaler(const std::vector<Vec>& signals);

// Per-signal centering, the training-side half of the sensor recovery path.
// The energy prior is symmetric under sign flips, so it cannot carry a mean;
// sensor fields, however, ride on a large shared level (the building-wide
// temperature).  Train the prior on centered residuals and recover with
// recover_sensor_signal, which re-estimates the level from the observations.
std::vector<Vec> center_each(const std::vector<Vec>& signals);

// Per-node mean of a signal ensemble.  For sensor fields this is the
// climatology: the static spatial pattern (gradients, per-sensor calibration
// offsets, fixed heat sources) that survives per-signal centering.  The
// sign-symmetric prior cannot carry such a mean either, so the recovery
// overload below subtracts it explicitly and models only the anomaly.
Vec node_means(const std::vector<Vec>& signals);

// Level-plus-residual recovery: the signal level comes from the observed
// mean, the centered residual is recovered under the learned prior (in the
// residual scaler's units), and the level is added back.  The climatology
// overload additionally subtracts a per-node mean (see node_means) before
// recovery and adds it back after; pass the training-set climatology whenever
// one is available, since anomalies are all the prior can usefully explain.
Vec recover_sensor_signal(const PriorParams& theta, const Graph& g, const SamplingMask& mask,
                          const Vec& y, const RecoverConfig& cfg, const SignalScaler& residual);
Vec recover_sensor_signal(const PriorParams& theta, const Graph& g, const SamplingMask& mask,
                          const Vec& y, const RecoverConfig& cfg, const SignalScaler& residual,
                          const Vec& climatology);

// Turns result CSVs into plot-ready (x, y, series) files; recognizes the
// benchmark summary and variance-study schemas.  Returns the files written.
std::vector<std::filesystem::path> emit_plot_data(const std::filesystem::path& results_csv,
                                                  const std::filesystem::path& out_dir);

}  // namespace gsr
