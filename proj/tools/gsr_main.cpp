// Command-line front end for the graph-signal recovery toolkit: training,
// recovery, benchmark studies and dataset ingestion, all seeded and
// config-driven so every run is reproducible byte for byte.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <optional>

#include "gsr/bench.hpp"
#include "gsr/io.hpp"

namespace fs = std::filesystem;
using namespace gsr;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<uint64_t> seed;
};

ExperimentConfig resolve_config(const CommonOpts& opts) {
  ExperimentConfig cfg;
  if (!opts.config_path.empty()) cfg = load_config(opts.config_path);
  if (opts.seed) cfg.seed = *opts.seed;
  return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "JSON experiment configuration");
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--seed", opts.seed, "override the configured base seed");
}

// Graph/signals either from files or synthesized from the configuration.
struct DataOpts {
  std::string edges, coords, signals;
};

std::pair<Graph, std::vector<Vec>> resolve_data(const ExperimentConfig& cfg, const DataOpts& d) {
  if (!d.edges.empty() != !d.coords.empty())
    throw std::runtime_error("--graph-edges and --graph-coords must be given together");
  Graph g = d.edges.empty() ? make_benchmark_graph(cfg, cfg.seed) : load_graph(d.edges, d.coords);
  std::vector<Vec> signals =
      d.signals.empty()
          ? generate_signals(cfg, cfg.distribution, g, cfg.k_train, derive_seed(cfg.seed, 0xda7a))
          : load_signals(d.signals);
  return {std::move(g), std::move(signals)};
}

// Wall-clock timings stay out of the trace file so identical runs serialize
// to identical bytes.
void write_train_trace(const TrainingTrace& trace, const fs::path& path) {
  CsvWriter csv(path, {"iteration", "param_delta", "kld_estimate"});
  for (const auto& rec : trace.iterations)
    csv.write_row({std::to_string(rec.iteration), format_double(rec.param_delta),
                   rec.kld_estimate ? format_double(*rec.kld_estimate) : std::string()});
}

void write_recovery_trace(const std::vector<RecoveryTraceRow>& trace, const fs::path& path) {
  CsvWriter csv(path, {"iter", "iterate_delta", "mean_precision", "nmse"});
  for (const auto& row : trace)
    csv.write_row({std::to_string(row.iter), format_double(row.iterate_delta),
                   format_double(row.mean_precision),
                   row.nmse ? format_double(*row.nmse) : std::string()});
}

int run_train(const CommonOpts& opts, const DataOpts& data) {
  const ExperimentConfig cfg = resolve_config(opts);
  auto [g, signals] = resolve_data(cfg, data);
  TrainConfig tc = cfg.train;
  tc.seed = derive_seed(cfg.seed, 0x7a11);
  const auto [theta, trace] = train_prior(g, signals, table_model(cfg.model), tc);
  fs::create_directories(opts.out_dir);
  save_prior(theta, fs::path(opts.out_dir) / "prior.json");
  write_train_trace(trace, fs::path(opts.out_dir) / "train_trace.csv");
  std::cout << "trained " << table_model_name(cfg.model) << " for " << trace.iterations.size()
            << " iterations (converged: " << (trace.converged ? "yes" : "no") << ")\n";
  return 0;
}

int run_recover(const CommonOpts& opts, const DataOpts& data, const std::string& prior_path,
                const std::string& mask_path, const std::string& obs_path) {
  const ExperimentConfig cfg = resolve_config(opts);
  if (!data.edges.empty() != !data.coords.empty())
    throw std::runtime_error("--graph-edges and --graph-coords must be given together");
  Graph g =
      data.edges.empty() ? make_benchmark_graph(cfg, cfg.seed) : load_graph(data.edges, data.coords);

  PriorParams theta;
  if (!prior_path.empty()) {
    theta = load_prior(prior_path);
  } else {
    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(cfg.seed, 0x7a11);
    const std::vector<Vec> train_set =
        generate_signals(cfg, cfg.distribution, g, cfg.k_train, derive_seed(cfg.seed, 0xda7a));
    theta = train_prior(g, train_set, table_model(cfg.model), tc).first;
  }

  SamplingMask mask;
  Vec y;
  std::optional<Vec> truth;
  if (!mask_path.empty() && !obs_path.empty()) {
    mask = load_mask(mask_path);
    const auto obs_rows = load_signals(obs_path);
    if (obs_rows.empty()) throw std::runtime_error("observation file holds no rows");
    y = obs_rows.front();
  } else if (mask_path.empty() && obs_path.empty()) {
    // Demo trial synthesized from the configuration.
    const double ratio = cfg.sampling_ratios.empty() ? 0.5 : cfg.sampling_ratios.front();
    const double snr = cfg.snr_db.empty() ? 10.0 : cfg.snr_db.front();
    const int m_obs = std::max(1, static_cast<int>(std::lround(ratio * g.size())));
    truth = generate_signals(cfg, cfg.distribution, g, 1, derive_seed(cfg.seed, 0x5157)).front();
    mask = make_sampling_mask(g.size(), m_obs, derive_seed(cfg.seed, 0x3a5c));
    y = add_noise_at_snr(mask.apply(*truth), snr, derive_seed(cfg.seed, 0x401e)).y;
  } else {
    throw std::runtime_error("--mask and --observation must be given together");
  }

  const RecoveryResult res = recover(theta, g, mask, y, cfg.recovery, truth ? &*truth : nullptr);
  fs::create_directories(opts.out_dir);
  {
    CsvWriter csv(fs::path(opts.out_dir) / "estimate.csv",
                  truth ? std::vector<std::string>{"node", "estimate", "truth"}
                        : std::vector<std::string>{"node", "estimate"});
    for (int v = 0; v < g.size(); ++v) {
      std::vector<std::string> row{std::to_string(v), format_double(res.estimate[v])};
      if (truth) row.push_back(format_double((*truth)[v]));
      csv.write_row(row);
    }
  }
  write_recovery_trace(res.trace, fs::path(opts.out_dir) / "recovery_trace.csv");
  std::cout << "recovered " << g.size() << " nodes from " << mask.observed()
            << " observations in " << res.trace.size() << " iterations";
  if (!res.trace.empty() && res.trace.back().nmse)
    std::cout << " (nmse " << *res.trace.back().nmse << ")";
  std::cout << "\n";
  return 0;
}

int run_bench(const CommonOpts& opts) {
  const ExperimentConfig cfg = resolve_config(opts);
  const BenchResult result = run_recovery_benchmark(cfg);
  fs::create_directories(opts.out_dir);
  {
    CsvWriter csv(fs::path(opts.out_dir) / "benchmark.csv",
                  {"distribution", "snr_db", "sampling_ratio", "method", "nmse", "trials"});
    for (const auto& row : result.summary)
      csv.write_row({row.distribution, format_double(row.snr_db),
                     format_double(row.sampling_ratio), row.method, format_double(row.nmse_mean),
                     std::to_string(row.trials)});
  }
  {
    CsvWriter csv(fs::path(opts.out_dir) / "benchmark_trials.csv",
                  {"distribution", "snr_db", "sampling_ratio", "trial", "method", "nmse",
                   "realization_hash"});
    char hash_hex[19];
    for (const auto& row : result.details) {
      std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                    static_cast<unsigned long long>(row.realization_hash));
      csv.write_row({row.distribution, format_double(row.snr_db),
                     format_double(row.sampling_ratio), std::to_string(row.trial), row.method,
                     format_double(row.nmse), hash_hex});
    }
  }
  std::cout << "benchmark wrote " << result.summary.size() << " summary rows over "
            << result.details.size() << " trial rows\n";
  return 0;
}

int run_hyperparam(const CommonOpts& opts) {
  const ExperimentConfig cfg = resolve_config(opts);
  const auto result = run_hyperparam_study(cfg);
  fs::create_directories(opts.out_dir);
  CsvWriter csv(fs::path(opts.out_dir) / "hyperparam_kld.csv", {"model", "distribution", "kld"});
  for (const auto& row : result.summary)
    csv.write_row({row.model, row.distribution, format_double(row.mean_kld)});
  CsvWriter runs(fs::path(opts.out_dir) / "hyperparam_kld_runs.csv",
                 {"model", "distribution", "seed_index", "kld"});
  for (const auto& row : result.runs)
    runs.write_row({row.model, row.distribution, std::to_string(row.seed_index),
                    format_double(row.kld)});
  std::cout << "hyperparameter study wrote " << result.summary.size() << " rows\n";
  return 0;
}

int run_variance(const CommonOpts& opts) {
  const ExperimentConfig cfg = resolve_config(opts);
  const auto rows = run_variance_study(cfg);
  fs::create_directories(opts.out_dir);
  CsvWriter csv(fs::path(opts.out_dir) / "variance_study.csv",
                {"node", "mean_estimate", "variance", "truth"});
  for (const auto& row : rows)
    csv.write_row({std::to_string(row.node), format_double(row.mean_estimate),
                   format_double(row.variance), format_double(row.truth)});
  std::cout << "variance study wrote " << rows.size() << " rows\n";
  return 0;
}

int run_ingest(const CommonOpts& opts, const std::string& readings, const std::string& coords) {
  ExperimentConfig cfg = resolve_config(opts);
  if (!readings.empty()) cfg.sensor.readings = readings;
  if (!coords.empty()) cfg.sensor.coords = coords;
  const IngestResult result = ingest_sensor_dataset(cfg);
  fs::create_directories(opts.out_dir);
  save_graph(result.graph, fs::path(opts.out_dir) / "graph_edges.txt",
             fs::path(opts.out_dir) / "graph_coords.txt");
  save_signals(result.train_signals, fs::path(opts.out_dir) / "train_signals.csv");
  if (!result.holdout_signals.empty())
    save_signals(result.holdout_signals, fs::path(opts.out_dir) / "holdout_signals.csv");
  std::cout << "ingested " << result.graph.size() << " nodes, "
            << result.train_signals.size() << " training signals, "
            << result.holdout_signals.size() << " holdout signals\n";
  return 0;
}

int run_plotdata(const CommonOpts& opts, const std::string& results) {
  const auto written = emit_plot_data(results, opts.out_dir);
  std::cout << "plot data wrote " << written.size() << " files\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph-signal recovery toolkit"};
  app.require_subcommand(1);

  CommonOpts opts;
  DataOpts data;
  std::string prior_path, mask_path, obs_path, readings_path, coords_path, results_path;

  auto* train = app.add_subcommand("train", "learn prior parameters from signals");
  add_common(train, opts);
  train->add_option("--graph-edges", data.edges, "edge-list file");
  train->add_option("--graph-coords", data.coords, "coordinate file");
  train->add_option("--signals", data.signals, "training signal CSV");

  auto* recover_cmd = app.add_subcommand("recover", "recover a signal from observations");
  add_common(recover_cmd, opts);
  recover_cmd->add_option("--graph-edges", data.edges, "edge-list file");
  recover_cmd->add_option("--graph-coords", data.coords, "coordinate file");
  recover_cmd->add_option("--prior", prior_path, "trained prior JSON");
  recover_cmd->add_option("--mask", mask_path, "sampling mask file");
  recover_cmd->add_option("--observation", obs_path, "observed values CSV (one row)");

  auto* bench = app.add_subcommand("bench", "paired recovery benchmark");
  add_common(bench, opts);

  auto* hyper = app.add_subcommand("hyperparam", "model-size KLD study");
  add_common(hyper, opts);

  auto* variance = app.add_subcommand("variance", "estimator variance study");
  add_common(variance, opts);

  auto* ingest = app.add_subcommand("ingest", "build graph and signals from sensor logs");
  add_common(ingest, opts);
  ingest->add_option("--readings", readings_path, "sensor readings log");
  ingest->add_option("--coords", coords_path, "sensor coordinate file");

  auto* plotdata = app.add_subcommand("plotdata", "flatten result CSVs into plot series");
  add_common(plotdata, opts);
  plotdata->add_option("--results", results_path, "result CSV to flatten")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return run_train(opts, data);
    if (recover_cmd->parsed()) return run_recover(opts, data, prior_path, mask_path, obs_path);
    if (bench->parsed()) return run_bench(opts);
    if (hyper->parsed()) return run_hyperparam(opts);
    if (variance->parsed()) return run_variance(opts);
    if (ingest->parsed()) return run_ingest(opts, readings_path, coords_path);
    if (plotdata->parsed()) return run_plotdata(opts, results_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "error: no subcommand\n";
  return 1;
}
