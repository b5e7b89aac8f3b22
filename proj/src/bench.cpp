#include "gsr/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "gsr/io.hpp"

namespace gsr {

using nlohmann::json;

const char* distribution_name(Distribution d) {
  switch (d) {
    case Distribution::gmrf: return "gmrf";
    case Distribution::gmm: return "gmm";
    case Distribution::ggd: return "ggd";
  }
  throw std::invalid_argument("unknown distribution");
}

Distribution distribution_from_name(const std::string& name) {
  if (name == "gmrf") return Distribution::gmrf;
  if (name == "gmm") return Distribution::gmm;
  if (name == "ggd") return Distribution::ggd;
  throw std::invalid_argument("unknown distribution name: " + name);
}

static TableModel model_from_name(const std::string& name) {
  if (name == "bcnn1") return TableModel::bcnn1;
  if (name == "bcnn2") return TableModel::bcnn2;
  if (name == "bcnn3") return TableModel::bcnn3;
  throw std::invalid_argument("unknown model name: " + name);
}

// ---- configuration ----------------------------------------------------------

static Vec vec_from(const json& arr) {
  Vec v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) v[i] = arr[i].get<double>();
  return v;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  if (j.contains("distribution")) cfg.distribution = distribution_from_name(j["distribution"]);
  if (j.contains("graph")) {
    const json& g = j["graph"];
    cfg.graph.n = g.value("n", cfg.graph.n);
    cfg.graph.kernel_width = g.value("kernel_width", cfg.graph.kernel_width);
    cfg.graph.edge_threshold = g.value("edge_threshold", cfg.graph.edge_threshold);
    cfg.graph.normalize_trace = g.value("normalize_trace", cfg.graph.normalize_trace);
  }
  if (j.contains("model")) cfg.model = model_from_name(j["model"]);
  cfg.bandwidth = j.value("bandwidth", cfg.bandwidth);
  cfg.k_train = j.value("k_train", cfg.k_train);
  cfg.trials = j.value("trials", cfg.trials);
  if (j.contains("snr_db")) {
    cfg.snr_db.clear();
    for (const auto& v : j["snr_db"]) cfg.snr_db.push_back(v.get<double>());
  }
  if (j.contains("sampling_ratios")) {
    cfg.sampling_ratios.clear();
    for (const auto& v : j["sampling_ratios"]) cfg.sampling_ratios.push_back(v.get<double>());
  }
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("train")) {
    const json& t = j["train"];
    cfg.train.learning_rate = t.value("learning_rate", cfg.train.learning_rate);
    cfg.train.cd_steps = t.value("cd_steps", cfg.train.cd_steps);
    cfg.train.langevin_step = t.value("langevin_step", cfg.train.langevin_step);
    cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
    cfg.train.patches_per_iter = t.value("patches_per_iter", cfg.train.patches_per_iter);
    cfg.train.patch_size = t.value("patch_size", cfg.train.patch_size);
    cfg.train.max_iter = t.value("max_iter", cfg.train.max_iter);
    cfg.train.conv_tol = t.value("conv_tol", cfg.train.conv_tol);
    cfg.train.kld_cadence = t.value("kld_cadence", cfg.train.kld_cadence);
  }
  if (j.contains("recovery")) {
    const json& r = j["recovery"];
    cfg.recovery.noise_shape0 = r.value("noise_shape0", cfg.recovery.noise_shape0);
    cfg.recovery.noise_rate0 = r.value("noise_rate0", cfg.recovery.noise_rate0);
    cfg.recovery.max_iter = r.value("max_iter", cfg.recovery.max_iter);
    cfg.recovery.tol = r.value("tol", cfg.recovery.tol);
    const std::string split = r.value("split", std::string("full"));
    if (split == "full") cfg.recovery.split = LikelihoodSplit::full;
    else if (split == "per_filter") cfg.recovery.split = LikelihoodSplit::per_filter;
    else throw std::invalid_argument("recovery.split must be 'full' or 'per_filter'");
  }
  if (j.contains("baseline")) {
    const json& b = j["baseline"];
    cfg.baseline.delta_reg = b.value("delta_reg", cfg.baseline.delta_reg);
    cfg.baseline.noise_shape0 = b.value("noise_shape0", cfg.baseline.noise_shape0);
    cfg.baseline.noise_rate0 = b.value("noise_rate0", cfg.baseline.noise_rate0);
    cfg.baseline.max_iter = b.value("max_iter", cfg.baseline.max_iter);
    cfg.baseline.tol = b.value("tol", cfg.baseline.tol);
  }
  if (j.contains("gmm")) {
    const json& m = j["gmm"];
    if (m.contains("means")) cfg.gmm.means = vec_from(m["means"]);
    if (m.contains("variances")) cfg.gmm.variances = vec_from(m["variances"]);
    if (m.contains("weights")) cfg.gmm.weights = vec_from(m["weights"]);
    cfg.gmm.validate();
  }
  if (j.contains("ggd")) {
    const json& x = j["ggd"];
    cfg.ggd.shape = x.value("shape", cfg.ggd.shape);
    cfg.ggd.power = x.value("power", cfg.ggd.power);
    cfg.ggd.scale = x.value("scale", cfg.ggd.scale);
    cfg.ggd.symmetrize = x.value("symmetrize", cfg.ggd.symmetrize);
  }
  if (j.contains("kld")) {
    cfg.kld.model_samples = j["kld"].value("model_samples", cfg.kld.model_samples);
    cfg.kld.bins = j["kld"].value("bins", cfg.kld.bins);
  }
  if (j.contains("hyperparam")) {
    const json& h = j["hyperparam"];
    cfg.hyperparam.n_seeds = h.value("n_seeds", cfg.hyperparam.n_seeds);
    if (h.contains("distributions")) {
      cfg.hyperparam.distributions.clear();
      for (const auto& d : h["distributions"])
        cfg.hyperparam.distributions.push_back(distribution_from_name(d.get<std::string>()));
    }
  }
  if (j.contains("variance")) {
    const json& v = j["variance"];
    cfg.variance.trials = v.value("trials", cfg.variance.trials);
    cfg.variance.snr_db = v.value("snr_db", cfg.variance.snr_db);
    cfg.variance.sampling_ratio = v.value("sampling_ratio", cfg.variance.sampling_ratio);
  }
  if (j.contains("sensor")) {
    const json& s = j["sensor"];
    cfg.sensor.readings = s.value("readings", std::string());
    cfg.sensor.coords = s.value("coords", std::string());
    cfg.sensor.timestamp_fields = s.value("timestamp_fields", cfg.sensor.timestamp_fields);
    cfg.sensor.k_train = s.value("k_train", cfg.sensor.k_train);
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path.string());
  json j;
  in >> j;
  return config_from_json(j);
}

// ---- shared generation -------------------------------------------------------

Graph make_benchmark_graph(const ExperimentConfig& cfg, uint64_t seed) {
  Rng rng = make_rng(derive_seed(seed, 0x9a4f));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Eigen::Vector2d> coords(cfg.graph.n);
  for (auto& c : coords) {
    c.x() = unif(rng);
    c.y() = unif(rng);
  }
  return build_rbf_graph(coords, cfg.graph.kernel_width, cfg.graph.edge_threshold,
                         cfg.graph.normalize_trace);
}

std::vector<Vec> generate_signals(const ExperimentConfig& cfg, Distribution dist, const Graph& g,
                                  int count, uint64_t seed) {
  switch (dist) {
    case Distribution::gmrf:
      return gen_bandlimited_gmrf(g, std::min(cfg.bandwidth, g.size()), count, seed);
    case Distribution::gmm:
      return gen_gmm_signal(cfg.gmm, g.size(), count, seed);
    case Distribution::ggd:
      return gen_ggd_signal(cfg.ggd.shape, cfg.ggd.power, cfg.ggd.scale, g.size(), count, seed,
                            cfg.ggd.symmetrize);
  }
  throw std::invalid_argument("unknown distribution");
}

// ---- hyperparameter study -----------------------------------------------------

HyperparamResult run_hyperparam_study(const ExperimentConfig& cfg) {
  if (cfg.hyperparam.n_seeds < 1) throw std::invalid_argument("hyperparam study needs seeds");
  const Graph g = make_benchmark_graph(cfg, cfg.seed);
  const TableModel models[] = {TableModel::bcnn1, TableModel::bcnn2, TableModel::bcnn3};

  HyperparamResult result;
  for (Distribution dist : cfg.hyperparam.distributions) {
    std::map<TableModel, double> total;
    for (int s = 0; s < cfg.hyperparam.n_seeds; ++s) {
      const uint64_t run_seed = derive_seed(cfg.seed, static_cast<uint64_t>(dist), s);
      const std::vector<Vec> signals =
          generate_signals(cfg, dist, g, cfg.k_train, derive_seed(run_seed, 0xda7a));
      for (TableModel model : models) {
        TrainConfig tc = cfg.train;
        tc.seed = derive_seed(run_seed, static_cast<uint64_t>(model));
        const auto [theta, trace] = train_prior(g, signals, table_model(model), tc);
        const double kld =
            estimate_kld(theta, g, signals, cfg.kld.model_samples, cfg.kld.bins,
                         derive_seed(run_seed, static_cast<uint64_t>(model), 0x6b),
                         10 * tc.cd_steps, tc.langevin_step);
        result.runs.push_back({table_model_name(model), distribution_name(dist), s, kld});
        total[model] += kld;
      }
    }
    for (TableModel model : models)
      result.summary.push_back({table_model_name(model), distribution_name(dist),
                                total[model] / cfg.hyperparam.n_seeds});
  }
  return result;
}

// ---- recovery benchmark --------------------------------------------------------

BenchResult run_recovery_benchmark(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("benchmark needs at least one trial");
  const Graph g = make_benchmark_graph(cfg, cfg.seed);

  TrainConfig tc = cfg.train;
  tc.seed = derive_seed(cfg.seed, 0x7a11);
  const std::vector<Vec> train_set =
      generate_signals(cfg, cfg.distribution, g, cfg.k_train, derive_seed(cfg.seed, 0xda7a));
  const auto [theta, trace] = train_prior(g, train_set, table_model(cfg.model), tc);

  BenchResult result;
  for (size_t si = 0; si < cfg.snr_db.size(); ++si) {
    for (size_t ri = 0; ri < cfg.sampling_ratios.size(); ++ri) {
      const double snr = cfg.snr_db[si];
      const double ratio = cfg.sampling_ratios[ri];
      const int m_obs = std::max(1, static_cast<int>(std::lround(ratio * g.size())));

      double sum_bcnn = 0.0;
      double sum_base = 0.0;
      for (int trial = 0; trial < cfg.trials; ++trial) {
        const uint64_t ts = derive_seed(cfg.seed, 0xce11 + si * 1000 + ri, trial);
        const Vec truth =
            generate_signals(cfg, cfg.distribution, g, 1, derive_seed(ts, 1)).front();
        const SamplingMask mask = make_sampling_mask(g.size(), m_obs, derive_seed(ts, 2));
        const NoisyObservation obs =
            add_noise_at_snr(mask.apply(truth), snr, derive_seed(ts, 3));

        uint64_t hash = fnv1a(truth);
        hash = fnv1a(mask.selected, hash);
        hash = fnv1a(obs.y, hash);

        const double denom = truth.squaredNorm();
        const RecoveryResult rec = recover(theta, g, mask, obs.y, cfg.recovery, &truth);
        const double nmse_bcnn = (rec.estimate - truth).squaredNorm() / denom;
        const Vec base = gmrf_vb_baseline(g, mask, obs.y, cfg.baseline);
        const double nmse_base = (base - truth).squaredNorm() / denom;

        sum_bcnn += nmse_bcnn;
        sum_base += nmse_base;
        result.details.push_back({distribution_name(cfg.distribution), snr, ratio, trial,
                                  kMethodBcnn, nmse_bcnn, hash});
        result.details.push_back({distribution_name(cfg.distribution), snr, ratio, trial,
                                  kMethodGmrfVb, nmse_base, hash});
      }
      result.summary.push_back({distribution_name(cfg.distribution), snr, ratio, kMethodBcnn,
                                sum_bcnn / cfg.trials, cfg.trials});
      result.summary.push_back({distribution_name(cfg.distribution), snr, ratio, kMethodGmrfVb,
                                sum_base / cfg.trials, cfg.trials});
    }
  }
  return result;
}

// ---- variance study -------------------------------------------------------------

std::vector<VarianceRow> run_variance_study(const ExperimentConfig& cfg) {
  if (cfg.variance.trials < 1) throw std::invalid_argument("variance study needs trials");
  const Graph g = make_benchmark_graph(cfg, cfg.seed);
  const Vec truth =
      generate_signals(cfg, cfg.distribution, g, 1, derive_seed(cfg.seed, 0x1707)).front();
  const int m_obs =
      std::max(1, static_cast<int>(std::lround(cfg.variance.sampling_ratio * g.size())));

  Mat estimates(cfg.variance.trials, g.size());
  for (int trial = 0; trial < cfg.variance.trials; ++trial) {
    const uint64_t ts = derive_seed(cfg.seed, 0x7a61, trial);
    const std::vector<Vec> train_set =
        generate_signals(cfg, cfg.distribution, g, cfg.k_train, derive_seed(ts, 1));
    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(ts, 2);
    const auto [theta, trace] = train_prior(g, train_set, table_model(cfg.model), tc);
    const SamplingMask mask = make_sampling_mask(g.size(), m_obs, derive_seed(ts, 3));
    const NoisyObservation obs =
        add_noise_at_snr(mask.apply(truth), cfg.variance.snr_db, derive_seed(ts, 4));
    estimates.row(trial) = recover(theta, g, mask, obs.y, cfg.recovery).estimate.transpose();
  }

  std::vector<VarianceRow> rows;
  rows.reserve(g.size());
  for (int v = 0; v < g.size(); ++v) {
    const double mean = estimates.col(v).mean();
    double var = 0.0;
    if (cfg.variance.trials > 1)
      var = (estimates.col(v).array() - mean).square().sum() / (cfg.variance.trials - 1);
    rows.push_back({v, mean, var, truth[v]});
  }
  return rows;
}

SignalScaler fit_signal_scaler(const std::vector<Vec>& signals) {
  if (signals.empty()) throw std::invalid_argument("cannot fit a scaler to no signals");
  double sum = 0.0;
  long count = 0;
  for (const Vec& v : signals) {
    sum += v.sum();
    count += v.size();
  }
  const double mean = sum / static_cast<double>(count);
  double sq = 0.0;
  for (const Vec& v : signals) sq += (v.array() - mean).square().sum();
  const double sd = std::sqrt(sq / static_cast<double>(count));
  return {mean, sd > 0.0 ? sd : 1.0};
}

std::vector<Vec> center_each(const std::vector<Vec>& signals) {
  std::vector<Vec> out;
  out.reserve(signals.size());
  for (const Vec& v : signals) out.push_back(v.array() - v.mean());
  return out;
}

Vec node_means(const std::vector<Vec>& signals) {
  if (signals.empty()) throw std::invalid_argument("cannot average an empty signal set");
  Vec mu = Vec::Zero(signals.front().size());
  for (const Vec& v : signals) {
    if (v.size() != mu.size()) throw std::invalid_argument("signals must share a length");
    mu += v;
  }
  return mu / static_cast<double>(signals.size());
}

Vec recover_sensor_signal(const PriorParams& theta, const Graph& g, const SamplingMask& mask,
                          const Vec& y, const RecoverConfig& cfg, const SignalScaler& residual) {
  return recover_sensor_signal(theta, g, mask, y, cfg, residual, Vec::Zero(g.size()));
}

Vec recover_sensor_signal(const PriorParams& theta, const Graph& g, const SamplingMask& mask,
                          const Vec& y, const RecoverConfig& cfg, const SignalScaler& residual,
                          const Vec& climatology) {
  if (y.size() == 0) throw std::invalid_argument("cannot recover from an empty observation");
  if (climatology.size() != g.size())
    throw std::invalid_argument("climatology length does not match graph size");
  if (static_cast<int>(mask.selected.size()) != y.size())
    throw std::invalid_argument("observation length does not match sampling mask");
  // Take the climatology out before estimating the level, so a spatially
  // biased observed subset (all warm-corner sensors, say) does not leak the
  // static pattern into the shared level.
  Vec innovation(y.size());
  for (int i = 0; i < y.size(); ++i) innovation[i] = y[i] - climatology[mask.selected[i]];
  const double level = innovation.mean();
  innovation.array() -= level;
  const RecoveryResult res = recover(theta, g, mask, residual.apply(innovation), cfg);
  Vec est = residual.invert(res.estimate);
  for (int i = 0; i < est.size(); ++i) est[i] += climatology[i] + level;
  return est;
}

// ---- sensor ingestion -------------------------------------------------------------

IngestResult ingest_sensor_dataset(const ExperimentConfig& cfg) {
  const SensorSpec& spec = cfg.sensor;
  if (spec.readings.empty() || spec.coords.empty())
    throw std::invalid_argument("sensor ingestion needs readings and coordinate paths");
  if (spec.timestamp_fields < 1) throw std::invalid_argument("timestamp needs at least one field");
  if (spec.k_train < 1) throw std::invalid_argument("k_train must be positive");

  // Coordinates: "id x y" per line; ids may be arbitrary integers and are
  // densely re-indexed in file order.
  std::ifstream coord_in(spec.coords);
  if (!coord_in) throw std::runtime_error("cannot open for reading: " + spec.coords.string());
  std::vector<Eigen::Vector2d> coords;
  std::map<long, int> id_to_index;
  std::string line;
  while (std::getline(coord_in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    long id;
    double x, y;
    if (!(ls >> id >> x >> y)) throw std::runtime_error("malformed coordinate line: " + line);
    if (!id_to_index.emplace(id, static_cast<int>(coords.size())).second)
      throw std::runtime_error("duplicate node id in coordinates: " + std::to_string(id));
    coords.push_back({x, y});
  }
  const int n = static_cast<int>(coords.size());
  if (n < 2) throw std::runtime_error("coordinate file holds fewer than two nodes");

  // Readings: timestamp fields, node id, temperature, anything after ignored.
  std::ifstream read_in(spec.readings);
  if (!read_in) throw std::runtime_error("cannot open for reading: " + spec.readings.string());
  struct Slot {
    Vec values;
    int seen = 0;
    bool poisoned = false;  // a non-finite or unparseable temperature showed up
    long order = 0;
  };
  std::map<std::string, Slot> by_timestamp;
  long order_counter = 0;
  while (std::getline(read_in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string timestamp, tok;
    for (int f = 0; f < spec.timestamp_fields; ++f) {
      if (!(ls >> tok)) { tok.clear(); break; }
      if (f) timestamp += ' ';
      timestamp += tok;
    }
    long id;
    std::string temp_tok;
    if (tok.empty() || !(ls >> id >> temp_tok)) continue;  // short row: drop silently
    const auto it = id_to_index.find(id);
    if (it == id_to_index.end())
      throw std::runtime_error("reading references unknown node id " + std::to_string(id));

    auto [slot_it, inserted] = by_timestamp.try_emplace(timestamp);
    Slot& slot = slot_it->second;
    if (inserted) {
      slot.values = Vec::Constant(n, std::numeric_limits<double>::quiet_NaN());
      slot.order = order_counter++;
    }
    double temp = std::numeric_limits<double>::quiet_NaN();
    try {
      size_t used = 0;
      temp = std::stod(temp_tok, &used);
      if (used != temp_tok.size()) temp = std::numeric_limits<double>::quiet_NaN();
    } catch (const std::exception&) {
    }
    if (!std::isfinite(temp)) {
      slot.poisoned = true;
      continue;
    }
    if (std::isnan(slot.values[it->second])) ++slot.seen;
    slot.values[it->second] = temp;
  }

  std::vector<const Slot*> complete;
  std::map<int, long> coverage_histogram;
  for (const auto& [ts, slot] : by_timestamp) {
    ++coverage_histogram[slot.seen];
    if (!slot.poisoned && slot.seen == n) complete.push_back(&slot);
  }
  if (complete.empty()) {
    std::ostringstream msg;
    msg << "no timestamp covers all " << n << " nodes; coverage histogram:";
    for (const auto& [count, times] : coverage_histogram)
      msg << ' ' << count << "->" << times;
    throw std::runtime_error(msg.str());
  }
  std::sort(complete.begin(), complete.end(),
            [](const Slot* a, const Slot* b) { return a->order < b->order; });

  IngestResult out;
  out.graph = build_rbf_graph(coords, cfg.graph.kernel_width, cfg.graph.edge_threshold,
                              cfg.graph.normalize_trace);
  const int take = std::min<int>(spec.k_train, static_cast<int>(complete.size()));
  for (int k = 0; k < take; ++k) out.train_signals.push_back(complete[k]->values);
  for (size_t k = take; k < complete.size(); ++k)
    out.holdout_signals.push_back(complete[k]->values);
  return out;
}

// ---- plot data ---------------------------------------------------------------------

static std::string slug(double v) {
  std::string s = format_double(v);
  for (char& ch : s) {
    if (ch == '.') ch = 'p';
    if (ch == '-') ch = 'm';
    if (ch == '+') ch = '_';
  }
  return s;
}

std::vector<std::filesystem::path> emit_plot_data(const std::filesystem::path& results_csv,
                                                  const std::filesystem::path& out_dir) {
  const auto rows = read_csv(results_csv);
  if (rows.empty()) throw std::runtime_error("results file has no header: " + results_csv.string());
  std::filesystem::create_directories(out_dir);
  const std::vector<std::string>& header = rows.front();
  const std::vector<std::string> plot_header{"x", "y", "series"};
  std::vector<std::filesystem::path> written;

  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };

  if (column("sampling_ratio") >= 0 && column("method") >= 0 && column("nmse") >= 0) {
    const int c_dist = column("distribution");
    const int c_snr = column("snr_db");
    const int c_ratio = column("sampling_ratio");
    const int c_method = column("method");
    const int c_nmse = column("nmse");
    // One figure per (distribution, snr); one series per method.
    std::map<std::pair<std::string, std::string>,
             std::map<std::string, std::vector<std::pair<double, double>>>>
        figures;
    for (size_t r = 1; r < rows.size(); ++r) {
      const auto& row = rows[r];
      const std::string dist = c_dist >= 0 ? row[c_dist] : "all";
      const std::string snr = c_snr >= 0 ? row[c_snr] : "all";
      figures[{dist, snr}][row[c_method]].push_back(
          {std::stod(row[c_ratio]), std::stod(row[c_nmse])});
    }
    if (figures.empty()) {
      const auto path = out_dir / "fig_nmse.csv";
      CsvWriter csv(path, plot_header);
      written.push_back(path);
      return written;
    }
    for (auto& [key, series_map] : figures) {
      std::string snr_part = key.second == "all" ? "" : "_snr" + slug(std::stod(key.second));
      const auto path = out_dir / ("fig_nmse_" + key.first + snr_part + ".csv");
      CsvWriter csv(path, plot_header);
      for (auto& [series, points] : series_map) {
        std::sort(points.begin(), points.end());
        for (const auto& [x, y] : points)
          csv.write_row({format_double(x), format_double(y), series});
      }
      written.push_back(path);
    }
    return written;
  }

  if (column("node") >= 0 && column("mean_estimate") >= 0 && column("variance") >= 0) {
    const int c_node = column("node");
    const int c_mean = column("mean_estimate");
    const int c_var = column("variance");
    const int c_truth = column("truth");
    const auto path = out_dir / "fig_variance.csv";
    CsvWriter csv(path, plot_header);
    const char* series[] = {"mean_estimate", "truth", "variance"};
    const int cols[] = {c_mean, c_truth, c_var};
    for (int s = 0; s < 3; ++s) {
      if (cols[s] < 0) continue;
      for (size_t r = 1; r < rows.size(); ++r)
        csv.write_row({rows[r][c_node], rows[r][cols[s]], series[s]});
    }
    written.push_back(path);
    return written;
  }

  throw std::runtime_error("unrecognized results schema in " + results_csv.string());
}

}  // namespace gsr
