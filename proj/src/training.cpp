#include "gsr/training.hpp"

#include <chrono>
#include <cmath>

namespace gsr {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0 && learning_rate <= 1.0))
    throw std::invalid_argument("learning rate must lie in (0, 1]");
  if (cd_steps < 1) throw std::invalid_argument("cd_steps must be at least 1");
  if (langevin_step <= 0.0) throw std::invalid_argument("langevin_step must be positive");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be at least 1");
  if (patches_per_iter < 1) throw std::invalid_argument("patches_per_iter must be at least 1");
  if (patch_size < 2) throw std::invalid_argument("patch_size must be at least 2");
  if (max_iter < 0) throw std::invalid_argument("max_iter must be nonnegative");
  if (conv_tol <= 0.0) throw std::invalid_argument("conv_tol must be positive");
  if (kld_cadence < 0) throw std::invalid_argument("kld_cadence must be nonnegative");
}

PriorParams cd_update(const PriorParams& theta, const std::vector<Patch>& batch,
                      const TrainConfig& cfg, uint64_t step_seed, CdDiagnostics* diag,
                      const ModelSampler* sampler) {
  cfg.validate();
  theta.validate();
  if (batch.empty()) throw std::invalid_argument("CD update needs a nonempty batch");
  if (diag) *diag = CdDiagnostics{};

  const double count = static_cast<double>(batch.size());
  PriorGrad data_grad{Mat::Zero(theta.coeffs.rows(), theta.coeffs.cols()),
                      Mat::Zero(theta.weight_logits.rows(), theta.weight_logits.cols())};
  PriorGrad model_grad = data_grad;

  std::vector<Vec> negatives;
  if (sampler) {
    negatives = (*sampler)(theta, batch, step_seed);
    if (negatives.size() != batch.size())
      throw std::invalid_argument("model sampler returned a mismatched sample count");
  }

  for (size_t i = 0; i < batch.size(); ++i) {
    const Patch& p = batch[i];
    data_grad += grad_params_log_density(theta, p.subgraph, p.values);
    Vec negative;
    if (sampler) {
      negative = negatives[i];
      if (negative.size() != p.values.size())
        throw std::invalid_argument("model sampler returned a mismatched sample length");
    } else {
      try {
        negative = sample_prior_langevin(theta, p.subgraph, p.values, cfg.cd_steps,
                                         cfg.langevin_step, derive_seed(step_seed, i));
      } catch (const LangevinDivergence& e) {
        // Skip the whole update rather than follow a diverging negative phase.
        if (diag) {
          diag->aborted = true;
          diag->warning = std::string("update skipped: ") + e.what();
        }
        return theta;
      }
    }
    model_grad += grad_params_log_density(theta, p.subgraph, negative);
  }

  data_grad *= 1.0 / count;
  model_grad *= 1.0 / count;

  PriorParams next = theta;
  next.coeffs -= cfg.learning_rate * (model_grad.coeffs - data_grad.coeffs);
  next.weight_logits -= cfg.learning_rate * (model_grad.logits - data_grad.logits);
  return next;
}

Vec variance_set_narrow() {
  Vec d(5);
  d << -7.0, -3.0, 0.0, 3.0, 7.0;
  return 0.001 * (-d.array()).exp();
}

Vec variance_set_wide() {
  Vec d(8);
  d << -7.0, -5.0, -3.0, -1.0, 1.0, 3.0, 5.0, 7.0;
  return 0.001 * (-d.array()).exp();
}

ModelHyper table_model(TableModel model) {
  switch (model) {
    case TableModel::bcnn1: return {6, 3, variance_set_narrow()};
    case TableModel::bcnn2: return {8, 3, variance_set_narrow()};
    case TableModel::bcnn3: return {8, 3, variance_set_wide()};
  }
  throw std::invalid_argument("unknown model preset");
}

const char* table_model_name(TableModel model) {
  switch (model) {
    case TableModel::bcnn1: return "bcnn1";
    case TableModel::bcnn2: return "bcnn2";
    case TableModel::bcnn3: return "bcnn3";
  }
  throw std::invalid_argument("unknown model preset");
}

static double param_delta_inf(const PriorParams& a, const PriorParams& b) {
  return std::max((a.coeffs - b.coeffs).cwiseAbs().maxCoeff(),
                  (a.weight_logits - b.weight_logits).cwiseAbs().maxCoeff());
}

PriorParams train_init(const std::vector<Vec>& signals, const ModelHyper& hyper, uint64_t seed) {
  if (signals.empty()) throw std::invalid_argument("need at least one training signal");
  double energy = 0.0;
  long count = 0;
  for (const Vec& v : signals) {
    energy += v.squaredNorm();
    count += v.size();
  }
  if (count == 0 || energy <= 0.0)
    throw std::invalid_argument("training signals carry no energy to calibrate against");
  const double var_data = energy / static_cast<double>(count);

  PriorParams theta = init_prior_params(hyper.num_filters, hyper.order, hyper.variance_set, seed,
                                        0.02);
  theta.coeffs.col(0).array() += std::sqrt(hyper.variance_set.maxCoeff() / var_data);
  return theta;
}

std::pair<PriorParams, TrainingTrace> train_prior(const Graph& g, const std::vector<Vec>& signals,
                                                  const ModelHyper& hyper, const TrainConfig& cfg,
                                                  const ModelSampler* sampler) {
  cfg.validate();
  PriorParams theta = train_init(signals, hyper, derive_seed(cfg.seed, 0x1717));
  TrainingTrace trace;
  int consecutive_aborts = 0;

  for (int t = 1; t <= cfg.max_iter; ++t) {
    const auto started = std::chrono::steady_clock::now();
    const std::vector<Patch> patches =
        extract_patches(g, signals, cfg.patch_size, cfg.patches_per_iter,
                        derive_seed(cfg.seed, t, 0));

    PriorParams before = theta;
    bool all_aborted = true;
    int batch_index = 0;
    for (size_t lo = 0; lo < patches.size(); lo += cfg.batch_size, ++batch_index) {
      const size_t hi = std::min(patches.size(), lo + cfg.batch_size);
      const std::vector<Patch> batch(patches.begin() + lo, patches.begin() + hi);
      CdDiagnostics diag;
      theta = cd_update(theta, batch, cfg, derive_seed(cfg.seed, t, 1 + batch_index), &diag,
                        sampler);
      if (!diag.aborted) all_aborted = false;
    }

    TrainIterRecord rec;
    rec.iteration = t;
    rec.param_delta = param_delta_inf(theta, before);
    rec.aborted = all_aborted;
    if (cfg.kld_cadence > 0 && t % cfg.kld_cadence == 0)
      rec.kld_estimate = estimate_kld(theta, g, signals, 200, 20, derive_seed(cfg.seed, t, 0x6b),
                                      10 * cfg.cd_steps, cfg.langevin_step);
    rec.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
            .count();
    trace.iterations.push_back(rec);

    consecutive_aborts = all_aborted ? consecutive_aborts + 1 : 0;
    if (consecutive_aborts >= 10)
      throw std::runtime_error("training failed: 10 consecutive iterations aborted on diverging chains");
    if (!all_aborted && rec.param_delta < cfg.conv_tol) {
      trace.converged = true;
      break;
    }
  }
  return {theta, trace};
}

double histogram_kld(const std::vector<Vec>& data, const std::vector<Vec>& model, int bins) {
  if (bins < 2) throw std::invalid_argument("need at least two histogram bins");
  if (data.empty() || model.empty()) throw std::invalid_argument("need samples on both sides");
  const auto n = data.front().size();
  for (const Vec& v : data)
    if (v.size() != n) throw std::invalid_argument("data samples must share a length");
  for (const Vec& v : model)
    if (v.size() != n) throw std::invalid_argument("model samples must share a length");

  // Shared binning from the data range, padded 10% on each side; model values
  // outside the range are clamped into the edge bins so no mass is dropped.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Vec& v : data) {
    lo = std::min(lo, v.minCoeff());
    hi = std::max(hi, v.maxCoeff());
  }
  const double range = hi - lo;
  const double pad = range > 0.0 ? 0.1 * range : 1.0;
  lo -= pad;
  hi += pad;
  const double width = (hi - lo) / bins;

  auto bucket = [&](double v) {
    int b = static_cast<int>(std::floor((v - lo) / width));
    return std::min(std::max(b, 0), bins - 1);
  };

  double total = 0.0;
  std::vector<double> p(bins), q(bins);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::fill(p.begin(), p.end(), 1.0);  // add-one smoothing
    std::fill(q.begin(), q.end(), 1.0);
    for (const Vec& v : data) p[bucket(v[i])] += 1.0;
    for (const Vec& v : model) q[bucket(v[i])] += 1.0;
    const double psum = static_cast<double>(data.size()) + bins;
    const double qsum = static_cast<double>(model.size()) + bins;
    double kld = 0.0;
    for (int b = 0; b < bins; ++b) {
      const double pb = p[b] / psum;
      const double qb = q[b] / qsum;
      kld += pb * std::log(pb / qb);
    }
    total += kld;
  }
  return total / static_cast<double>(n);
}

double estimate_kld(const PriorParams& theta, const Graph& g, const std::vector<Vec>& data,
                    int n_model_samples, int bins, uint64_t seed, int langevin_steps,
                    double langevin_step) {
  if (n_model_samples < 1) throw std::invalid_argument("need at least one model sample");
  if (data.empty()) throw std::invalid_argument("need data samples");

  // Chains start from white noise at the empirical data scale.
  double sq = 0.0;
  long cnt = 0;
  for (const Vec& v : data) {
    sq += v.squaredNorm();
    cnt += v.size();
  }
  const double scale = std::sqrt(std::max(sq / std::max(cnt, 1L), 1e-12));

  std::vector<Vec> model;
  model.reserve(n_model_samples);
  Rng rng = make_rng(derive_seed(seed, 0xa11));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int s = 0; s < n_model_samples; ++s) {
    Vec x0(g.size());
    for (int i = 0; i < g.size(); ++i) x0[i] = scale * gauss(rng);
    try {
      model.push_back(sample_prior_langevin(theta, g, x0, langevin_steps, langevin_step,
                                            derive_seed(seed, 1 + s)));
    } catch (const LangevinDivergence&) {
      model.push_back(std::move(x0));  // count the failed chain at its start
    }
  }
  return histogram_kld(data, model, bins);
}

}  // namespace gsr
