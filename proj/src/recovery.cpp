#include "gsr/recovery.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <sstream>

namespace gsr {

static void check_observation(const Graph& g, const SamplingMask& mask, const Vec& y) {
  if (mask.total != g.size()) throw std::invalid_argument("mask does not match graph size");
  if (y.size() != mask.observed()) throw std::invalid_argument("observation does not match mask");
  if (mask.observed() < 1) throw std::invalid_argument("need at least one observed node");
  for (int v : mask.selected)
    if (v < 0 || v >= mask.total) throw std::invalid_argument("mask index out of range");
  if (!y.allFinite()) throw std::invalid_argument("observation must be finite");
}

// Solves the branch system with a Cholesky factorization, bumping the diagonal
// once when the matrix is numerically indefinite.  Returns the factor so both
// the covariance and the mean reuse it; counts the bump in `jitter_count`.
static Eigen::LLT<Mat> factor_with_jitter(Mat precision, int* jitter_count, int filter,
                                          int component) {
  Eigen::LLT<Mat> llt(precision);
  if (llt.info() == Eigen::Success) return llt;
  precision.diagonal().array() += 1e-12;
  if (jitter_count) ++(*jitter_count);
  llt.compute(precision);
  if (llt.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "posterior precision not positive definite at filter " << filter << ", component "
        << component;
    throw std::runtime_error(msg.str());
  }
  return llt;
}

SignalPosterior update_signal_posterior(const PriorParams& theta, const Graph& g,
                                        const SamplingMask& mask, const Vec& y, double noise_var,
                                        double divisor) {
  theta.validate();
  check_observation(g, mask, y);
  if (noise_var <= 0.0) throw std::invalid_argument("noise variance must be positive");
  if (divisor <= 0.0) throw std::invalid_argument("likelihood divisor must be positive");

  const int n = g.size();
  const int num_filters = theta.num_filters();
  const int num_comp = theta.num_components();
  const double obs_precision = 1.0 / (divisor * noise_var);

  const Vec psi_t_y = mask.embed(y);
  const double y_norm2 = y.squaredNorm();
  const Mat log_pi_rows = theta.weight_logits;  // normalized per filter below

  SignalPosterior post;
  post.branch.assign(num_filters, std::vector<PosteriorComponent>(num_comp));
  Mat log_w(num_filters, num_comp);
  post.jitter_count = 0;

  for (int m = 0; m < num_filters; ++m) {
    const Mat f = chebyshev_operator(g, theta.filter(m));
    const Mat gram = f.transpose() * f;
    const double row_hi = log_pi_rows.row(m).maxCoeff();
    double row_acc = 0.0;
    for (int c = 0; c < num_comp; ++c) row_acc += std::exp(log_pi_rows(m, c) - row_hi);
    const double row_lse = row_hi + std::log(row_acc);

    for (int c = 0; c < num_comp; ++c) {
      Mat precision = gram / theta.component_vars(m, c);
      for (int v : mask.selected) precision(v, v) += obs_precision;

      const Eigen::LLT<Mat> llt =
          factor_with_jitter(precision, &post.jitter_count, m, c);
      PosteriorComponent& br = post.branch[m][c];
      const Vec rhs = obs_precision * psi_t_y;
      br.mean = llt.solve(rhs);
      br.cov = llt.solve(Mat::Identity(n, n));
      br.cov = 0.5 * (br.cov + br.cov.transpose().eval());

      // Unnormalized log weight: log prior weight plus the evidence term
      // mu^T Sigma^{-1} mu / 2 - y^T y / (2 noise_var); Sigma^{-1} mu equals
      // the right-hand side, so no extra solve is needed.
      log_w(m, c) = (log_pi_rows(m, c) - row_lse) + 0.5 * br.mean.dot(rhs) -
                    0.5 * y_norm2 / noise_var;
    }
  }

  post.weights = softmax_over_all(log_w);

  post.mean = Vec::Zero(n);
  for (int m = 0; m < num_filters; ++m)
    for (int c = 0; c < num_comp; ++c) post.mean += post.weights(m, c) * post.branch[m][c].mean;

  post.cov = Mat::Zero(n, n);
  for (int m = 0; m < num_filters; ++m)
    for (int c = 0; c < num_comp; ++c) {
      const PosteriorComponent& br = post.branch[m][c];
      post.cov += post.weights(m, c) * (br.cov + br.mean * br.mean.transpose());
    }
  post.cov -= post.mean * post.mean.transpose();
  post.cov = 0.5 * (post.cov + post.cov.transpose().eval());
  return post;
}

NoisePosterior update_noise_posterior(double shape0, double rate0, const SamplingMask& mask,
                                      const Vec& y, const Vec& post_mean, const Mat& post_cov) {
  if (shape0 <= 0.0 || rate0 <= 0.0)
    throw std::invalid_argument("noise hyper-prior must be positive");
  if (y.size() != mask.observed()) throw std::invalid_argument("observation does not match mask");
  if (post_mean.size() != mask.total) throw std::invalid_argument("posterior mean size mismatch");

  NoisePosterior np;
  np.shape = shape0 + 0.5 * static_cast<double>(mask.observed());
  double residual = (y - mask.apply(post_mean)).squaredNorm();
  double trace = 0.0;
  if (post_cov.size() > 0)
    for (int v : mask.selected) trace += post_cov(v, v);
  np.rate = rate0 + 0.5 * residual + 0.5 * trace;
  return np;
}

RecoveryDivergence::RecoveryDivergence(std::vector<RecoveryTraceRow> trace_)
    : std::runtime_error("recovery aborted: iterate became non-finite"), trace(std::move(trace_)) {}

RecoveryResult recover(const PriorParams& theta, const Graph& g, const SamplingMask& mask,
                       const Vec& y, const RecoverConfig& cfg, const Vec* truth) {
  if (cfg.max_iter < 1) throw std::invalid_argument("recovery needs at least one iteration");
  if (cfg.tol <= 0.0) throw std::invalid_argument("recovery tolerance must be positive");
  check_observation(g, mask, y);
  if (truth && truth->size() != g.size())
    throw std::invalid_argument("ground truth does not match graph size");

  const double divisor = likelihood_divisor(cfg.split, theta.num_filters());
  RecoveryResult res;
  // Start from the prior mean.  Initializing at the embedded observations
  // would hand the first noise update a zero residual, pinning the noise
  // variance near zero, from where it only recovers at O(1/t); starting at
  // zero makes the first estimate the observed signal power instead, and the
  // iteration contracts geometrically from above.
  Vec x_prev = Vec::Zero(g.size());
  Vec mean = x_prev;
  Mat cov;  // empty: the first noise update sees a point estimate

  for (int t = 1; t <= cfg.max_iter; ++t) {
    res.noise = update_noise_posterior(cfg.noise_shape0, cfg.noise_rate0, mask, y, mean, cov);
    res.posterior = update_signal_posterior(theta, g, mask, y, res.noise.mean_noise_var(), divisor);
    mean = res.posterior.mean;
    cov = res.posterior.cov;

    RecoveryTraceRow row;
    row.iter = t;
    row.iterate_delta = (mean - x_prev).norm();
    row.mean_precision = res.noise.mean_precision();
    if (truth) {
      const double denom = truth->squaredNorm();
      row.nmse = denom > 0.0 ? (mean - *truth).squaredNorm() / denom
                             : std::numeric_limits<double>::quiet_NaN();
    }
    res.trace.push_back(row);

    if (!mean.allFinite()) throw RecoveryDivergence(res.trace);

    const double denom = std::max(x_prev.squaredNorm(), 1e-300);
    const double rel_change2 = (mean - x_prev).squaredNorm() / denom;
    x_prev = mean;
    if (rel_change2 < cfg.tol) {
      res.converged = true;
      break;
    }
  }
  res.estimate = mean;
  return res;
}

Vec tikhonov_oracle(const Mat& filter_op, double prior_var, const SamplingMask& mask, const Vec& y,
                    double noise_var, double divisor) {
  if (prior_var <= 0.0 || noise_var <= 0.0 || divisor <= 0.0)
    throw std::invalid_argument("tikhonov oracle needs positive variances");
  const double obs_precision = 1.0 / (divisor * noise_var);
  Mat lhs = filter_op.transpose() * filter_op / prior_var;
  for (int v : mask.selected) lhs(v, v) += obs_precision;
  const Vec rhs = obs_precision * mask.embed(y);
  return Eigen::LDLT<Mat>(lhs).solve(rhs);
}

std::pair<Vec, Mat> gmrf_vb_step(const Graph& g, const SamplingMask& mask, const Vec& y,
                                 double noise_precision, double delta_reg) {
  if (noise_precision <= 0.0) throw std::invalid_argument("noise precision must be positive");
  if (delta_reg <= 0.0) throw std::invalid_argument("regularization must be positive");
  Mat precision = g.laplacian;
  precision.diagonal().array() += delta_reg;
  for (int v : mask.selected) precision(v, v) += noise_precision;
  Eigen::LLT<Mat> llt(precision);
  if (llt.info() != Eigen::Success) {
    precision.diagonal().array() += 1e-12;
    llt.compute(precision);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("baseline posterior precision not positive definite");
  }
  Vec mean = llt.solve(noise_precision * mask.embed(y));
  Mat cov = llt.solve(Mat::Identity(g.size(), g.size()));
  return {std::move(mean), std::move(cov)};
}

Vec gmrf_vb_baseline(const Graph& g, const SamplingMask& mask, const Vec& y,
                     const GmrfVbConfig& cfg) {
  if (cfg.max_iter < 1) throw std::invalid_argument("baseline needs at least one iteration");
  if (cfg.tol <= 0.0) throw std::invalid_argument("baseline tolerance must be positive");
  check_observation(g, mask, y);

  // Same zero start as recover(), and for the same reason: the first noise
  // update must not see its own embedded observations as a perfect fit.
  Vec x_prev = Vec::Zero(g.size());
  Vec mean = x_prev;
  Mat cov;
  for (int t = 1; t <= cfg.max_iter; ++t) {
    const NoisePosterior np =
        update_noise_posterior(cfg.noise_shape0, cfg.noise_rate0, mask, y, mean, cov);
    std::tie(mean, cov) = gmrf_vb_step(g, mask, y, np.mean_precision(), cfg.delta_reg);
    if (!mean.allFinite()) throw std::runtime_error("baseline iterate became non-finite");
    const double denom = std::max(x_prev.squaredNorm(), 1e-300);
    const double rel_change2 = (mean - x_prev).squaredNorm() / denom;
    x_prev = mean;
    if (rel_change2 < cfg.tol) break;
  }
  return mean;
}

double nmse(const std::vector<Vec>& estimates, const std::vector<Vec>& truths) {
  if (estimates.size() != truths.size() || estimates.empty())
    throw std::invalid_argument("nmse needs matching nonempty estimate/truth sets");
  double acc = 0.0;
  for (size_t k = 0; k < estimates.size(); ++k) {
    const double denom = truths[k].squaredNorm();
    if (denom <= 0.0) throw std::invalid_argument("nmse truth signal has zero norm");
    acc += (estimates[k] - truths[k]).squaredNorm() / denom;
  }
  return acc / static_cast<double>(estimates.size());
}

}  // namespace gsr
