#pragma once

#include <optional>

#include "gsr/prior.hpp"
#include "gsr/signal_gen.hpp"

namespace gsr {

// Gaussian posterior of one (filter, component) branch.
struct PosteriorComponent {
  Vec mean;
  Mat cov;
};

// Mixture posterior over the signal given one noise level: per-branch
// Gaussians, their reweighted mixture weights and the moment-matched single
// Gaussian used by the rest of the pipeline.
struct SignalPosterior {
  Mat weights;  // num_filters x num_components, sums to one over all entries
  std::vector<std::vector<PosteriorComponent>> branch;  // [filter][component]
  Vec mean;
  Mat cov;
  int jitter_count = 0;  // branches that needed a diagonal bump to factorize
};

// Gamma posterior on the noise precision.
struct NoisePosterior {
  double shape = 0.0;
  double rate = 0.0;
  double mean_precision() const { return shape / rate; }
  double mean_noise_var() const { return rate / shape; }
};

// How the observation likelihood is shared across the mixture branches when a
// branch posterior is formed.  `per_filter` divides the noise precision by the
// filter count (each branch sees an equal share); `full` gives every branch
// the complete likelihood.
enum class LikelihoodSplit { per_filter, full };

struct RecoverConfig {
  double noise_shape0 = 1e-6;  // Gamma prior on the noise precision
  double noise_rate0 = 1e-6;
  int max_iter = 100;
  double tol = 1e-8;  // squared relative change of the iterate
  LikelihoodSplit split = LikelihoodSplit::full;
};

inline double likelihood_divisor(LikelihoodSplit split, int num_filters) {
  return split == LikelihoodSplit::per_filter ? static_cast<double>(num_filters) : 1.0;
}

// One VB update of the signal posterior at a fixed noise variance.  `divisor`
// scales the per-branch observation precision (see LikelihoodSplit).
SignalPosterior update_signal_posterior(const PriorParams& theta, const Graph& g,
                                        const SamplingMask& mask, const Vec& y, double noise_var,
                                        double divisor);

// Conjugate update of the noise-precision posterior given the current
// moment-matched signal posterior.
NoisePosterior update_noise_posterior(double shape0, double rate0, const SamplingMask& mask,
                                      const Vec& y, const Vec& post_mean, const Mat& post_cov);

struct RecoveryTraceRow {
  int iter = 0;
  double iterate_delta = 0.0;   // Euclidean change of the posterior mean
  double mean_precision = 0.0;  // current noise-precision estimate
  std::optional<double> nmse;   // only when ground truth was supplied
};

struct RecoveryResult {
  Vec estimate;
  SignalPosterior posterior;
  NoisePosterior noise;
  std::vector<RecoveryTraceRow> trace;
  bool converged = false;
};

// Thrown when the VB iterate stops being finite; carries the trace up to the
// failure so callers can persist it.
struct RecoveryDivergence : std::runtime_error {
  explicit RecoveryDivergence(std::vector<RecoveryTraceRow> trace_);
  std::vector<RecoveryTraceRow> trace;
};

// Full VB recovery: alternates noise and signal updates starting from the
// prior mean, stopping on the squared relative change of the mean or after
// max_iter updates.
RecoveryResult recover(const PriorParams& theta, const Graph& g, const SamplingMask& mask,
                       const Vec& y, const RecoverConfig& cfg, const Vec* truth = nullptr);

// Closed-form single-branch solution: solves
// (F^T F / prior_var + Psi^T Psi / (divisor * noise_var)) x = Psi^T y / (divisor * noise_var)
// by dense factorization.  Verification oracle for the mixture update.
Vec tikhonov_oracle(const Mat& filter_op, double prior_var, const SamplingMask& mask, const Vec& y,
                    double noise_var, double divisor);

// Fixed-prior VB baseline: Gaussian prior with precision (L + delta I) and the
// same noise-precision updates.
struct GmrfVbConfig {
  double delta_reg = 1e-3;
  double noise_shape0 = 1e-6;
  double noise_rate0 = 1e-6;
  int max_iter = 100;
  double tol = 1e-8;
};

// One baseline signal update at a fixed noise precision; exposed for tests.
std::pair<Vec, Mat> gmrf_vb_step(const Graph& g, const SamplingMask& mask, const Vec& y,
                                 double noise_precision, double delta_reg);

Vec gmrf_vb_baseline(const Graph& g, const SamplingMask& mask, const Vec& y,
                     const GmrfVbConfig& cfg);

// Mean normalized squared error over a set of estimate/truth pairs.
double nmse(const std::vector<Vec>& estimates, const std::vector<Vec>& truths);

}  // namespace gsr
