#pragma once

#include "gsr/graph.hpp"

namespace gsr {

// Parameters of the energy-based prior: a bank of Chebyshev graph filters
// whose outputs are scored by per-filter mixtures of zero-mean isotropic
// Gaussians.  Component variances are fixed at construction; mixture weights
// live in logit space so gradient steps stay on the simplex.
struct PriorParams {
  Mat coeffs;          // num_filters x (order + 1)
  Mat weight_logits;   // num_filters x num_components
  Mat component_vars;  // num_filters x num_components, strictly positive

  int num_filters() const { return static_cast<int>(coeffs.rows()); }
  int order() const { return static_cast<int>(coeffs.cols()) - 1; }
  int num_components() const { return static_cast<int>(weight_logits.cols()); }

  FilterCoeffs filter(int m) const { return FilterCoeffs{coeffs.row(m).transpose()}; }
  Mat mixture_weights() const { return softmax_rows(weight_logits); }
  void validate() const;
};

// Random initialization: small-magnitude filter coefficients (zero-mean
// Gaussian at coeff_scale), uniform mixture logits, every filter sharing the
// given variance set.
PriorParams init_prior_params(int num_filters, int order, const Vec& variance_set, uint64_t seed,
                              double coeff_scale = 0.1);

// Log of the unnormalized density at x (the partition function is dropped).
double log_unnorm_density(const PriorParams& theta, const Graph& g, const Vec& x);

// Posterior component responsibilities, one simplex row per filter.
Mat responsibilities(const PriorParams& theta, const Graph& g, const Vec& x);

// Gradient of log_unnorm_density with respect to the signal.
Vec grad_x_log_density(const PriorParams& theta, const Graph& g, const Vec& x);

// Gradient with respect to the learnable parameters.
struct PriorGrad {
  Mat coeffs;
  Mat logits;
  double inf_norm() const;
  PriorGrad& operator+=(const PriorGrad& o);
  PriorGrad& operator*=(double s);
};
PriorGrad grad_params_log_density(const PriorParams& theta, const Graph& g, const Vec& x);

// Thrown when an unadjusted Langevin chain leaves the trust region.
struct LangevinDivergence : std::runtime_error {
  LangevinDivergence(int step_, double norm_);
  int step;
  double norm;
};

// Unadjusted Langevin dynamics on the prior: k steps of size `step_size`
// starting from x_init.  Throws LangevinDivergence when the iterate norm
// exceeds 1e6.
Vec sample_prior_langevin(const PriorParams& theta, const Graph& g, const Vec& x_init, int steps,
                          double step_size, uint64_t seed);

}  // namespace gsr
