#include "gsr/prior.hpp"

#include <cmath>
#include <sstream>

namespace gsr {

void PriorParams::validate() const {
  if (coeffs.rows() < 1 || coeffs.cols() < 1)
    throw std::invalid_argument("prior needs at least one filter with one coefficient");
  if (weight_logits.rows() != coeffs.rows() || component_vars.rows() != coeffs.rows())
    throw std::invalid_argument("prior parameter blocks disagree on the filter count");
  if (weight_logits.cols() < 1 || component_vars.cols() != weight_logits.cols())
    throw std::invalid_argument("prior parameter blocks disagree on the component count");
  if (!coeffs.allFinite() || !weight_logits.allFinite() || !component_vars.allFinite())
    throw std::invalid_argument("prior parameters must be finite");
  if (component_vars.minCoeff() <= 0.0)
    throw std::invalid_argument("component variances must be strictly positive");
}

PriorParams init_prior_params(int num_filters, int order, const Vec& variance_set, uint64_t seed,
                              double coeff_scale) {
  if (num_filters < 1) throw std::invalid_argument("need at least one filter");
  if (order < 0) throw std::invalid_argument("polynomial order must be nonnegative");
  if (variance_set.size() < 1 || variance_set.minCoeff() <= 0.0)
    throw std::invalid_argument("variance set must be nonempty and positive");
  if (!(coeff_scale > 0.0)) throw std::invalid_argument("coefficient scale must be positive");

  PriorParams theta;
  theta.coeffs.resize(num_filters, order + 1);
  Rng rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, coeff_scale);
  for (int m = 0; m < num_filters; ++m)
    for (int p = 0; p <= order; ++p) theta.coeffs(m, p) = gauss(rng);
  theta.weight_logits = Mat::Zero(num_filters, variance_set.size());
  theta.component_vars = variance_set.transpose().replicate(num_filters, 1);
  theta.validate();
  return theta;
}

namespace {

// Everything the density, responsibilities and both gradients share: filter
// outputs assembled from one Chebyshev basis recursion, per-(filter,component)
// log terms, responsibilities and the effective precision of each filter.
struct PriorEval {
  Mat basis;         // n x (order + 1): T_p applied to x
  Mat filter_out;    // n x num_filters
  Mat resp;          // num_filters x num_components
  Vec precision;     // per filter: sum_n resp / var
  double log_density = 0.0;
};

PriorEval evaluate(const PriorParams& theta, const Graph& g, const Vec& x) {
  theta.validate();
  if (x.size() != g.size()) throw std::invalid_argument("signal length does not match graph");
  if (!x.allFinite()) throw std::invalid_argument("signal must be finite");

  const int num_filters = theta.num_filters();
  const int num_comp = theta.num_components();
  const double n = static_cast<double>(x.size());

  PriorEval ev;
  ev.basis = chebyshev_basis(g.scaled_laplacian_sparse, theta.order(), x);
  ev.filter_out = ev.basis * theta.coeffs.transpose();

  Mat log_pi(num_filters, num_comp);
  for (int m = 0; m < num_filters; ++m) {
    const double hi = theta.weight_logits.row(m).maxCoeff();
    double acc = 0.0;
    for (int c = 0; c < num_comp; ++c) acc += std::exp(theta.weight_logits(m, c) - hi);
    const double lse = hi + std::log(acc);
    for (int c = 0; c < num_comp; ++c) log_pi(m, c) = theta.weight_logits(m, c) - lse;
  }

  constexpr double kLog2Pi = 1.8378770664093454836;
  ev.resp.resize(num_filters, num_comp);
  ev.precision = Vec::Zero(num_filters);
  ev.log_density = 0.0;
  std::vector<double> terms(num_comp);
  for (int m = 0; m < num_filters; ++m) {
    const double energy = ev.filter_out.col(m).squaredNorm();
    for (int c = 0; c < num_comp; ++c) {
      const double var = theta.component_vars(m, c);
      terms[c] = log_pi(m, c) - 0.5 * n * (kLog2Pi + std::log(var)) - 0.5 * energy / var;
      if (!std::isfinite(terms[c])) {
        std::ostringstream msg;
        msg << "non-finite mixture term at filter " << m << ", component " << c;
        throw std::runtime_error(msg.str());
      }
    }
    const double lse = log_sum_exp(terms);
    ev.log_density += lse;
    for (int c = 0; c < num_comp; ++c) {
      const double r = std::exp(terms[c] - lse);
      ev.resp(m, c) = r;
      ev.precision[m] += r / theta.component_vars(m, c);
    }
  }
  return ev;
}

}  // namespace

double log_unnorm_density(const PriorParams& theta, const Graph& g, const Vec& x) {
  return evaluate(theta, g, x).log_density;
}

Mat responsibilities(const PriorParams& theta, const Graph& g, const Vec& x) {
  return evaluate(theta, g, x).resp;
}

Vec grad_x_log_density(const PriorParams& theta, const Graph& g, const Vec& x) {
  const PriorEval ev = evaluate(theta, g, x);
  // d/dx of -|f_m(x)|^2 / (2 var), responsibility-averaged over components:
  // filters are symmetric polynomials of a symmetric operator, so the adjoint
  // equals a second application of the same filter.
  Vec grad = Vec::Zero(x.size());
  for (int m = 0; m < theta.num_filters(); ++m) {
    const FilterCoeffs f = theta.filter(m);
    grad.noalias() -= ev.precision[m] * chebyshev_apply(g, f, Vec(ev.filter_out.col(m)));
  }
  return grad;
}

PriorGrad grad_params_log_density(const PriorParams& theta, const Graph& g, const Vec& x) {
  const PriorEval ev = evaluate(theta, g, x);
  PriorGrad grad;
  // Filter output is linear in the coefficients: f_m = basis * coeffs_m, so
  // d(-|f_m|^2 / (2 var)) / d coeff_p = -(f_m . basis_p) / var.
  grad.coeffs = -(ev.basis.transpose() * ev.filter_out).transpose();
  grad.coeffs.array().colwise() *= ev.precision.array();
  grad.logits = ev.resp - theta.mixture_weights();
  return grad;
}

double PriorGrad::inf_norm() const {
  return std::max(coeffs.size() ? coeffs.cwiseAbs().maxCoeff() : 0.0,
                  logits.size() ? logits.cwiseAbs().maxCoeff() : 0.0);
}

PriorGrad& PriorGrad::operator+=(const PriorGrad& o) {
  coeffs += o.coeffs;
  logits += o.logits;
  return *this;
}

PriorGrad& PriorGrad::operator*=(double s) {
  coeffs *= s;
  logits *= s;
  return *this;
}

LangevinDivergence::LangevinDivergence(int step_, double norm_)
    : std::runtime_error("Langevin chain diverged at step " + std::to_string(step_) +
                         " (iterate norm " + std::to_string(norm_) + ")"),
      step(step_),
      norm(norm_) {}

Vec sample_prior_langevin(const PriorParams& theta, const Graph& g, const Vec& x_init, int steps,
                          double step_size, uint64_t seed) {
  if (steps < 1) throw std::invalid_argument("Langevin chain needs at least one step");
  if (step_size <= 0.0) throw std::invalid_argument("Langevin step size must be positive");
  if (x_init.size() != g.size()) throw std::invalid_argument("initial point does not match graph");

  constexpr double kDivergenceNorm = 1e6;
  Rng rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec x = x_init;
  const double half_step2 = 0.5 * step_size * step_size;
  for (int k = 0; k < steps; ++k) {
    Vec grad = grad_x_log_density(theta, g, x);
    for (int i = 0; i < x.size(); ++i) x[i] += half_step2 * grad[i] + step_size * gauss(rng);
    const double norm = x.norm();
    if (!(norm <= kDivergenceNorm)) throw LangevinDivergence(k + 1, norm);
  }
  return x;
}

}  // namespace gsr
