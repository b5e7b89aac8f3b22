#include "gsr/signal_gen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gsr {

Vec SamplingMask::apply(const Vec& full) const {
  if (full.size() != total) throw std::invalid_argument("mask/signal size mismatch");
  Vec out(observed());
  for (int r = 0; r < observed(); ++r) out[r] = full[selected[r]];
  return out;
}

Vec SamplingMask::embed(const Vec& obs) const {
  if (obs.size() != observed()) throw std::invalid_argument("mask/observation size mismatch");
  Vec out = Vec::Zero(total);
  for (int r = 0; r < observed(); ++r) out[selected[r]] = obs[r];
  return out;
}

Mat SamplingMask::selection_matrix() const {
  Mat psi = Mat::Zero(observed(), total);
  for (int r = 0; r < observed(); ++r) psi(r, selected[r]) = 1.0;
  return psi;
}

void ScalarMixture::validate() const {
  const auto c = means.size();
  if (c < 1 || variances.size() != c || weights.size() != c)
    throw std::invalid_argument("mixture component arrays must be nonempty and equally sized");
  if (!means.allFinite() || !variances.allFinite() || !weights.allFinite())
    throw std::invalid_argument("mixture parameters must be finite");
  if (variances.minCoeff() <= 0.0) throw std::invalid_argument("mixture variances must be positive");
  if (weights.minCoeff() < 0.0) throw std::invalid_argument("mixture weights must be nonnegative");
  if (std::abs(weights.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("mixture weights must sum to one");
}

ScalarMixture default_scalar_mixture() {
  ScalarMixture mix;
  mix.means = Vec(4);
  mix.means << -3.0, -1.0, 1.0, 3.0;
  mix.variances = Vec::Constant(4, 0.5);
  mix.weights = Vec::Constant(4, 0.25);
  return mix;
}

std::vector<Vec> gen_bandlimited_gmrf(const Graph& g, int bandwidth, int count, uint64_t seed) {
  const int n = g.size();
  if (bandwidth < 1 || bandwidth > n)
    throw std::invalid_argument("bandwidth must lie in [1, graph size]");
  if (count < 0) throw std::invalid_argument("signal count must be nonnegative");

  Eigen::SelfAdjointEigenSolver<Mat> eig(g.laplacian);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("Laplacian eigendecomposition failed");
  Mat basis = eig.eigenvectors().leftCols(bandwidth);  // eigenvalues ascending

  Rng rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Vec> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    Vec gamma(bandwidth);
    for (int i = 0; i < bandwidth; ++i) gamma[i] = gauss(rng);
    out.push_back(basis * gamma);
  }
  return out;
}

// Inverse-CDF component choice keeps the draw sequence identical across
// platforms, unlike std::discrete_distribution.
static int pick_component(const Vec& weights, double u) {
  double acc = 0.0;
  for (int c = 0; c < weights.size(); ++c) {
    acc += weights[c];
    if (u < acc) return c;
  }
  return static_cast<int>(weights.size()) - 1;
}

std::vector<Vec> gen_gmm_signal(const ScalarMixture& mix, int n, int count, uint64_t seed) {
  mix.validate();
  if (n < 1) throw std::invalid_argument("signal length must be positive");
  if (count < 0) throw std::invalid_argument("signal count must be nonnegative");

  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Vec> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    Vec x(n);
    for (int i = 0; i < n; ++i) {
      const int c = pick_component(mix.weights, unif(rng));
      x[i] = mix.means[c] + std::sqrt(mix.variances[c]) * gauss(rng);
    }
    out.push_back(std::move(x));
  }
  return out;
}

std::vector<Vec> gen_ggd_signal(double shape, double power, double scale, int n, int count,
                                uint64_t seed, bool symmetrize) {
  if (shape <= 0.0 || power <= 0.0 || scale <= 0.0)
    throw std::invalid_argument("generalized Gamma parameters must be positive");
  if (n < 1) throw std::invalid_argument("signal length must be positive");
  if (count < 0) throw std::invalid_argument("signal count must be nonnegative");

  Rng rng = make_rng(seed);
  std::gamma_distribution<double> gamma(shape / power, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Vec> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    Vec x(n);
    for (int i = 0; i < n; ++i) {
      double v = scale * std::pow(gamma(rng), 1.0 / power);
      if (symmetrize && unif(rng) < 0.5) v = -v;
      x[i] = v;
    }
    out.push_back(std::move(x));
  }
  return out;
}

SamplingMask make_sampling_mask(int n, int m, uint64_t seed) {
  if (n < 1) throw std::invalid_argument("mask needs a positive node count");
  if (m < 1 || m > n) throw std::invalid_argument("observed count must lie in [1, n]");

  // Partial Fisher-Yates: the first m entries are a uniform m-subset.
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng = make_rng(seed);
  for (int i = 0; i < m; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(perm[i], perm[pick(rng)]);
  }
  SamplingMask mask;
  mask.total = n;
  mask.selected.assign(perm.begin(), perm.begin() + m);
  return mask;
}

NoisyObservation add_noise_at_snr(const Vec& clean, double snr_db, uint64_t seed) {
  const double signal_power = clean.squaredNorm();
  if (clean.size() == 0 || signal_power == 0.0)
    throw std::invalid_argument("cannot set an SNR for an all-zero signal");

  const double noise_var =
      (signal_power / static_cast<double>(clean.size())) * std::pow(10.0, -snr_db / 10.0);
  Rng rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec noise(clean.size());
  for (int i = 0; i < clean.size(); ++i) noise[i] = std::sqrt(noise_var) * gauss(rng);

  NoisyObservation obs;
  obs.y = clean + noise;
  obs.noise_var = noise_var;
  const double noise_power = noise.squaredNorm();
  obs.realized_snr_db = noise_power > 0.0
                            ? 10.0 * std::log10(signal_power / noise_power)
                            : std::numeric_limits<double>::infinity();
  return obs;
}

std::vector<Patch> extract_patches(const Graph& g, const std::vector<Vec>& signals,
                                   int patch_size, int count, uint64_t seed) {
  if (patch_size < 2 || patch_size > g.size())
    throw std::invalid_argument("patch size must lie in [2, graph size]");
  if (count < 0) throw std::invalid_argument("patch count must be nonnegative");
  if (signals.empty()) throw std::invalid_argument("need at least one signal to patch");
  for (const Vec& s : signals)
    if (s.size() != g.size()) throw std::invalid_argument("signal length does not match graph");

  Rng rng = make_rng(seed);
  std::uniform_int_distribution<int> pick_signal(0, static_cast<int>(signals.size()) - 1);
  std::uniform_int_distribution<int> pick_vertex(0, g.size() - 1);

  std::vector<Patch> patches;
  patches.reserve(count);
  long rejections = 0;
  const long reject_cap = 100L * std::max(count, 1);
  while (static_cast<int>(patches.size()) < count) {
    const int sig = pick_signal(rng);
    const int root = pick_vertex(rng);
    std::vector<int> order = bfs_order(g, root);
    if (static_cast<int>(order.size()) < patch_size) {
      if (++rejections > reject_cap)
        throw std::runtime_error("patch extraction stalled: reachable sets smaller than patch size");
      continue;
    }
    Patch p;
    p.nodes.assign(order.begin(), order.begin() + patch_size);
    p.subgraph = induced_subgraph(g, p.nodes);
    p.values.resize(patch_size);
    for (int i = 0; i < patch_size; ++i) p.values[i] = signals[sig][p.nodes[i]];
    patches.push_back(std::move(p));
  }
  return patches;
}

}  // namespace gsr
