#pragma once

#include <vector>

#include "gsr/graph.hpp"

namespace gsr {

// Random sampling operator: `selected` lists the observed node indices in draw
// order, one per row of the implicit selection matrix.
struct SamplingMask {
  std::vector<int> selected;
  int total = 0;

  int observed() const { return static_cast<int>(selected.size()); }
  Vec apply(const Vec& full) const;   // y = Psi x
  Vec embed(const Vec& obs) const;    // Psi^T y
  Mat selection_matrix() const;       // dense Psi, for oracles and small solves
};

// Scalar Gaussian mixture used for the i.i.d. mixture test distribution.
struct ScalarMixture {
  Vec means;
  Vec variances;
  Vec weights;
  void validate() const;
};

ScalarMixture default_scalar_mixture();  // means {-3,-1,1,3}, variances 0.5, equal weights

struct NoisyObservation {
  Vec y;
  double noise_var = 0.0;       // variance used to scale the noise draw
  double realized_snr_db = 0.0;
};

// Smooth graph signals: x = U_w gamma with U_w the eigenvectors of the
// Laplacian belonging to the `bandwidth` smallest eigenvalues and gamma
// standard normal.
std::vector<Vec> gen_bandlimited_gmrf(const Graph& g, int bandwidth, int count, uint64_t seed);

// Length-n signals with i.i.d. coordinates drawn from the scalar mixture.
std::vector<Vec> gen_gmm_signal(const ScalarMixture& mix, int n, int count, uint64_t seed);

// Generalized Gamma marginals via the power transform x = scale * G^(1/power),
// G ~ Gamma(shape / power, 1); optionally symmetrized by a random sign.
std::vector<Vec> gen_ggd_signal(double shape, double power, double scale, int n, int count,
                                uint64_t seed, bool symmetrize = true);

// Uniform sampling of m distinct nodes out of n.
SamplingMask make_sampling_mask(int n, int m, uint64_t seed);

// Adds white Gaussian noise scaled so the expected SNR equals snr_db.
NoisyObservation add_noise_at_snr(const Vec& clean, double snr_db, uint64_t seed);

// Connected training patch: BFS ball around a random seed vertex together with
// the restriction of one of the signals to it.
struct Patch {
  Graph subgraph;
  std::vector<int> nodes;
  Vec values;
};

// Draws `count` patches of exactly `patch_size` nodes.  Seed vertices whose
// reachable set is too small are rejected and resampled; more than 100 * count
// rejections aborts with an error.
std::vector<Patch> extract_patches(const Graph& g, const std::vector<Vec>& signals,
                                   int patch_size, int count, uint64_t seed);

}  // namespace gsr
