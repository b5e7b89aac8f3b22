#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <cstring>
#include <random>
#include <string>
#include <vector>

namespace gsr {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// ---- seed derivation -------------------------------------------------------
//
// Every randomized routine takes an explicit 64-bit seed and derives private
// streams from it.  Child seeds are produced by hashing the parent seed with a
// path of indices, so sub-tasks (trials, chains, patches) get decorrelated
// streams and results never depend on evaluation order.

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t base, uint64_t key) {
  return splitmix64(splitmix64(base) ^ splitmix64(key + 0x632be59bd9b4e019ULL));
}

inline uint64_t derive_seed(uint64_t base, uint64_t k1, uint64_t k2) {
  return derive_seed(derive_seed(base, k1), k2);
}

inline uint64_t derive_seed(uint64_t base, uint64_t k1, uint64_t k2, uint64_t k3) {
  return derive_seed(derive_seed(base, k1, k2), k3);
}

using Rng = std::mt19937_64;

inline Rng make_rng(uint64_t seed) { return Rng(splitmix64(seed ^ 0x51409ce38b9b3a17ULL)); }

// ---- hashing ---------------------------------------------------------------

// FNV-1a over raw bytes; used to fingerprint per-trial realizations so paired
// method comparisons can prove they consumed identical inputs.
inline uint64_t fnv1a(const void* data, size_t len, uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t fnv1a(const Vec& v, uint64_t h = 0xcbf29ce484222325ULL) {
  return fnv1a(v.data(), sizeof(double) * static_cast<size_t>(v.size()), h);
}

inline uint64_t fnv1a(const std::vector<int>& v, uint64_t h = 0xcbf29ce484222325ULL) {
  return fnv1a(v.data(), sizeof(int) * v.size(), h);
}

// ---- numeric helpers -------------------------------------------------------

inline double log_sum_exp(const std::vector<double>& terms) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double t : terms) hi = std::max(hi, t);
  if (!std::isfinite(hi)) return hi;  // all -inf (or a NaN slipped through)
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - hi);
  return hi + std::log(acc);
}

// Normalizes a matrix of log-weights over all entries; invariant under adding
// a constant to every entry.
Mat softmax_over_all(const Mat& log_weights);

// Row-wise softmax (each row normalized independently).
Mat softmax_rows(const Mat& logits);

}  // namespace gsr
