#include "gsr/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace gsr {

int Graph::edge_count() const {
  int count = 0;
  for (int i = 0; i < size(); ++i)
    for (int j = i + 1; j < size(); ++j)
      if (adjacency(i, j) != 0.0) ++count;
  return count;
}

static void validate_adjacency_or_throw(const Mat& w) {
  if (w.rows() != w.cols() || w.rows() < 2)
    throw std::invalid_argument("adjacency must be square with at least two nodes");
  if (!w.allFinite()) throw std::invalid_argument("adjacency contains non-finite weights");
  if (w.minCoeff() < 0.0) throw std::invalid_argument("adjacency weights must be nonnegative");
  for (int i = 0; i < w.rows(); ++i)
    if (w(i, i) != 0.0) throw std::invalid_argument("adjacency diagonal must be zero");
  const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
  if ((w - w.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("adjacency must be symmetric");
}

double largest_eigenvalue(const Mat& sym, double tol, int max_iter) {
  const int n = static_cast<int>(sym.rows());
  if (n < 1 || sym.rows() != sym.cols())
    throw std::invalid_argument("largest_eigenvalue needs a square matrix");
  const double scale = std::max(sym.cwiseAbs().maxCoeff(), 1e-300);

  // Deterministic start.  The all-ones direction is the natural choice, but it
  // is exactly the kernel of any Laplacian with zero row sums, so when the
  // iterate collapses we restart once from a fixed pseudo-random direction.
  Vec v = Vec::Ones(n) / std::sqrt(static_cast<double>(n));
  bool restarted = false;
  double est = 0.0;

  for (int it = 0; it < max_iter; ++it) {
    Vec w = sym * v;
    const double wn = w.norm();
    if (wn <= 1e-13 * scale) {
      if (restarted) return 0.0;  // matrix is (numerically) zero on all probes
      Rng rng = make_rng(0x9d2c5680u);
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (int i = 0; i < n; ++i) v[i] = gauss(rng);
      v.normalize();
      restarted = true;
      continue;
    }
    est = v.dot(w);  // Rayleigh quotient of the current unit iterate
    // For a symmetric matrix an eigenvalue lies within the residual norm of
    // the Rayleigh quotient, so the residual is a sound stopping rule (a
    // step-delta rule can stall below the true value on clustered spectra).
    // Returning est + residual keeps the estimate an upper bound, which the
    // spectrum rescaling downstream relies on.
    const double residual = (w - est * v).norm();
    v = w / wn;
    if (residual <= tol * std::max(std::abs(est), 1e-300)) return est + residual;
  }
  throw std::runtime_error("largest_eigenvalue: power iteration did not converge (estimate " +
                           std::to_string(est) + ")");
}

Graph graph_from_adjacency(std::vector<Eigen::Vector2d> coords, Mat adjacency,
                           bool normalize_trace) {
  validate_adjacency_or_throw(adjacency);
  const int n = static_cast<int>(adjacency.rows());
  if (!coords.empty() && static_cast<int>(coords.size()) != n)
    throw std::invalid_argument("coordinate count does not match adjacency size");

  Graph g;
  g.coords = std::move(coords);
  g.adjacency = std::move(adjacency);
  g.trace_normalized = normalize_trace;

  if (g.edge_count() == 0)
    throw std::runtime_error("graph construction produced an empty graph (no edges)");

  Vec degree = g.adjacency.rowwise().sum();
  g.laplacian = Mat(degree.asDiagonal());
  g.laplacian -= g.adjacency;
  if (normalize_trace) {
    const double tr = g.laplacian.trace();
    if (tr <= 0.0) throw std::runtime_error("cannot trace-normalize a zero Laplacian");
    g.laplacian /= tr;
  }

  g.lambda_max = largest_eigenvalue(g.laplacian);
  if (g.lambda_max <= 0.0)
    throw std::runtime_error("Laplacian has non-positive spectral radius");

  g.scaled_laplacian = (2.0 / g.lambda_max) * g.laplacian;
  g.scaled_laplacian.diagonal().array() -= 1.0;
  g.scaled_laplacian_sparse = g.scaled_laplacian.sparseView();
  return g;
}

Graph build_rbf_graph(const std::vector<Eigen::Vector2d>& coords, double kernel_width,
                      double edge_threshold, bool normalize_trace) {
  const int n = static_cast<int>(coords.size());
  if (n < 2) throw std::invalid_argument("need at least two coordinates");
  if (kernel_width <= 0.0) throw std::invalid_argument("kernel width must be positive");

  Mat w = Mat::Zero(n, n);
  const double denom = 2.0 * kernel_width * kernel_width;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d2 = (coords[i] - coords[j]).squaredNorm();
      const double weight = std::exp(-d2 / denom);
      if (weight >= edge_threshold) {
        w(i, j) = weight;
        w(j, i) = weight;
      }
    }
  }
  if (w.maxCoeff() == 0.0)
    throw std::runtime_error(
        "graph construction produced an empty graph: no pair reached the edge threshold");
  return graph_from_adjacency(coords, std::move(w), normalize_trace);
}

Vec chebyshev_apply(const SpMat& scaled_laplacian, const FilterCoeffs& filter, const Vec& x) {
  const int order = filter.order();
  if (order < 0) throw std::invalid_argument("filter needs at least one coefficient");
  if (!filter.coeff.allFinite()) throw std::invalid_argument("filter coefficients must be finite");
  if (scaled_laplacian.rows() != x.size())
    throw std::invalid_argument("signal length does not match operator size");

  Vec acc = filter.coeff[0] * x;
  if (order == 0) return acc;
  Vec t_prev = x;                    // T_0 x
  Vec t_curr = scaled_laplacian * x;  // T_1 x
  acc += filter.coeff[1] * t_curr;
  Vec t_next;
  for (int p = 2; p <= order; ++p) {
    t_next = 2.0 * (scaled_laplacian * t_curr) - t_prev;
    acc += filter.coeff[p] * t_next;
    t_prev.swap(t_curr);
    t_curr.swap(t_next);
  }
  return acc;
}

Vec chebyshev_apply(const Graph& g, const FilterCoeffs& filter, const Vec& x) {
  return chebyshev_apply(g.scaled_laplacian_sparse, filter, x);
}

Mat chebyshev_basis(const SpMat& scaled_laplacian, int order, const Vec& x) {
  if (order < 0) throw std::invalid_argument("polynomial order must be nonnegative");
  if (scaled_laplacian.rows() != x.size())
    throw std::invalid_argument("signal length does not match operator size");
  Mat basis(x.size(), order + 1);
  basis.col(0) = x;
  if (order >= 1) basis.col(1) = scaled_laplacian * x;
  for (int p = 2; p <= order; ++p)
    basis.col(p) = 2.0 * (scaled_laplacian * basis.col(p - 1)) - basis.col(p - 2);
  return basis;
}

Mat chebyshev_operator(const Mat& scaled_laplacian, const FilterCoeffs& filter) {
  const int order = filter.order();
  if (order < 0) throw std::invalid_argument("filter needs at least one coefficient");
  const int n = static_cast<int>(scaled_laplacian.rows());
  Mat acc = filter.coeff[0] * Mat::Identity(n, n);
  if (order == 0) return acc;
  Mat t_prev = Mat::Identity(n, n);
  Mat t_curr = scaled_laplacian;
  acc += filter.coeff[1] * t_curr;
  Mat t_next;
  for (int p = 2; p <= order; ++p) {
    t_next = 2.0 * (scaled_laplacian * t_curr) - t_prev;
    acc += filter.coeff[p] * t_next;
    t_prev.swap(t_curr);
    t_curr.swap(t_next);
  }
  return acc;
}

Mat chebyshev_operator(const Graph& g, const FilterCoeffs& filter) {
  return chebyshev_operator(g.scaled_laplacian, filter);
}

Graph induced_subgraph(const Graph& g, const std::vector<int>& nodes) {
  if (nodes.size() < 2) throw std::invalid_argument("induced subgraph needs at least two nodes");
  std::vector<int> sorted = nodes;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("induced subgraph nodes must be distinct");
  if (sorted.front() < 0 || sorted.back() >= g.size())
    throw std::invalid_argument("induced subgraph node index out of range");

  const int m = static_cast<int>(nodes.size());
  Mat w(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) w(a, b) = g.adjacency(nodes[a], nodes[b]);

  std::vector<Eigen::Vector2d> coords;
  if (!g.coords.empty()) {
    coords.reserve(nodes.size());
    for (int v : nodes) coords.push_back(g.coords[v]);
  }
  return graph_from_adjacency(std::move(coords), std::move(w), g.trace_normalized);
}

std::vector<int> bfs_order(const Graph& g, int start) {
  if (start < 0 || start >= g.size()) throw std::invalid_argument("BFS start out of range");
  std::vector<char> seen(g.size(), 0);
  std::deque<int> queue;
  std::vector<int> order;
  queue.push_back(start);
  seen[start] = 1;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    order.push_back(u);
    for (int v = 0; v < g.size(); ++v) {
      if (!seen[v] && g.adjacency(u, v) > 0.0) {
        seen[v] = 1;
        queue.push_back(v);
      }
    }
  }
  return order;
}

}  // namespace gsr
