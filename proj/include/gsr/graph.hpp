#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <stdexcept>
#include <vector>

#include "gsr/common.hpp"

namespace gsr {

using SpMat = Eigen::SparseMatrix<double>;

// Chebyshev coefficients of one graph filter; coeff(p) multiplies the p-th
// Chebyshev polynomial of the rescaled Laplacian.
struct FilterCoeffs {
  Vec coeff;
  int order() const { return static_cast<int>(coeff.size()) - 1; }
};

// Undirected weighted graph together with the precomputed operators every
// downstream module needs: combinatorial Laplacian and its rescaled version
// whose spectrum lies in [-1, 1].
struct Graph {
  std::vector<Eigen::Vector2d> coords;  // may be empty for synthetic tests
  Mat adjacency;                        // symmetric, zero diagonal, nonnegative
  Mat laplacian;                        // degree - adjacency, optionally trace-normalized
  Mat scaled_laplacian;                 // (2 / lambda_max) * laplacian - I
  SpMat scaled_laplacian_sparse;        // same operator, sparse storage for filtering
  double lambda_max = 0.0;
  bool trace_normalized = false;

  int size() const { return static_cast<int>(adjacency.rows()); }
  int edge_count() const;
};

// Builds a graph from an adjacency matrix: validates it, forms the Laplacian
// (optionally normalized to unit trace), estimates lambda_max by power
// iteration and assembles the rescaled operator.  `coords` may be empty.
Graph graph_from_adjacency(std::vector<Eigen::Vector2d> coords, Mat adjacency,
                           bool normalize_trace);

// Gaussian-kernel graph on point coordinates: w_ij = exp(-d_ij^2 / (2 s^2))
// for distinct i, j, kept only when the weight reaches `edge_threshold`.
Graph build_rbf_graph(const std::vector<Eigen::Vector2d>& coords, double kernel_width,
                      double edge_threshold, bool normalize_trace);

// Largest eigenvalue of a symmetric PSD matrix by power iteration with a
// deterministic start vector.  Throws std::runtime_error on non-convergence.
// The cap is sized for clustered top spectra (small induced subgraphs can have
// lambda_2/lambda_1 within 1e-4 of one, which needs ~2e5 matvecs at this tol).
double largest_eigenvalue(const Mat& sym, double tol = 1e-9, int max_iter = 300000);

// Applies the Chebyshev filter to a signal through the three-term recursion;
// never materializes the polynomial matrices.
Vec chebyshev_apply(const SpMat& scaled_laplacian, const FilterCoeffs& filter, const Vec& x);
Vec chebyshev_apply(const Graph& g, const FilterCoeffs& filter, const Vec& x);

// Matrix of the Chebyshev basis applied to a signal: column p holds the p-th
// polynomial of the rescaled Laplacian times x.  Shared by density/gradient
// code, exposed because tests probe it directly.
Mat chebyshev_basis(const SpMat& scaled_laplacian, int order, const Vec& x);

// Dense filter operator, needed by the posterior updates.
Mat chebyshev_operator(const Mat& scaled_laplacian, const FilterCoeffs& filter);
Mat chebyshev_operator(const Graph& g, const FilterCoeffs& filter);

// Vertex-induced subgraph on the given distinct nodes (at least two).  The
// Laplacian, lambda_max and the rescaled operator are recomputed from the
// induced adjacency, honoring the parent's trace-normalization choice.
Graph induced_subgraph(const Graph& g, const std::vector<int>& nodes);

// Breadth-first order of vertices reachable from `start`, neighbors visited
// in ascending index order.  Used to carve training patches.
std::vector<int> bfs_order(const Graph& g, int start);

}  // namespace gsr
