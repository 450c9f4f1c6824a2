#pragma once

// Sparse subspace clustering: l1 self-expression of data columns, the
// affinity graph |C| + |C'|, normalized spectral embedding and k-means.

#include <cstdint>
#include <vector>

#include "gs1mc/model.hpp"

namespace gs1mc {

struct ClusterLabels {
  std::vector<int> labels;  // 0-based cluster ids
  int k = 0;
  int empty_clusters = 0;   // clusters left without members (flagged, not an error)
};

struct SelfExpressionConfig {
  /// Data-fit weight. Zero selects alpha / min_i max_{j != i} |x_i' x_j|.
  double mu = 0.0;
  double alpha = 20.0;
  /// Convergence: largest coefficient change over a full sweep.
  double tol = 1e-7;
  int max_iters = 1000;
};

struct SelfExpression {
  Matrix C;                     // N x N, zero diagonal
  Vector residual_norms;        // |x_i - X c_i|
  std::vector<int> iterations;  // sweeps used per column
  std::vector<int> flagged;     // columns that hit max_iters
  double mu = 0.0;
};

/// Per column i: min_c |c|_1 + mu/2 |x_i - X c|^2 with c_i = 0.
/// Solved by cyclic coordinate soft-thresholding on the Gram matrix, with an
/// exact sign-fixed solve on the current support between sweeps; `warm`
/// (N x N, optional) seeds each column.
SelfExpression solve_self_expression(const Matrix& X, const SelfExpressionConfig& config,
                                     const Matrix* warm = nullptr);

/// Objective of one column's problem, for diagnostics and tests.
double self_expression_objective(const Matrix& X, Eigen::Index column, const Vector& c, double mu);

/// W = |C| + |C'|. With keep_top > 0 every column of |C| first keeps only its
/// keep_top largest entries.
Matrix build_affinity(const Matrix& C, int keep_top = 0);

struct LaplacianSpectrum {
  Vector values;   // ascending eigenvalues of I - D^-1/2 W D^-1/2
  Matrix vectors;  // N x k
};

struct SpectralConfig {
  /// Graphs up to this size use a dense eigendecomposition; larger ones a block Krylov solver.
  int dense_threshold = 512;
  int kmeans_restarts = 10;
  int kmeans_max_iters = 300;
  double eig_tol = 1e-9;
};

/// Symmetric normalized Laplacian; isolated vertices get D^-1/2 = 0.
Matrix normalized_laplacian(const Matrix& W);

/// The k smallest eigenpairs of the normalized Laplacian of W.
LaplacianSpectrum laplacian_eigenvectors(const Matrix& W, int k, std::uint64_t seed,
                                         const SpectralConfig& config = {});

ClusterLabels spectral_cluster(const Matrix& W, int k, std::uint64_t seed,
                               const SpectralConfig& config = {});

struct KMeansResult {
  ClusterLabels labels;
  Matrix centroids;                   // k x d
  std::vector<double> objective;      // within-cluster sum of squares after each Lloyd step
  int iterations = 0;
};

/// k-means++ seeding then Lloyd iterations on the rows of `points`. The best
/// of `restarts` runs (lowest objective) is returned.
KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iters = 300,
                    int restarts = 1);

/// Top-k eigenpairs (descending) of a symmetric positive semidefinite operator
/// given as a dense matrix, by block Krylov iteration with Rayleigh-Ritz.
struct PartialEigen {
  Vector values;
  Matrix vectors;
  int basis_size = 0;
  bool converged = false;
};
PartialEigen top_eigenpairs_psd(const Matrix& A, int k, std::uint64_t seed, double tol,
                                int max_basis = 0);

}  // namespace gs1mc
