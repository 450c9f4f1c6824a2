#include "gs1mc/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gs1mc/error.hpp"
#include "gs1mc/kernels.hpp"
#include "gs1mc/rng.hpp"

namespace gs1mc {
namespace {

inline double soft_threshold(double z, double tau) {
  if (z > tau) return z - tau;
  if (z < -tau) return z + tau;
  return 0.0;
}

double auto_mu(const Matrix& G, double alpha) {
  const auto n = G.rows();
  double mu_z = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) best = std::max(best, std::abs(G(j, i)));
    mu_z = std::min(mu_z, best);
  }
  if (!(mu_z > 0.0))
    throw InvalidArgument("automatic self-expression penalty is undefined: some column is "
                          "orthogonal to all others; pass mu explicitly");
  return alpha / mu_z;
}

struct ColumnResult {
  int sweeps = 0;
  bool converged = false;
};

// Coordinate soft-thresholding for column i. c holds the warm start on entry.
// Gc tracks G * c.
ColumnResult solve_column(const Matrix& G, Eigen::Index i, double mu, double tol, int max_iters,
                          double* c, double* Gc) {
  const auto& k = kernels::active();
  const auto n = G.rows();
  const auto un = static_cast<std::size_t>(n);
  const double tau = 1.0 / mu;
  const double* b = G.col(i).data();
  c[i] = 0.0;

  std::fill(Gc, Gc + n, 0.0);
  for (Eigen::Index j = 0; j < n; ++j)
    if (c[j] != 0.0) k.axpy(c[j], G.col(j).data(), Gc, un);

  auto update = [&](Eigen::Index j) {
    const double g = G(j, j);
    if (j == i || g <= 0.0) {
      if (c[j] != 0.0) {
        k.axpy(-c[j], G.col(j).data(), Gc, un);
        c[j] = 0.0;
      }
      return 0.0;
    }
    const double z = b[j] - Gc[j] + g * c[j];
    const double next = soft_threshold(z, tau) / g;
    const double delta = next - c[j];
    if (delta != 0.0) {
      k.axpy(delta, G.col(j).data(), Gc, un);
      c[j] = next;
    }
    return std::abs(delta);
  };

  ColumnResult res;
  std::vector<Eigen::Index> active;
  while (res.sweeps < max_iters) {
    // Full sweep; also refreshes the active set.
    double change = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) change = std::max(change, update(j));
    ++res.sweeps;
    if (change < tol) {
      res.converged = true;
      break;
    }
    active.clear();
    for (Eigen::Index j = 0; j < n; ++j)
      if (c[j] != 0.0) active.push_back(j);
    // A few sweeps restricted to the active set to settle the support.
    for (int pass = 0; pass < 10 && res.sweeps < max_iters; ++pass) {
      double inner = 0.0;
      for (Eigen::Index j : active) inner = std::max(inner, update(j));
      ++res.sweeps;
      if (inner < tol) break;
    }
    // Coordinate descent crawls on near-collinear columns. Solve the
    // sign-fixed problem on the support exactly; when a coefficient would
    // change sign, stop at the crossing, drop it and retry.
    active.clear();
    for (Eigen::Index j = 0; j < n; ++j)
      if (c[j] != 0.0) active.push_back(j);
    while (!active.empty()) {
      const auto m = static_cast<Eigen::Index>(active.size());
      Matrix Gaa(m, m);
      Vector rhs(m);
      for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index q = 0; q < m; ++q) Gaa(a, q) = G(active[a], active[q]);
        rhs[a] = b[active[a]] - (c[active[a]] > 0.0 ? tau : -tau);
      }
      const Eigen::LDLT<Matrix> ldlt(Gaa);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) break;
      const Vector x = ldlt.solve(rhs);
      if (!x.allFinite()) break;
      double t = 1.0;
      Eigen::Index drop = -1;
      for (Eigen::Index a = 0; a < m; ++a) {
        const double ca = c[active[a]];
        if ((x[a] > 0.0) != (ca > 0.0) || x[a] == 0.0) {
          const double cross = ca / (ca - x[a]);
          if (cross < t) {
            t = cross;
            drop = a;
          }
        }
      }
      for (Eigen::Index a = 0; a < m; ++a) {
        const Eigen::Index j = active[a];
        const double next = a == drop ? 0.0 : c[j] + t * (x[a] - c[j]);
        k.axpy(next - c[j], G.col(j).data(), Gc, un);
        c[j] = next;
      }
      if (drop < 0) break;
      active.erase(active.begin() + drop);
    }
  }
  return res;
}

}  // namespace

SelfExpression solve_self_expression(const Matrix& X, const SelfExpressionConfig& config,
                                     const Matrix* warm) {
  const auto n = X.cols();
  if (n < 2) throw InvalidArgument("self-expression needs at least two columns");
  if (!X.allFinite()) throw InvalidArgument("self-expression data has non-finite entries");
  if (config.mu < 0.0 || !std::isfinite(config.mu))
    throw InvalidArgument("self-expression penalty mu must be positive");
  if (config.mu == 0.0 && !(config.alpha > 0.0))
    throw InvalidArgument("self-expression alpha must be positive");
  if (!(config.tol > 0.0) || config.max_iters < 1)
    throw InvalidArgument("self-expression tolerance and iteration budget must be positive");
  if (warm && (warm->rows() != n || warm->cols() != n))
    throw InvalidArgument("warm start has the wrong shape");

  const Matrix G = X.transpose() * X;
  SelfExpression out;
  out.mu = config.mu > 0.0 ? config.mu : auto_mu(G, config.alpha);
  out.C = warm ? *warm : Matrix::Zero(n, n);
  out.residual_norms.resize(n);
  out.iterations.assign(static_cast<std::size_t>(n), 0);
  std::vector<double> Gc(static_cast<std::size_t>(n));

  for (Eigen::Index i = 0; i < n; ++i) {
    double* c = out.C.col(i).data();
    const auto res = solve_column(G, i, out.mu, config.tol, config.max_iters, c, Gc.data());
    out.iterations[static_cast<std::size_t>(i)] = res.sweeps;
    if (!res.converged) out.flagged.push_back(static_cast<int>(i));
    const double bc = kernels::active().dot(G.col(i).data(), c, static_cast<std::size_t>(n));
    const double cGc = kernels::active().dot(Gc.data(), c, static_cast<std::size_t>(n));
    out.residual_norms[i] = std::sqrt(std::max(0.0, G(i, i) - 2.0 * bc + cGc));
  }
  return out;
}

double self_expression_objective(const Matrix& X, Eigen::Index column, const Vector& c, double mu) {
  return c.lpNorm<1>() + 0.5 * mu * (X.col(column) - X * c).squaredNorm();
}

Matrix build_affinity(const Matrix& C, int keep_top) {
  if (C.rows() != C.cols()) throw InvalidArgument("affinity needs a square coefficient matrix");
  Matrix A = C.cwiseAbs();
  A.diagonal().setZero();
  if (keep_top > 0 && keep_top < A.rows()) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(A.rows()));
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](Eigen::Index a, Eigen::Index b) { return A(a, j) > A(b, j); });
      for (std::size_t r = static_cast<std::size_t>(keep_top); r < order.size(); ++r)
        A(order[r], j) = 0.0;
    }
  }
  Matrix W = A + A.transpose();
  return W;
}

Matrix normalized_laplacian(const Matrix& W) {
  const auto n = W.rows();
  if (W.cols() != n) throw InvalidArgument("affinity must be square");
  Vector dinv(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = W.col(i).sum();
    dinv[i] = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
  }
  Matrix L = -(dinv.asDiagonal() * W * dinv.asDiagonal());
  L.diagonal().array() += 1.0;
  return L;
}

LaplacianSpectrum laplacian_eigenvectors(const Matrix& W, int k, std::uint64_t seed,
                                         const SpectralConfig& config) {
  const auto n = W.rows();
  if (k < 1 || k > n) throw InvalidArgument("cluster count must lie in [1, N]");
  if (!W.allFinite() || (W.array() < 0.0).any()) throw InvalidArgument("affinity must be nonnegative");
  const Matrix L = normalized_laplacian(W);
  LaplacianSpectrum out;
  if (n <= config.dense_threshold) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(L);
    out.values = es.eigenvalues().head(k);
    out.vectors = es.eigenvectors().leftCols(k);
    return out;
  }
  // Smallest eigenpairs of L are the largest of 2I - L, which is PSD.
  Matrix B = -L;
  B.diagonal().array() += 2.0;
  const PartialEigen pe = top_eigenpairs_psd(B, k, seed, config.eig_tol);
  out.values = (2.0 - pe.values.array()).matrix();
  out.vectors = pe.vectors;
  return out;
}

ClusterLabels spectral_cluster(const Matrix& W, int k, std::uint64_t seed,
                               const SpectralConfig& config) {
  const auto n = W.rows();
  if (k < 1 || k > n) throw InvalidArgument("cluster count must lie in [1, N]");
  if (k == 1) return {std::vector<int>(static_cast<std::size_t>(n), 0), 1, 0};
  LaplacianSpectrum spec = laplacian_eigenvectors(W, k, mix64(seed ^ 0x5bd1e995ULL), config);
  Matrix& U = spec.vectors;
  for (Eigen::Index r = 0; r < n; ++r) {
    const double nrm = U.row(r).norm();
    if (nrm > 0.0) U.row(r) /= nrm;
  }
  return kmeans(U, k, seed, config.kmeans_max_iters, config.kmeans_restarts).labels;
}

namespace {

double sqdist(const Matrix& points, Eigen::Index r, const Matrix& centers, Eigen::Index c) {
  return (points.row(r) - centers.row(c)).squaredNorm();
}

KMeansResult kmeans_once(const Matrix& X, int k, Rng& rng, int max_iters) {
  const auto n = X.rows();
  const auto d = X.cols();
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // k-means++ seeding.
  Matrix centers(k, d);
  std::vector<double> dist(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  Eigen::Index first = std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng);
  centers.row(0) = X.row(first);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
      dist[r] = std::min(dist[r], sqdist(X, r, centers, c - 1));
      total += dist[r];
    }
    Eigen::Index pick = n - 1;
    if (total > 0.0) {
      double u = unif(rng) * total;
      for (Eigen::Index r = 0; r < n; ++r) {
        u -= dist[r];
        if (u < 0.0 && dist[r] > 0.0) {
          pick = r;
          break;
        }
      }
      while (dist[pick] == 0.0 && pick > 0) --pick;
    } else {
      pick = std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng);
    }
    centers.row(c) = X.row(pick);
  }

  KMeansResult res;
  std::vector<int> label(static_cast<std::size_t>(n), -1);
  std::vector<double> own(static_cast<std::size_t>(n), 0.0);
  for (int it = 0; it < max_iters; ++it) {
    bool changed = false;
    for (Eigen::Index r = 0; r < n; ++r) {
      int best = 0;
      double bd = sqdist(X, r, centers, 0);
      for (int c = 1; c < k; ++c) {
        const double dd = sqdist(X, r, centers, c);
        if (dd < bd) {
          bd = dd;
          best = c;
        }
      }
      if (label[r] != best) changed = true;
      label[r] = best;
      own[r] = bd;
    }

    // Centroid update; empty clusters take the point farthest from its centroid.
    Matrix sums = Matrix::Zero(k, d);
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index r = 0; r < n; ++r) {
      sums.row(label[r]) += X.row(r);
      ++counts[label[r]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      Eigen::Index far = -1;
      double fd = 0.0;
      for (Eigen::Index r = 0; r < n; ++r) {
        if (own[r] > fd && counts[label[r]] > 1) {
          fd = own[r];
          far = r;
        }
      }
      if (far < 0) continue;  // every point sits on its centroid
      sums.row(label[far]) -= X.row(far);
      --counts[label[far]];
      label[far] = c;
      own[far] = 0.0;
      sums.row(c) = X.row(far);
      counts[c] = 1;
      changed = true;
    }
    for (int c = 0; c < k; ++c)
      if (counts[c] > 0) centers.row(c) = sums.row(c) / counts[c];

    double obj = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) obj += sqdist(X, r, centers, label[r]);
    res.objective.push_back(obj);
    res.iterations = it + 1;
    if (!changed) break;
  }

  res.labels.labels = std::move(label);
  res.labels.k = k;
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (int l : res.labels.labels) ++counts[l];
  res.labels.empty_clusters = static_cast<int>(std::count(counts.begin(), counts.end(), 0));
  res.centroids = std::move(centers);
  return res;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iters, int restarts) {
  if (k < 1) throw InvalidArgument("k-means needs k >= 1");
  if (k > points.rows()) throw InvalidArgument("k-means needs k <= number of points");
  if (max_iters < 1 || restarts < 1) throw InvalidArgument("k-means budgets must be positive");
  if (!points.allFinite()) throw InvalidArgument("k-means input has non-finite entries");
  Rng rng = make_rng(seed, streams::clustering);
  KMeansResult best;
  for (int r = 0; r < restarts; ++r) {
    KMeansResult run = kmeans_once(points, k, rng, max_iters);
    if (r == 0 || run.objective.back() < best.objective.back()) best = std::move(run);
  }
  return best;
}

}  // namespace gs1mc
