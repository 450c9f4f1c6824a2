#include <algorithm>
#include <cmath>

#include "gs1mc/error.hpp"
#include "gs1mc/rng.hpp"
#include "gs1mc/subspace.hpp"

namespace gs1mc {
namespace {

// Orthogonalizes the columns of Z against basis(:, 0:used) and among themselves
// (two passes of block Gram-Schmidt, then column by column). Columns that
// collapse relative to their input norm are replaced by fresh random directions.
Matrix orthonormal_extension(const Matrix& basis, Eigen::Index used, Matrix Z, Rng& rng) {
  std::normal_distribution<double> normal;
  const auto n = Z.rows();
  for (Eigen::Index j = 0; j < Z.cols(); ++j) {
    const double nrm = Z.col(j).norm();
    if (nrm > 0.0) Z.col(j) /= nrm;
  }
  for (int pass = 0; pass < 2; ++pass) {
    if (used > 0) Z -= basis.leftCols(used) * (basis.leftCols(used).transpose() * Z);
  }
  for (Eigen::Index j = 0; j < Z.cols(); ++j) {
    for (int tries = 0; tries < 3; ++tries) {
      if (used > 0) Z.col(j) -= basis.leftCols(used) * (basis.leftCols(used).transpose() * Z.col(j));
      for (Eigen::Index l = 0; l < j; ++l) Z.col(j) -= Z.col(l).dot(Z.col(j)) * Z.col(l);
      const double nrm = Z.col(j).norm();
      if (nrm > 1e-8) {
        Z.col(j) /= nrm;
        break;
      }
      for (Eigen::Index r = 0; r < n; ++r) Z(r, j) = normal(rng);
      Z.col(j).normalize();
    }
  }
  return Z;
}

}  // namespace

PartialEigen top_eigenpairs_psd(const Matrix& A, int k, std::uint64_t seed, double tol,
                                int max_basis) {
  const auto n = A.rows();
  if (A.cols() != n) throw InvalidArgument("eigen solver needs a square matrix");
  if (k < 1 || k > n) throw InvalidArgument("requested eigenpair count out of range");

  const Eigen::Index block = std::min<Eigen::Index>(n, k + 8);
  const Eigen::Index cap = max_basis > 0 ? std::min<Eigen::Index>(n, max_basis)
                                         : std::min<Eigen::Index>(n, std::max<Eigen::Index>(30 * block, 200));
  Rng rng = make_rng(seed, 0);
  std::normal_distribution<double> normal;

  Matrix V(n, cap);
  Matrix AV(n, cap);
  Matrix T = Matrix::Zero(cap, cap);
  Matrix start(n, block);
  for (Eigen::Index e = 0; e < start.size(); ++e) start.data()[e] = normal(rng);

  Eigen::Index used = 0;
  Matrix next = std::move(start);
  const double scale = std::max(1.0, A.cwiseAbs().rowwise().sum().maxCoeff());
  PartialEigen out;
  int blocks = 0;
  while (used < cap) {
    const Eigen::Index add = std::min<Eigen::Index>(next.cols(), cap - used);
    Matrix Q = orthonormal_extension(V, used, next.leftCols(add), rng);
    V.middleCols(used, add) = Q;
    AV.middleCols(used, add).noalias() = A * Q;
    T.block(0, used, used + add, add).noalias() =
        V.leftCols(used + add).transpose() * AV.middleCols(used, add);
    T.block(used, 0, add, used) = T.block(0, used, used, add).transpose();
    used += add;
    ++blocks;
    next = AV.middleCols(used - add, add);
    if (used < n && used < cap && (used < k || blocks % 2 == 1)) continue;

    // Rayleigh-Ritz on the current basis.
    const Matrix Tu = T.topLeftCorner(used, used);
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (Tu + Tu.transpose()));
    const Matrix Y = es.eigenvectors().rightCols(k).rowwise().reverse();
    const Vector theta = es.eigenvalues().tail(k).reverse();
    const Matrix X = V.leftCols(used) * Y;
    const Matrix R = AV.leftCols(used) * Y - X * theta.asDiagonal();
    const double worst = R.colwise().norm().maxCoeff();

    out.values = theta;
    out.vectors = X;
    out.basis_size = static_cast<int>(used);
    if (worst <= tol * scale || used == n) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace gs1mc
