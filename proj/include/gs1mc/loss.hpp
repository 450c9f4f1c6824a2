#pragma once

// Masked logistic loss F, the ridge-regularized objective L and their gradients.
//
// Two evaluation routes exist. The dense route works on full n1 x n2 mask
// matrices Y1 / Y-1 and is what the formulas read like; the observed route
// touches only entries of Omega and is what the trainers use. Both share the
// same element kernel.

#include <span>
#include <vector>

#include "gs1mc/model.hpp"

namespace gs1mc {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Y1 marks observed +1 entries, Yneg1 observed -1 entries. Disjoint.
struct ObservationMasks {
  Matrix Y1;
  Matrix Yneg1;
};

struct GradientSet {
  Matrix dP;
  Matrix dQ;
  Matrix dSU;
  Matrix dTJ;
};

ObservationMasks masks_from_observations(const BinaryRatings& ratings);

/// F = -sum [Y1 o log f(M) + Y-1 o log(1 - f(M))], evaluated through softplus.
double loss_F(const Matrix& M, const ObservationMasks& masks);

/// L = F(M(factors)) + lambda * (|P|^2 + |S_U|^2 + |Q|^2 + |T_J|^2).
double loss_L(const FactorSet& factors, const GroupAssignment& groups,
              const ObservationMasks& masks, double lambda);

/// dF/dM = Y1 o (f(M) - 1) + Y-1 o f(M).
Matrix grad_M(const Matrix& M, const ObservationMasks& masks);

/// Gradients of L for all four blocks. Group blocks are row sums of the
/// per-entity gradient over group members, plus the ridge term.
GradientSet grad_all(const FactorSet& factors, const GroupAssignment& groups,
                     const ObservationMasks& masks, double lambda);

/// I x rows: row g of the result is the sum of rows r with groups[r] == g.
Matrix sum_rows_by_group(const Matrix& rows, std::span<const int> groups, int m);

/// sum of squared Frobenius norms of the four blocks.
double ridge_norm(const FactorSet& factors);

/// Loss over the observed set only. Immutable after construction.
class ObservedObjective {
 public:
  explicit ObservedObjective(const BinaryRatings& ratings);

  int n1() const noexcept { return n1_; }
  int n2() const noexcept { return n2_; }
  std::size_t size() const noexcept { return users_.size(); }
  std::span<const int> users() const noexcept { return users_; }
  std::span<const int> items() const noexcept { return items_; }

  /// F given user embeddings A = P + S and item embeddings B = Q + T (row-major, n x K).
  /// When coef is non-null it receives dF/dM at each observed entry, in entry order.
  double data_loss(const RowMatrix& A, const RowMatrix& B, std::vector<double>* coef) const;

  /// dF/dA (n1 x K) and dF/dB (n2 x K) from per-entry coefficients.
  RowMatrix scatter_user(const std::vector<double>& coef, const RowMatrix& B) const;
  RowMatrix scatter_item(const std::vector<double>& coef, const RowMatrix& A) const;

  double loss(const FactorSet& factors, const GroupAssignment& groups, double lambda) const;
  GradientSet gradient(const FactorSet& factors, const GroupAssignment& groups, double lambda,
                       double* loss_out = nullptr) const;

 private:
  int n1_ = 0;
  int n2_ = 0;
  std::vector<int> users_;
  std::vector<int> items_;
  std::vector<double> pos_;
  std::vector<double> neg_;
};

}  // namespace gs1mc
