#include "gs1mc/loss.hpp"

#include "gs1mc/error.hpp"
#include "gs1mc/kernels.hpp"

namespace gs1mc {
namespace {

void check_shapes(const Matrix& M, const ObservationMasks& masks) {
  if (masks.Y1.rows() != M.rows() || masks.Y1.cols() != M.cols() ||
      masks.Yneg1.rows() != M.rows() || masks.Yneg1.cols() != M.cols())
    throw InvalidArgument("mask and latent matrix shapes differ");
}

void check_lambda(double lambda) {
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be nonnegative");
}

}  // namespace

ObservationMasks masks_from_observations(const BinaryRatings& ratings) {
  ObservationMasks m{Matrix::Zero(ratings.n1(), ratings.n2()),
                     Matrix::Zero(ratings.n1(), ratings.n2())};
  for (const auto& r : ratings.entries()) {
    if (r.y > 0) m.Y1(r.user, r.item) = 1.0;
    else m.Yneg1(r.user, r.item) = 1.0;
  }
  return m;
}

double loss_F(const Matrix& M, const ObservationMasks& masks) {
  check_shapes(M, masks);
  return kernels::active().masked_logistic(M.data(), masks.Y1.data(), masks.Yneg1.data(), nullptr,
                                           static_cast<std::size_t>(M.size()));
}

double ridge_norm(const FactorSet& f) {
  return f.P.squaredNorm() + f.SU.squaredNorm() + f.Q.squaredNorm() + f.TJ.squaredNorm();
}

double loss_L(const FactorSet& factors, const GroupAssignment& groups,
              const ObservationMasks& masks, double lambda) {
  check_lambda(lambda);
  return loss_F(assemble_M(factors, groups), masks) + lambda * ridge_norm(factors);
}

Matrix grad_M(const Matrix& M, const ObservationMasks& masks) {
  check_shapes(M, masks);
  Matrix G(M.rows(), M.cols());
  kernels::active().masked_logistic(M.data(), masks.Y1.data(), masks.Yneg1.data(), G.data(),
                                    static_cast<std::size_t>(M.size()));
  return G;
}

Matrix sum_rows_by_group(const Matrix& rows, std::span<const int> groups, int m) {
  if (static_cast<Eigen::Index>(groups.size()) != rows.rows())
    throw InvalidArgument("group vector length differs from row count");
  Matrix out = Matrix::Zero(m, rows.cols());
  for (std::size_t r = 0; r < groups.size(); ++r) {
    if (groups[r] < 0 || groups[r] >= m) throw InvalidArgument("group index out of range");
    out.row(groups[r]) += rows.row(static_cast<Eigen::Index>(r));
  }
  return out;
}

GradientSet grad_all(const FactorSet& factors, const GroupAssignment& groups,
                     const ObservationMasks& masks, double lambda) {
  check_lambda(lambda);
  const Matrix A = user_embedding(factors, groups);
  const Matrix B = item_embedding(factors, groups);
  const Matrix G = grad_M(A * B.transpose(), masks);
  const Matrix dA = G * B;
  const Matrix dB = G.transpose() * A;
  return {dA + 2.0 * lambda * factors.P, dB + 2.0 * lambda * factors.Q,
          sum_rows_by_group(dA, groups.user_group(), groups.m1()) + 2.0 * lambda * factors.SU,
          sum_rows_by_group(dB, groups.item_group(), groups.m2()) + 2.0 * lambda * factors.TJ};
}

ObservedObjective::ObservedObjective(const BinaryRatings& ratings)
    : n1_(ratings.n1()), n2_(ratings.n2()) {
  const auto n = ratings.size();
  users_.reserve(n);
  items_.reserve(n);
  pos_.reserve(n);
  neg_.reserve(n);
  for (const auto& r : ratings.entries()) {
    users_.push_back(r.user);
    items_.push_back(r.item);
    pos_.push_back(r.y > 0 ? 1.0 : 0.0);
    neg_.push_back(r.y > 0 ? 0.0 : 1.0);
  }
}

double ObservedObjective::data_loss(const RowMatrix& A, const RowMatrix& B,
                                    std::vector<double>* coef) const {
  if (A.rows() != n1_ || B.rows() != n2_ || A.cols() != B.cols())
    throw InvalidArgument("embedding shapes do not match the observed matrix");
  const auto& k = kernels::active();
  const auto K = static_cast<std::size_t>(A.cols());
  const std::size_t n = users_.size();
  std::vector<double> m(n);
  for (std::size_t e = 0; e < n; ++e)
    m[e] = k.dot(A.data() + users_[e] * K, B.data() + items_[e] * K, K);
  double* g = nullptr;
  if (coef) {
    coef->resize(n);
    g = coef->data();
  }
  return k.masked_logistic(m.data(), pos_.data(), neg_.data(), g, n);
}

RowMatrix ObservedObjective::scatter_user(const std::vector<double>& coef,
                                          const RowMatrix& B) const {
  const auto& k = kernels::active();
  const auto K = static_cast<std::size_t>(B.cols());
  RowMatrix dA = RowMatrix::Zero(n1_, B.cols());
  for (std::size_t e = 0; e < users_.size(); ++e)
    k.axpy(coef[e], B.data() + items_[e] * K, dA.data() + users_[e] * K, K);
  return dA;
}

RowMatrix ObservedObjective::scatter_item(const std::vector<double>& coef,
                                          const RowMatrix& A) const {
  const auto& k = kernels::active();
  const auto K = static_cast<std::size_t>(A.cols());
  RowMatrix dB = RowMatrix::Zero(n2_, A.cols());
  for (std::size_t e = 0; e < items_.size(); ++e)
    k.axpy(coef[e], A.data() + users_[e] * K, dB.data() + items_[e] * K, K);
  return dB;
}

double ObservedObjective::loss(const FactorSet& factors, const GroupAssignment& groups,
                               double lambda) const {
  check_lambda(lambda);
  const RowMatrix A = user_embedding(factors, groups);
  const RowMatrix B = item_embedding(factors, groups);
  return data_loss(A, B, nullptr) + lambda * ridge_norm(factors);
}

GradientSet ObservedObjective::gradient(const FactorSet& factors, const GroupAssignment& groups,
                                        double lambda, double* loss_out) const {
  check_lambda(lambda);
  const RowMatrix A = user_embedding(factors, groups);
  const RowMatrix B = item_embedding(factors, groups);
  std::vector<double> coef;
  const double F = data_loss(A, B, &coef);
  if (loss_out) *loss_out = F + lambda * ridge_norm(factors);
  const Matrix dA = scatter_user(coef, B);
  const Matrix dB = scatter_item(coef, A);
  return {dA + 2.0 * lambda * factors.P, dB + 2.0 * lambda * factors.Q,
          sum_rows_by_group(dA, groups.user_group(), groups.m1()) + 2.0 * lambda * factors.SU,
          sum_rows_by_group(dB, groups.item_group(), groups.m2()) + 2.0 * lambda * factors.TJ};
}

}  // namespace gs1mc
