#include "gs1mc/model.hpp"

#include <cmath>
#include <string>
#include <unordered_set>

#include "gs1mc/error.hpp"
#include "gs1mc/kernels.hpp"

namespace gs1mc {
namespace {

void check_assignment(const std::vector<int>& groups, int m, const char* side) {
  if (m < 1) throw InvalidArgument(std::string(side) + " group count must be positive");
  for (std::size_t k = 0; k < groups.size(); ++k) {
    if (groups[k] < 0 || groups[k] >= m)
      throw InvalidArgument(std::string(side) + " " + std::to_string(k + 1) + " has group " +
                            std::to_string(groups[k] + 1) + " outside [1, " + std::to_string(m) +
                            "]");
  }
}

Matrix indicator(std::span<const int> groups, int m) {
  Matrix I = Matrix::Zero(m, static_cast<Eigen::Index>(groups.size()));
  for (std::size_t k = 0; k < groups.size(); ++k) I(groups[k], static_cast<Eigen::Index>(k)) = 1.0;
  return I;
}

}  // namespace

void FactorSet::validate() const {
  const auto K = P.cols();
  if (K < 1) throw InvalidArgument("factor set needs K >= 1");
  if (Q.cols() != K || SU.cols() != K || TJ.cols() != K)
    throw InvalidArgument("factor blocks disagree on K");
  if (!P.allFinite() || !Q.allFinite() || !SU.allFinite() || !TJ.allFinite())
    throw InvalidArgument("factor set has non-finite entries");
}

FactorSet FactorSet::zeros(Eigen::Index n1, Eigen::Index n2, Eigen::Index m1, Eigen::Index m2,
                           Eigen::Index K) {
  return {Matrix::Zero(n1, K), Matrix::Zero(n2, K), Matrix::Zero(m1, K), Matrix::Zero(m2, K)};
}

GroupAssignment::GroupAssignment(std::vector<int> user_group, std::vector<int> item_group, int m1,
                                 int m2)
    : user_group_(std::move(user_group)), item_group_(std::move(item_group)), m1_(m1), m2_(m2) {
  check_assignment(user_group_, m1_, "user");
  check_assignment(item_group_, m2_, "item");
}

GroupAssignment GroupAssignment::single(int n1, int n2) {
  return GroupAssignment(std::vector<int>(n1, 0), std::vector<int>(n2, 0), 1, 1);
}

Matrix GroupAssignment::user_indicator() const { return indicator(user_group_, m1_); }
Matrix GroupAssignment::item_indicator() const { return indicator(item_group_, m2_); }

BinaryRatings::BinaryRatings(int n1, int n2, std::vector<Rating> entries)
    : n1_(n1), n2_(n2), entries_(std::move(entries)) {
  if (n1_ < 1 || n2_ < 1) throw InvalidArgument("rating matrix dimensions must be positive");
  std::unordered_set<long long> seen;
  seen.reserve(entries_.size());
  for (const auto& r : entries_) {
    if (r.user < 0 || r.user >= n1_ || r.item < 0 || r.item >= n2_)
      throw InvalidArgument("rating (" + std::to_string(r.user + 1) + ", " +
                            std::to_string(r.item + 1) + ") out of range");
    if (r.y != 1 && r.y != -1) throw InvalidArgument("binary rating must be +1 or -1");
    if (!seen.insert(static_cast<long long>(r.user) * n2_ + r.item).second)
      throw InvalidArgument("duplicate rating (" + std::to_string(r.user + 1) + ", " +
                            std::to_string(r.item + 1) + ")");
  }
}

SignMatrix BinaryRatings::to_dense() const {
  SignMatrix Y = SignMatrix::Zero(n1_, n2_);
  for (const auto& r : entries_) Y(r.user, r.item) = static_cast<std::int8_t>(r.y);
  return Y;
}

double sigmoid(double z) {
  if (!std::isfinite(z)) throw InvalidArgument("sigmoid of a non-finite value");
  const double e = std::exp(-std::abs(z));
  return z >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
}

Matrix expand_rows(const Matrix& group_factors, std::span<const int> groups) {
  Matrix out(static_cast<Eigen::Index>(groups.size()), group_factors.cols());
  for (std::size_t r = 0; r < groups.size(); ++r) {
    if (groups[r] < 0 || groups[r] >= group_factors.rows())
      throw InvalidArgument("group index " + std::to_string(groups[r] + 1) + " out of range");
    out.row(static_cast<Eigen::Index>(r)) = group_factors.row(groups[r]);
  }
  return out;
}

Matrix expand_user_factors(const Matrix& SU, const GroupAssignment& groups) {
  if (SU.rows() != groups.m1()) throw InvalidArgument("S_U rows must equal m1");
  return expand_rows(SU, groups.user_group());
}

Matrix expand_item_factors(const Matrix& TJ, const GroupAssignment& groups) {
  if (TJ.rows() != groups.m2()) throw InvalidArgument("T_J rows must equal m2");
  return expand_rows(TJ, groups.item_group());
}

Matrix user_embedding(const FactorSet& f, const GroupAssignment& groups) {
  if (f.P.rows() != groups.n1()) throw InvalidArgument("P rows must equal n1");
  return f.P + expand_user_factors(f.SU, groups);
}

Matrix item_embedding(const FactorSet& f, const GroupAssignment& groups) {
  if (f.Q.rows() != groups.n2()) throw InvalidArgument("Q rows must equal n2");
  return f.Q + expand_item_factors(f.TJ, groups);
}

Matrix assemble_M(const FactorSet& factors, const GroupAssignment& groups) {
  if (factors.Q.cols() != factors.K() || factors.SU.cols() != factors.K() ||
      factors.TJ.cols() != factors.K())
    throw InvalidArgument("factor blocks disagree on K");
  return user_embedding(factors, groups) * item_embedding(factors, groups).transpose();
}

Matrix predict_probabilities(const Matrix& M) {
  if (!M.allFinite()) throw InvalidArgument("latent matrix has non-finite entries");
  Matrix out(M.rows(), M.cols());
  kernels::active().sigmoid(M.data(), out.data(), static_cast<std::size_t>(M.size()));
  return out;
}

SignMatrix binarize_predictions(const Matrix& probs, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw InvalidArgument("threshold must lie strictly between 0 and 1");
  return (probs.array() >= threshold).select(SignMatrix::Constant(probs.rows(), probs.cols(), 1),
                                             SignMatrix::Constant(probs.rows(), probs.cols(), -1));
}

}  // namespace gs1mc
