#pragma once

// Factor model types for group-specific 1-bit matrix completion and the
// assembly of the latent matrix M = (P + I_U' S_U)(Q + I_J' T_J)'.

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

namespace gs1mc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SignMatrix = Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Latent factors: P (n1 x K), Q (n2 x K), user-group S_U (m1 x K), item-group T_J (m2 x K).
struct FactorSet {
  Matrix P;
  Matrix Q;
  Matrix SU;
  Matrix TJ;

  Eigen::Index K() const noexcept { return P.cols(); }

  /// Throws InvalidArgument unless all blocks share K and every entry is finite.
  void validate() const;

  static FactorSet zeros(Eigen::Index n1, Eigen::Index n2, Eigen::Index m1, Eigen::Index m2,
                         Eigen::Index K);

  bool operator==(const FactorSet&) const = default;
};

/// Hard assignment of every user to one of m1 groups and every item to one of m2.
/// Group ids are 0-based here; files carry 1-based ids.
class GroupAssignment {
 public:
  GroupAssignment() = default;
  GroupAssignment(std::vector<int> user_group, std::vector<int> item_group, int m1, int m2);

  /// Everybody in group 0 on both sides.
  static GroupAssignment single(int n1, int n2);

  int n1() const noexcept { return static_cast<int>(user_group_.size()); }
  int n2() const noexcept { return static_cast<int>(item_group_.size()); }
  int m1() const noexcept { return m1_; }
  int m2() const noexcept { return m2_; }
  std::span<const int> user_group() const noexcept { return user_group_; }
  std::span<const int> item_group() const noexcept { return item_group_; }

  /// I_U (m1 x n1) and I_J (m2 x n2): exactly one 1 per column.
  Matrix user_indicator() const;
  Matrix item_indicator() const;

  bool operator==(const GroupAssignment&) const = default;

 private:
  std::vector<int> user_group_;
  std::vector<int> item_group_;
  int m1_ = 0;
  int m2_ = 0;
};

struct Rating {
  int user;  // 0-based
  int item;  // 0-based
  int y;     // +1 or -1

  bool operator==(const Rating&) const = default;
};

/// Observed binary entries of an n1 x n2 matrix; (user, item) pairs are unique.
class BinaryRatings {
 public:
  BinaryRatings() = default;
  BinaryRatings(int n1, int n2, std::vector<Rating> entries);

  int n1() const noexcept { return n1_; }
  int n2() const noexcept { return n2_; }
  std::span<const Rating> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  /// Dense view: +1 / -1 on observed entries, 0 elsewhere.
  SignMatrix to_dense() const;

  bool operator==(const BinaryRatings&) const = default;

 private:
  int n1_ = 0;
  int n2_ = 0;
  std::vector<Rating> entries_;
};

/// 1 / (1 + exp(-z)), stable over the whole finite range. Throws on non-finite z.
double sigmoid(double z);

/// Row u of the result is row groups[u] of group_factors.
Matrix expand_rows(const Matrix& group_factors, std::span<const int> groups);

/// S = I_U' S_U (n1 x K).
Matrix expand_user_factors(const Matrix& SU, const GroupAssignment& groups);
/// T = I_J' T_J (n2 x K).
Matrix expand_item_factors(const Matrix& TJ, const GroupAssignment& groups);

/// P + S and Q + T: the per-user and per-item effective embeddings.
Matrix user_embedding(const FactorSet& factors, const GroupAssignment& groups);
Matrix item_embedding(const FactorSet& factors, const GroupAssignment& groups);

/// M_ui = (p_u + s_{v_u})' (q_i + t_{j_i}).
Matrix assemble_M(const FactorSet& factors, const GroupAssignment& groups);

/// Element-wise sigmoid. Throws on non-finite input.
Matrix predict_probabilities(const Matrix& M);

/// +1 where prob >= threshold (ties go to +1), -1 otherwise. threshold must lie in (0, 1).
SignMatrix binarize_predictions(const Matrix& probs, double threshold = 0.5);

}  // namespace gs1mc
