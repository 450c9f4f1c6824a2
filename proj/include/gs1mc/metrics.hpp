#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gs1mc/model.hpp"

namespace gs1mc {

/// |M_est - M_true|_F^2 / |M_true|_F^2.
double relative_error(const Matrix& estimate, const Matrix& truth);

/// Fraction of the entries in eval_set (indices into truth.entries()) whose sign matches.
double accuracy(const SignMatrix& pred, const BinaryRatings& truth,
                std::span<const std::size_t> eval_set);
/// Same over every observed entry of truth.
double accuracy(const SignMatrix& pred, const BinaryRatings& truth);

/// Accuracy of thresholded f(M) on the observed entries of `test`, computing
/// only the entries that are needed.
double heldout_accuracy(const FactorSet& factors, const GroupAssignment& groups,
                        const BinaryRatings& test, double threshold = 0.5);

/// Counts n_ab for labelings A (rows) and B (columns) over compacted label ids.
struct ContingencyTable {
  std::vector<std::vector<long long>> counts;
  std::vector<long long> row_sums;
  std::vector<long long> col_sums;
  long long total = 0;
};

ContingencyTable contingency(std::span<const int> a, std::span<const int> b);

/// Entropy (nats) of a marginal count vector.
double entropy(std::span<const long long> marginal);
double mutual_information(const ContingencyTable& table);
/// E[MI] under the permutation model with the table's marginals fixed.
double expected_mutual_information(const ContingencyTable& table);

/// (MI - E[MI]) / (mean(H_A, H_B) - E[MI]). If the denominator vanishes the
/// result is 1 when the two labelings induce the same partition, else 0.
double adjusted_mutual_information(std::span<const int> a, std::span<const int> b);

}  // namespace gs1mc
