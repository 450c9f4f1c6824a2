#include "gs1mc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "gs1mc/error.hpp"
#include "gs1mc/kernels.hpp"
#include "gs1mc/loss.hpp"

namespace gs1mc {
namespace {

std::vector<int> compact(std::span<const int> labels, int* count) {
  std::map<int, int> ids;
  std::vector<int> out(labels.size());
  for (std::size_t k = 0; k < labels.size(); ++k) {
    auto [it, inserted] = ids.try_emplace(labels[k], static_cast<int>(ids.size()));
    out[k] = it->second;
  }
  *count = static_cast<int>(ids.size());
  return out;
}

bool same_partition(std::span<const int> a, std::span<const int> b) {
  int ka = 0, kb = 0;
  const auto ca = compact(a, &ka);
  const auto cb = compact(b, &kb);
  return ka == kb && ca == cb;
}

}  // namespace

double relative_error(const Matrix& estimate, const Matrix& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
    throw InvalidArgument("relative error needs matrices of the same shape");
  const double denom = truth.squaredNorm();
  if (!(denom > 0.0)) throw InvalidArgument("relative error against an all-zero ground truth");
  return (estimate - truth).squaredNorm() / denom;
}

double accuracy(const SignMatrix& pred, const BinaryRatings& truth,
                std::span<const std::size_t> eval_set) {
  if (eval_set.empty()) throw InvalidArgument("accuracy over an empty evaluation set");
  if (pred.rows() != truth.n1() || pred.cols() != truth.n2())
    throw InvalidArgument("prediction shape differs from the rating matrix");
  const auto entries = truth.entries();
  std::size_t hits = 0;
  for (std::size_t idx : eval_set) {
    if (idx >= entries.size()) throw InvalidArgument("evaluation index outside the observed set");
    const auto& r = entries[idx];
    if (pred(r.user, r.item) == r.y) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(eval_set.size());
}

double accuracy(const SignMatrix& pred, const BinaryRatings& truth) {
  std::vector<std::size_t> all(truth.size());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
  return accuracy(pred, truth, all);
}

double heldout_accuracy(const FactorSet& factors, const GroupAssignment& groups,
                        const BinaryRatings& test, double threshold) {
  if (test.empty()) throw InvalidArgument("accuracy over an empty evaluation set");
  if (!(threshold > 0.0 && threshold < 1.0))
    throw InvalidArgument("threshold must lie strictly between 0 and 1");
  const RowMatrix A = user_embedding(factors, groups);
  const RowMatrix B = item_embedding(factors, groups);
  const auto K = static_cast<std::size_t>(A.cols());
  const auto& k = kernels::active();
  std::size_t hits = 0;
  for (const auto& r : test.entries()) {
    const double m = k.dot(A.data() + r.user * K, B.data() + r.item * K, K);
    const int sign = sigmoid(m) >= threshold ? 1 : -1;
    if (sign == r.y) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(test.size());
}

ContingencyTable contingency(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw InvalidArgument("label vectors differ in length");
  int ka = 0, kb = 0;
  const auto ca = compact(a, &ka);
  const auto cb = compact(b, &kb);
  ContingencyTable t;
  t.counts.assign(static_cast<std::size_t>(ka), std::vector<long long>(static_cast<std::size_t>(kb), 0));
  t.row_sums.assign(static_cast<std::size_t>(ka), 0);
  t.col_sums.assign(static_cast<std::size_t>(kb), 0);
  for (std::size_t k = 0; k < ca.size(); ++k) {
    ++t.counts[ca[k]][cb[k]];
    ++t.row_sums[ca[k]];
    ++t.col_sums[cb[k]];
  }
  t.total = static_cast<long long>(a.size());
  return t;
}

double entropy(std::span<const long long> marginal) {
  long long n = 0;
  for (auto c : marginal) n += c;
  if (n == 0) return 0.0;
  double h = 0.0;
  for (auto c : marginal) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(n);
    h -= p * std::log(p);
  }
  return h;
}

double mutual_information(const ContingencyTable& t) {
  const double N = static_cast<double>(t.total);
  double mi = 0.0;
  for (std::size_t i = 0; i < t.row_sums.size(); ++i)
    for (std::size_t j = 0; j < t.col_sums.size(); ++j) {
      const auto n = t.counts[i][j];
      if (n == 0) continue;
      const double nij = static_cast<double>(n);
      mi += nij / N *
            std::log(N * nij / (static_cast<double>(t.row_sums[i]) * static_cast<double>(t.col_sums[j])));
    }
  return mi;
}

double expected_mutual_information(const ContingencyTable& t) {
  const long long N = t.total;
  const double Nd = static_cast<double>(N);
  const double lgN = std::lgamma(Nd + 1.0);
  double emi = 0.0;
  for (long long a : t.row_sums) {
    for (long long b : t.col_sums) {
      const double ad = static_cast<double>(a), bd = static_cast<double>(b);
      const double fixed = std::lgamma(ad + 1.0) + std::lgamma(bd + 1.0) +
                           std::lgamma(Nd - ad + 1.0) + std::lgamma(Nd - bd + 1.0) - lgN;
      for (long long n = std::max(1LL, a + b - N); n <= std::min(a, b); ++n) {
        const double nd = static_cast<double>(n);
        const double logp = fixed - std::lgamma(nd + 1.0) - std::lgamma(ad - nd + 1.0) -
                            std::lgamma(bd - nd + 1.0) - std::lgamma(Nd - ad - bd + nd + 1.0);
        emi += nd / Nd * std::log(Nd * nd / (ad * bd)) * std::exp(logp);
      }
    }
  }
  return emi;
}

double adjusted_mutual_information(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw InvalidArgument("label vectors differ in length");
  if (a.empty()) throw InvalidArgument("AMI of empty labelings");
  if (same_partition(a, b)) return 1.0;
  const auto t = contingency(a, b);
  const double mi = mutual_information(t);
  const double emi = expected_mutual_information(t);
  const double norm = 0.5 * (entropy(t.row_sums) + entropy(t.col_sums));
  const double denom = norm - emi;
  if (std::abs(denom) <= 1e-15) return 0.0;
  return (mi - emi) / denom;
}

}  // namespace gs1mc
