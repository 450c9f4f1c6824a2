#include "gs1mc/cdmc.hpp"

#include <cmath>
#include <map>

#include "gs1mc/error.hpp"
#include "gs1mc/metrics.hpp"
#include "gs1mc/rng.hpp"

namespace gs1mc {

void CdmcConfig::validate(int n1, int n2) const {
  train.validate();
  if (m1 < 1 || m1 > n1) throw InvalidArgument("m1 must lie in [1, n1]");
  if (m2 < 1 || m2 > n2) throw InvalidArgument("m2 must lie in [1, n2]");
  if (outer_epochs < 1) throw InvalidArgument("outer epochs must be at least 1");
  if (inner_steps < 0) throw InvalidArgument("inner steps must be nonnegative");
  if (!(convergence_ami > 0.0 && convergence_ami <= 1.0))
    throw InvalidArgument("convergence AMI must lie in (0, 1]");
}

std::vector<int> random_groups(int n, int m, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, m - 1);
  std::vector<int> g(static_cast<std::size_t>(n));
  for (auto& v : g) v = pick(rng);
  return g;
}

GroupAssignment initial_cdmc_groups(int n1, int n2, const CdmcConfig& config) {
  Rng rng = make_rng(config.seed, streams::group_init);
  auto users = random_groups(n1, config.m1, rng);
  auto items = random_groups(n2, config.m2, rng);
  return GroupAssignment(std::move(users), std::move(items), config.m1, config.m2);
}

Matrix carry_over_group_factors(const Matrix& old_factors, std::span<const int> old_groups,
                                std::span<const int> new_groups, int m_new) {
  if (old_groups.size() != new_groups.size())
    throw InvalidArgument("old and new labelings cover different universes");
  const auto m_old = old_factors.rows();
  std::vector<std::vector<int>> votes(static_cast<std::size_t>(m_new),
                                      std::vector<int>(static_cast<std::size_t>(m_old), 0));
  for (std::size_t k = 0; k < new_groups.size(); ++k) {
    if (new_groups[k] < 0 || new_groups[k] >= m_new || old_groups[k] < 0 || old_groups[k] >= m_old)
      throw InvalidArgument("group label out of range during carry-over");
    ++votes[new_groups[k]][old_groups[k]];
  }
  Matrix out = Matrix::Zero(m_new, old_factors.cols());
  for (int c = 0; c < m_new; ++c) {
    int best = -1, count = 0;
    for (Eigen::Index g = 0; g < m_old; ++g) {
      if (votes[c][g] > count) {
        count = votes[c][g];
        best = static_cast<int>(g);
      }
    }
    if (best >= 0) out.row(c) = old_factors.row(best);
    else if (c < m_old) out.row(c) = old_factors.row(c);
  }
  return out;
}

CdmcResult fit_cdmc(const BinaryRatings& ratings, const CdmcConfig& config,
                    const BinaryRatings* holdout) {
  if (ratings.empty()) throw DataError("no observed entries to fit");
  config.validate(ratings.n1(), ratings.n2());
  if (holdout && (holdout->n1() != ratings.n1() || holdout->n2() != ratings.n2()))
    throw InvalidArgument("holdout covers a different matrix");

  TrainConfig train = config.train;
  train.seed = config.seed;

  CdmcResult out;
  out.groups = initial_cdmc_groups(ratings.n1(), ratings.n2(), config);
  out.fit = fit_gs1mc(ratings, out.groups, train);
  FactorSet& f = out.fit.factors;
  if (holdout && !holdout->empty())
    out.trace.initial_misclassification = 1.0 - heldout_accuracy(f, out.groups, *holdout);

  BlockDescent descent(ratings, out.groups, train.lambda, train.step_size, train.precondition);
  Matrix warm_items, warm_users;

  for (int epoch = 1; epoch <= config.outer_epochs; ++epoch) {
    CdmcEpoch rec;
    rec.epoch = epoch;
    GroupAssignment next = out.groups;
    if (config.clustering) {
      const Matrix probs = predict_probabilities(assemble_M(f, out.groups));
      const std::uint64_t epoch_seed = stream_seed(config.seed, streams::clustering * 1000003ULL + epoch);

      // Items are the columns of f(M); users the columns of f(M)'.
      const SelfExpression items_se = solve_self_expression(
          probs, config.ssc, config.warm_start_ssc && warm_items.size() ? &warm_items : nullptr);
      const Matrix probs_t = probs.transpose();
      const SelfExpression users_se = solve_self_expression(
          probs_t, config.ssc, config.warm_start_ssc && warm_users.size() ? &warm_users : nullptr);
      rec.ssc_flagged = static_cast<int>(items_se.flagged.size() + users_se.flagged.size());

      const ClusterLabels item_cl = spectral_cluster(
          build_affinity(items_se.C, config.affinity_keep_top), config.m2, mix64(epoch_seed + 1),
          config.spectral);
      const ClusterLabels user_cl = spectral_cluster(
          build_affinity(users_se.C, config.affinity_keep_top), config.m1, mix64(epoch_seed + 2),
          config.spectral);
      if (config.warm_start_ssc) {
        warm_items = items_se.C;
        warm_users = users_se.C;
      }

      f.SU = carry_over_group_factors(f.SU, out.groups.user_group(), user_cl.labels, config.m1);
      f.TJ = carry_over_group_factors(f.TJ, out.groups.item_group(), item_cl.labels, config.m2);
      next = GroupAssignment(user_cl.labels, item_cl.labels, config.m1, config.m2);
    }
    rec.user_ami_prev = adjusted_mutual_information(out.groups.user_group(), next.user_group());
    rec.item_ami_prev = adjusted_mutual_information(out.groups.item_group(), next.item_group());
    out.groups = std::move(next);
    descent.set_groups(out.groups);

    double value = descent.loss(f);
    for (int s = 0; s < config.inner_steps; ++s) value = descent.cycle(f, train.inner_steps_per_block);
    if (!std::isfinite(value)) throw NumericalError("CDMC loss became non-finite at epoch " + std::to_string(epoch));
    out.fit.loss_trace.push_back(value);
    ++out.fit.iterations_run;

    rec.loss = value;
    if (holdout && !holdout->empty())
      rec.misclassification = 1.0 - heldout_accuracy(f, out.groups, *holdout);
    rec.user_labels.assign(out.groups.user_group().begin(), out.groups.user_group().end());
    rec.item_labels.assign(out.groups.item_group().begin(), out.groups.item_group().end());
    const bool stable = config.clustering && rec.user_ami_prev >= config.convergence_ami &&
                        rec.item_ami_prev >= config.convergence_ami;
    out.trace.epochs.push_back(std::move(rec));
    if (stable) {
      out.trace.converged = true;
      break;
    }
  }

  out.user_labels = {std::vector<int>(out.groups.user_group().begin(), out.groups.user_group().end()),
                     config.m1, 0};
  out.item_labels = {std::vector<int>(out.groups.item_group().begin(), out.groups.item_group().end()),
                     config.m2, 0};
  return out;
}

std::vector<AmiPoint> cross_run_ami(const CdmcTrace& a, const CdmcTrace& b) {
  std::vector<AmiPoint> out;
  const std::size_t n = std::min(a.epochs.size(), b.epochs.size());
  for (std::size_t e = 0; e < n; ++e) {
    const auto& ea = a.epochs[e];
    const auto& eb = b.epochs[e];
    if (ea.user_labels.size() != eb.user_labels.size() ||
        ea.item_labels.size() != eb.item_labels.size())
      throw InvalidArgument("traces cover different user/item universes");
    out.push_back({ea.epoch, adjusted_mutual_information(ea.user_labels, eb.user_labels),
                   adjusted_mutual_information(ea.item_labels, eb.item_labels)});
  }
  return out;
}

}  // namespace gs1mc
