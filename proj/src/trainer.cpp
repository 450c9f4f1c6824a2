#include "gs1mc/trainer.hpp"

#include <cmath>
#include <string>

#include "gs1mc/error.hpp"
#include "gs1mc/rng.hpp"

namespace gs1mc {
namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 50;

bool is_user_block(Block b) { return b == Block::P || b == Block::SU; }

// Per-row curvature bounds of F with the other side fixed: sigmoid' <= 1/4.
Vector entity_curvature(std::span<const int> own, std::span<const int> other,
                        const RowMatrix& other_embed, Eigen::Index n) {
  const Vector sq = other_embed.rowwise().squaredNorm();
  Vector c = Vector::Zero(n);
  for (std::size_t e = 0; e < own.size(); ++e) c[own[e]] += 0.25 * sq[other[e]];
  return c;
}

Vector group_sum(const Vector& v, std::span<const int> groups, int m) {
  Vector out = Vector::Zero(m);
  for (std::size_t r = 0; r < groups.size(); ++r) out[groups[r]] += v[static_cast<Eigen::Index>(r)];
  return out;
}

Matrix& block_of(FactorSet& f, Block b) {
  switch (b) {
    case Block::P: return f.P;
    case Block::SU: return f.SU;
    case Block::Q: return f.Q;
    case Block::TJ: return f.TJ;
  }
  return f.P;
}

}  // namespace

void TrainConfig::validate() const {
  if (K < 1) throw InvalidArgument("K must be positive");
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be nonnegative");
  if (!(step_size > 0.0)) throw InvalidArgument("step size must be positive");
  if (max_outer_iters < 0) throw InvalidArgument("max outer iterations must be nonnegative");
  if (inner_steps_per_block < 1) throw InvalidArgument("inner steps per block must be positive");
  if (!(tolerance > 0.0 && tolerance < 1.0)) throw InvalidArgument("tolerance must lie in (0, 1)");
  if (!(init_scale > 0.0)) throw InvalidArgument("init scale must be positive");
}

BlockDescent::BlockDescent(const BinaryRatings& ratings, GroupAssignment groups, double lambda,
                           double initial_step, bool precondition)
    : objective_(ratings), groups_(std::move(groups)), lambda_(lambda),
      precondition_(precondition) {
  if (!(lambda_ >= 0.0)) throw InvalidArgument("lambda must be nonnegative");
  if (!(initial_step > 0.0)) throw InvalidArgument("step size must be positive");
  if (groups_.n1() != ratings.n1() || groups_.n2() != ratings.n2())
    throw InvalidArgument("group assignment does not cover the rating matrix");
  step_.fill(initial_step);
}

void BlockDescent::set_groups(GroupAssignment groups) {
  if (groups.n1() != groups_.n1() || groups.n2() != groups_.n2())
    throw InvalidArgument("new assignment covers a different universe");
  groups_ = std::move(groups);
}

double BlockDescent::loss(const FactorSet& factors) const {
  return objective_.loss(factors, groups_, lambda_);
}

double BlockDescent::step_block(FactorSet& f, Block block, int steps) {
  const bool user_side = is_user_block(block);
  const bool group_block = block == Block::SU || block == Block::TJ;
  const auto users = objective_.users();
  const auto items = objective_.items();

  // The opposite side's embedding is fixed for this block.
  const RowMatrix fixed = user_side ? RowMatrix(item_embedding(f, groups_))
                                    : RowMatrix(user_embedding(f, groups_));
  const Matrix expanded_other =
      user_side ? Matrix(expand_user_factors(f.SU, groups_)) : Matrix(expand_item_factors(f.TJ, groups_));
  const Matrix& own_entity = user_side ? f.P : f.Q;
  const auto own_groups = user_side ? groups_.user_group() : groups_.item_group();
  const int m = user_side ? groups_.m1() : groups_.m2();

  Vector curvature;
  if (precondition_) {
    curvature = user_side ? entity_curvature(users, items, fixed, objective_.n1())
                          : entity_curvature(items, users, fixed, objective_.n2());
    if (group_block) curvature = group_sum(curvature, own_groups, m);
    curvature.array() += 2.0 * lambda_;
  }

  Matrix& X = block_of(f, block);
  const double other_ridge = [&] {
    switch (block) {
      case Block::P: return f.SU.squaredNorm() + f.Q.squaredNorm() + f.TJ.squaredNorm();
      case Block::SU: return f.P.squaredNorm() + f.Q.squaredNorm() + f.TJ.squaredNorm();
      case Block::Q: return f.P.squaredNorm() + f.SU.squaredNorm() + f.TJ.squaredNorm();
      case Block::TJ: return f.P.squaredNorm() + f.SU.squaredNorm() + f.Q.squaredNorm();
    }
    return 0.0;
  }();

  // Loss and (optionally) the block gradient at candidate value Y of the block.
  auto evaluate = [&](const Matrix& Y, Matrix* grad) {
    const RowMatrix own = group_block ? RowMatrix(own_entity + expand_rows(Y, own_groups))
                                      : RowMatrix(Y + expanded_other);
    std::vector<double> coef;
    const double F = user_side ? objective_.data_loss(own, fixed, grad ? &coef : nullptr)
                               : objective_.data_loss(fixed, own, grad ? &coef : nullptr);
    if (grad) {
      const Matrix d = user_side ? Matrix(objective_.scatter_user(coef, fixed))
                                 : Matrix(objective_.scatter_item(coef, fixed));
      *grad = (group_block ? sum_rows_by_group(d, own_groups, m) : d) + 2.0 * lambda_ * Y;
    }
    return F + lambda_ * (other_ridge + Y.squaredNorm());
  };

  double& t = step_[static_cast<int>(block)];
  Matrix g;
  double current = evaluate(X, &g);
  for (int s = 0; s < steps; ++s) {
    if (!std::isfinite(current)) throw NumericalError("loss became non-finite during descent");
    Matrix d = g;
    if (precondition_) {
      for (Eigen::Index r = 0; r < d.rows(); ++r)
        d.row(r) = curvature[r] > 0.0 ? Eigen::RowVectorXd(d.row(r) / curvature[r])
                                      : Eigen::RowVectorXd::Zero(d.cols());
    }
    const double slope = (g.array() * d.array()).sum();
    if (!(slope > 0.0)) break;  // stationary for this block

    bool accepted = false;
    for (int h = 0; h < kMaxHalvings; ++h) {
      Matrix trial = X - t * d;
      const double value = evaluate(trial, nullptr);
      if (std::isfinite(value) && value <= current - kArmijo * t * slope) {
        X = std::move(trial);
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    current = evaluate(X, &g);
    t *= 2.0;
  }
  return current;
}

double BlockDescent::cycle(FactorSet& factors, int steps_per_block) {
  double value = 0.0;
  for (Block b : {Block::P, Block::SU, Block::Q, Block::TJ})
    value = step_block(factors, b, steps_per_block);
  return value;
}

FactorSet random_factors(int n1, int n2, int m1, int m2, const TrainConfig& config) {
  Rng rng = make_rng(config.seed, streams::factor_init);
  std::normal_distribution<double> normal(0.0, config.init_scale);
  FactorSet f = FactorSet::zeros(n1, n2, m1, m2, config.K);
  for (Matrix* X : {&f.P, &f.Q, &f.SU, &f.TJ})
    for (Eigen::Index e = 0; e < X->size(); ++e) X->data()[e] = normal(rng);
  return f;
}

FitResult fit_gs1mc(const BinaryRatings& ratings, const GroupAssignment& groups,
                    const TrainConfig& config) {
  config.validate();
  return fit_gs1mc(ratings, groups, config,
                   random_factors(ratings.n1(), ratings.n2(), groups.m1(), groups.m2(), config));
}

FitResult fit_gs1mc(const BinaryRatings& ratings, const GroupAssignment& groups,
                    const TrainConfig& config, FactorSet init) {
  config.validate();
  if (ratings.empty()) throw DataError("no observed entries to fit");
  init.validate();
  if (init.P.rows() != ratings.n1() || init.Q.rows() != ratings.n2() ||
      init.SU.rows() != groups.m1() || init.TJ.rows() != groups.m2())
    throw InvalidArgument("initial factors do not match the problem dimensions");

  BlockDescent descent(ratings, groups, config.lambda, config.step_size, config.precondition);
  FitResult fit;
  fit.factors = std::move(init);
  fit.loss_trace.push_back(descent.loss(fit.factors));
  if (!std::isfinite(fit.loss_trace.back()))
    throw NumericalError("initial loss is non-finite; check init_scale");

  for (int it = 0; it < config.max_outer_iters; ++it) {
    const double prev = fit.loss_trace.back();
    const double value = descent.cycle(fit.factors, config.inner_steps_per_block);
    if (!std::isfinite(value))
      throw NumericalError("loss became non-finite at outer iteration " + std::to_string(it + 1));
    fit.loss_trace.push_back(value);
    fit.iterations_run = it + 1;
    if (std::abs(prev - value) <= config.tolerance * std::abs(prev)) {
      fit.converged = true;
      break;
    }
  }
  return fit;
}

Matrix predict_missing(const FitResult& fit, const GroupAssignment& groups) {
  return predict_probabilities(assemble_M(fit.factors, groups));
}

}  // namespace gs1mc
