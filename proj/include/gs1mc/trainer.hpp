#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "gs1mc/loss.hpp"
#include "gs1mc/model.hpp"

namespace gs1mc {

struct TrainConfig {
  int K = 3;
  double lambda = 37.0;
  /// Initial step multiplier. With preconditioning on, 1.0 is the majorizer step.
  double step_size = 1.0;
  int max_outer_iters = 500;
  int inner_steps_per_block = 5;
  /// Stop when |L_prev - L| / |L_prev| over one full block cycle falls below this.
  double tolerance = 1e-5;
  std::uint64_t seed = 1;
  double init_scale = 0.1;
  /// Scale each row's gradient by an upper bound of its curvature.
  bool precondition = true;

  void validate() const;
};

struct FitResult {
  FactorSet factors;
  std::vector<double> loss_trace;  // loss_trace[0] is the initial loss
  int iterations_run = 0;
  bool converged = false;
};

enum class Block { P = 0, SU = 1, Q = 2, TJ = 3 };

/// Block-coordinate gradient descent on L with a backtracking (Armijo) line
/// search per step. Holds the observed data and the current group assignment;
/// the factor set is passed in and updated in place.
class BlockDescent {
 public:
  BlockDescent(const BinaryRatings& ratings, GroupAssignment groups, double lambda,
               double initial_step = 1.0, bool precondition = true);

  const GroupAssignment& groups() const noexcept { return groups_; }
  void set_groups(GroupAssignment groups);

  double loss(const FactorSet& factors) const;

  /// `steps` line-searched gradient steps on one block. Returns the loss afterwards.
  double step_block(FactorSet& factors, Block block, int steps);

  /// One sweep P, S_U, Q, T_J with `steps_per_block` steps each.
  double cycle(FactorSet& factors, int steps_per_block);

 private:
  ObservedObjective objective_;
  GroupAssignment groups_;
  double lambda_;
  bool precondition_;
  std::array<double, 4> step_;
};

/// Factors drawn i.i.d. N(0, init_scale^2) from the config seed.
FactorSet random_factors(int n1, int n2, int m1, int m2, const TrainConfig& config);

/// Fits GS1MC from a random initialization.
FitResult fit_gs1mc(const BinaryRatings& ratings, const GroupAssignment& groups,
                    const TrainConfig& config);

/// Fits GS1MC starting from the given factors.
FitResult fit_gs1mc(const BinaryRatings& ratings, const GroupAssignment& groups,
                    const TrainConfig& config, FactorSet init);

/// f(M) for every (user, item), observed or not.
Matrix predict_missing(const FitResult& fit, const GroupAssignment& groups);

}  // namespace gs1mc
