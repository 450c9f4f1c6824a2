#pragma once

// Cluster-developing matrix completion: alternates group-specific factor
// updates with re-discovery of user and item groups by sparse subspace
// clustering of the current probability matrix f(M).

#include <cstdint>
#include <limits>
#include <vector>

#include "gs1mc/rng.hpp"
#include "gs1mc/subspace.hpp"
#include "gs1mc/trainer.hpp"

namespace gs1mc {

struct CdmcConfig {
  TrainConfig train;  // train.seed is replaced by `seed`
  int m1 = 10;
  int m2 = 10;
  int outer_epochs = 200;
  int inner_steps = 5;  // block cycles per epoch after re-clustering
  bool clustering = true;
  SelfExpressionConfig ssc;
  SpectralConfig spectral;
  int affinity_keep_top = 0;
  bool warm_start_ssc = true;
  double convergence_ami = 0.999;
  std::uint64_t seed = 1;

  void validate(int n1, int n2) const;
};

struct CdmcEpoch {
  int epoch = 0;
  std::vector<int> user_labels;
  std::vector<int> item_labels;
  double loss = 0.0;
  double misclassification = std::numeric_limits<double>::quiet_NaN();
  double user_ami_prev = 0.0;  // against the previous epoch's labels
  double item_ami_prev = 0.0;
  int ssc_flagged = 0;
};

struct CdmcTrace {
  std::vector<CdmcEpoch> epochs;
  double initial_misclassification = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
};

struct CdmcResult {
  FitResult fit;
  GroupAssignment groups;
  ClusterLabels user_labels;
  ClusterLabels item_labels;
  CdmcTrace trace;
};

/// Uniform random groups for n entities over [0, m).
std::vector<int> random_groups(int n, int m, Rng& rng);

/// The initial assignment fit_cdmc draws from its seed.
GroupAssignment initial_cdmc_groups(int n1, int n2, const CdmcConfig& config);

/// New group factors after relabeling: new cluster c takes the row of the old
/// group most of its members came from (ties to the lowest old id). Empty new
/// clusters keep row c of the old factors.
Matrix carry_over_group_factors(const Matrix& old_factors, std::span<const int> old_groups,
                                std::span<const int> new_groups, int m_new);

/// `holdout`, when given, is only used for the per-epoch misclassification rate.
CdmcResult fit_cdmc(const BinaryRatings& ratings, const CdmcConfig& config,
                    const BinaryRatings* holdout = nullptr);

struct AmiPoint {
  int epoch = 0;
  double user_ami = 0.0;
  double item_ami = 0.0;
};

/// AMI between two runs' labels at matched epochs (the shorter trace bounds the series).
std::vector<AmiPoint> cross_run_ami(const CdmcTrace& a, const CdmcTrace& b);

}  // namespace gs1mc
