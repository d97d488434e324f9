#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "stabgknock/common.hpp"
#include "stabgknock/gknockoff.hpp"
#include "stabgknock/lasso.hpp"

namespace sgk {

// L half-sample splits (I_l, I_l^c) with |I_l| = floor(n/2), drawn without
// replacement and reproducible from the seed.
struct SubsamplePlan {
  int n = 0;
  uint64_t seed = 0;
  std::vector<std::pair<IndexSet, IndexSet>> pairs;

  int replications() const { return static_cast<int>(pairs.size()); }
};

SubsamplePlan make_plan(int n, int replications, uint64_t seed);

struct SelectionFrequencies {
  Eigen::VectorXd pi_tilde;  // 2p empirical selection probabilities
  std::vector<IndexSet> per_replicate_supports;
};

enum class StatKind { Spd, Lsm, Lcd };

struct KnockoffStats {
  Eigen::VectorXd w;  // length p
  StatKind kind = StatKind::Spd;
  double lambda_used = 0;  // CV λ (SPD global rule, LCD); 0 for LSM
  int grid_size = 0;       // LSM only
  SubsamplePlan plan;      // SPD only
};

enum class LambdaRule { GlobalCv, PerReplicateCv };

struct SpdOptions {
  LambdaRule lambda_rule = LambdaRule::GlobalCv;
  int cv_folds = 10;
  int grid_size = 100;
  uint64_t seed = 0;  // drives CV shuffles; subsampling comes from the plan
};

// {j : b1_j != 0} ∩ {j : b2_j != 0}.
IndexSet intersect_support(const Eigen::VectorXd& b1, const Eigen::VectorXd& b2);

// Intersected support of the two half-sample lasso fits of one replicate.
// Exposed so property tests can drive a replicate directly.
IndexSet replicate_intersection(const Eigen::MatrixXd& joint, const Eigen::VectorXd& y,
                                const IndexSet& rows_a, const IndexSet& rows_b, double lambda);

// Selection-probability-difference statistic: W_j = π̃_j − π̃_{j+p} from the
// intersected supports across the plan's replicates.
std::pair<KnockoffStats, SelectionFrequencies> spd_statistics(const AugmentedDesign& aug,
                                                              const Eigen::VectorXd& y_star,
                                                              const SubsamplePlan& plan,
                                                              const SpdOptions& opt = {});

// Signed entry-λ maximum on the joint lasso path.
KnockoffStats lsm_statistics(const AugmentedDesign& aug, const Eigen::VectorXd& y_star,
                             int grid_size = 100);

// Coefficient-magnitude difference from one lasso fit at the given λ.
KnockoffStats lcd_statistics(const AugmentedDesign& aug, const Eigen::VectorXd& y_star,
                             double lambda);

using StatisticFn =
    std::function<Eigen::VectorXd(const AugmentedDesign&, const Eigen::VectorXd&, uint64_t)>;

// Recomputes the statistic with columns j and j+p swapped, replaying all
// randomness from the seed; true iff W_j flips sign and every other W_k is
// unchanged (within tol).
bool check_antisymmetry(const StatisticFn& fn, const AugmentedDesign& aug,
                        const Eigen::VectorXd& y_star, int j, uint64_t seed, double tol = 1e-10);

}  // namespace sgk
