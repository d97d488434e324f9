#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "stabgknock/common.hpp"
#include "stabgknock/gknockoff.hpp"
#include "stabgknock/screening.hpp"
#include "stabgknock/selection.hpp"
#include "stabgknock/spline.hpp"
#include "stabgknock/statistics.hpp"
#include "stabgknock/types.hpp"

namespace sgk {

struct PipelineConfig {
  double q = 0.1;
  ThresholdMode mode = ThresholdMode::KnockoffPlus;
  StatKind statistic = StatKind::Spd;
  SplineSpec spline;
  bool spline_bic = false;        // pick interior knots by BIC instead of n^(1/9)
  int subsample_replications = 100;  // L
  LambdaRule lambda_rule = LambdaRule::GlobalCv;
  int cv_folds = 10;
  int grid_size = 100;
  KnockoffConfig knockoff;
  bool allow_row_augment = true;
  int split_n1 = -1;   // two-stage only; -1: floor(n/2)
  int screen_k = -1;   // two-stage only; -1: floor(n1/log n1) clamped to n2/2
  int multistarts = 10;
  uint64_t seed = 0;
  std::string digest;  // provenance string attached to outcomes

  void validate() const;
};

struct SplitPlan {
  IndexSet idx1;
  IndexSet idx2;
};

SplitPlan split_data(int n, int n1, uint64_t seed);

struct PipelineResult {
  SelectionOutcome outcome;  // selected indices in original column numbering
  Eigen::VectorXd w;         // statistic per tested column (aligned to w_columns)
  IndexSet w_columns;        // original indices the statistic refers to
  IndexSet screened;         // two-stage only; empty otherwise
  Eigen::VectorXd col_scales;
  std::string algorithm;     // "stab-gknock" or "spls-stab-gknock"
  double lambda_used = 0;
  double construction_residual_gram = 0;
  double construction_residual_cross = 0;
  int augmented_rows = 0;
  int basis_dim = 0;
  bool cholesky_degraded = false;
  bool u_projected = false;
  int screen_k = 0;
};

// Single-stage procedure: spline projection, knockoff construction, statistic,
// threshold. Requires n >= 2p after the optional row augmentation.
PipelineResult stab_gknock(const DesignTriple& d, const PipelineConfig& cfg);

// Two-stage procedure: screening on one half of the rows, single-stage
// selection on the other half restricted to the screened columns.
PipelineResult spls_stab_gknock(const DesignTriple& d, const PipelineConfig& cfg);

// Dispatch by dimension: p < n/2 runs the single stage, otherwise two-stage.
PipelineResult auto_select(const DesignTriple& d, const PipelineConfig& cfg,
                           bool force_two_stage = false);

}  // namespace sgk
