#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <string>

#include "stabgknock/common.hpp"

namespace sgk {

enum class ThresholdMode { Knockoff, KnockoffPlus };

struct SelectionOutcome {
  double threshold = std::numeric_limits<double>::infinity();
  IndexSet selected;  // 0-based; {j : W_j >= threshold}
  double fdp_hat = 0;
  double q = 0;
  ThresholdMode mode = ThresholdMode::KnockoffPlus;
  uint64_t seed = 0;
  std::string config_digest;
};

// Data-dependent threshold over the candidate set {|W_j| : |W_j| > 0}:
//   knockoff:      #{W_j <= -t} / max(#{W_j >= t}, 1) <= q
//   knockoff_plus: (1 + #{W_j <= -t}) / max(#{W_j >= t}, 1) <= q
// Returns +inf when no candidate qualifies (empty selection).
double knockoff_threshold(const Eigen::VectorXd& w, double q, ThresholdMode mode);

SelectionOutcome select(const Eigen::VectorXd& w, double q, ThresholdMode mode);

// Benjamini-Hochberg step-up at level q; returns the rejected indices.
IndexSet bh_select(const Eigen::VectorXd& pvalues, double q);

// Two-sided p-value of the slope in the per-feature simple regression of y
// on x_j (intercept included, t distribution with n-2 degrees of freedom).
Eigen::VectorXd univariate_pvalues(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

}  // namespace sgk
