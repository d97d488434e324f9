#pragma once

#include <Eigen/Dense>
#include <vector>

#include "stabgknock/common.hpp"
#include "stabgknock/rng.hpp"

namespace sgk {

struct ScreenOptions {
  int multistarts = 10;
  int max_iht_iterations = 500;
  int max_swap_moves = 5000;
};

struct ScreenResult {
  IndexSet kept;           // support of beta_k, |kept| <= k
  Eigen::VectorXd beta_k;  // length p, exact restricted least squares on kept
  double objective = 0;    // (1/(2n)) ‖y − Xβ‖²
  int iht_iterations = 0;
  int swap_moves = 0;
  int restarts = 0;
  bool rank_deficient_support = false;
};

// Cardinality-constrained least squares via iterative hard thresholding
// (projected gradient with top-k projection and on-support refits) followed
// by exhaustive single-swap descent; multistart picks the best objective.
ScreenResult spls_screen(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int k,
                         const ScreenOptions& opt, Rng& rng);

// Global minimizer over all supports of size <= k; enumeration oracle,
// limited to p <= 15.
ScreenResult exhaustive_best_subset(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int k);

// Marginal baselines: top-k by |Pearson correlation| and |Kendall tau|.
IndexSet sis_screen(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int k);
IndexSet rrcs_screen(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int k);

// Complete orderings (best first) used for minimum-model-size metrics.
std::vector<int> sis_ranking(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
std::vector<int> rrcs_ranking(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

// Ordering induced by a screen result: kept features by |coefficient|
// descending, then the rest by |correlation with the fit residual|.
std::vector<int> spls_ranking(const ScreenResult& res, const Eigen::MatrixXd& x,
                              const Eigen::VectorXd& y);

double pearson_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Kendall tau-a via O(n log n) inversion counting (ties contribute zero).
double kendall_tau(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace sgk
