#pragma once

#include <Eigen/Dense>
#include <vector>

#include "stabgknock/common.hpp"
#include "stabgknock/rng.hpp"

namespace sgk {

// All fits minimize the canonical objective
//   (1/(2n)) ‖y − Xβ‖² + λ‖β‖₁.
struct LassoOptions {
  int max_sweeps = 100000;
  double tol = 1e-8;      // max coordinate change per sweep
  double kkt_tol = 1e-6;  // stationarity residual accepted at convergence
  bool active_set = true; // false: plain cyclic full sweeps (reference mode)
  const std::vector<int>* sweep_order = nullptr;  // coordinate visitation order
  const Eigen::VectorXd* warm_start = nullptr;
};

struct LassoFit {
  Eigen::VectorXd beta;
  double lambda = 0;
  double objective = 0;
  double kkt_violation = 0;
  int iterations = 0;  // coordinate sweeps executed
  bool converged = true;

  IndexSet support() const;
};

struct LassoPath {
  Eigen::VectorXd lambda_grid;   // strictly decreasing
  Eigen::VectorXd entry_lambda;  // largest grid λ with β_j ≠ 0; 0 if never
  std::vector<Eigen::VectorXd> fits;  // per-grid snapshots when requested
};

double lasso_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
Eigen::VectorXd lasso_lambda_grid(double lambda_max, int grid_size, double min_ratio = 1e-3);

LassoFit fit_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                   const LassoOptions& opt = {});

// Same solver on precomputed Gram inputs G = XᵀX, c = Xᵀy, yty = ‖y‖²;
// used by callers that share or update Grams across many related fits.
LassoFit fit_lasso_gram(const Eigen::MatrixXd& gram, const Eigen::VectorXd& xty, double yty,
                        int n_rows, double lambda, const LassoOptions& opt = {});

// 10-fold CV over a log-spaced grid from λ_max down to 1e-3·λ_max; fold
// assignment is a deterministic shuffle of the rng, ties in CV error break
// toward the larger λ.
double cv_lambda(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int folds, int grid_size,
                 Rng& rng, std::vector<double>* cv_errors = nullptr);

LassoPath lasso_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int grid_size = 100,
                     bool keep_fits = false, const LassoOptions& opt = {});

// Coordinate order sorted by |X_jᵀy| descending (ties by index). Depends on
// column content only, so solvers sweeping in this order are equivariant
// under column permutations such as knockoff swaps.
std::vector<int> correlation_sweep_order(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

}  // namespace sgk
