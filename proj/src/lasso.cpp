#include "stabgknock/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stabgknock/parallel.hpp"

namespace sgk {

namespace {

inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

// Coordinate descent on the Gram form: G = XᵀX, c = Xᵀy, gradient state
// h = c − Gβ maintained incrementally and recomputed exactly before every
// convergence decision.
struct GramData {
  Eigen::MatrixXd G;
  Eigen::VectorXd c;
  double yty = 0;
  int n = 0;
};

GramData make_gram(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  GramData g;
  const int q = static_cast<int>(x.cols());
  g.G = Eigen::MatrixXd::Zero(q, q);
  g.G.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
  g.G.triangularView<Eigen::StrictlyUpper>() = g.G.transpose();
  g.c.noalias() = x.transpose() * y;
  g.yty = y.squaredNorm();
  g.n = static_cast<int>(x.rows());
  return g;
}

struct CdResult {
  Eigen::VectorXd beta;
  double kkt_violation = 0;
  int sweeps = 0;
  bool converged = true;
};

double sweep_once(const GramData& gd, const std::vector<int>& order, double lambda,
                  Eigen::VectorXd& beta, Eigen::VectorXd& h, bool active_only) {
  const int n = gd.n;
  double max_change = 0;
  for (int j : order) {
    if (active_only && beta[j] == 0.0) continue;
    const double gjj = gd.G(j, j);
    if (gjj <= 0) continue;
    const double z = (h[j] + gjj * beta[j]) / n;
    const double updated = soft_threshold(z, lambda) * n / gjj;
    const double delta = updated - beta[j];
    if (delta != 0.0) {
      beta[j] = updated;
      h.noalias() -= gd.G.col(j) * delta;
      max_change = std::max(max_change, std::abs(delta));
    }
  }
  return max_change;
}

// Accumulates in sweep order so the result is bit-identical under column
// permutations that permute the order consistently (knockoff swaps).
void recompute_gradient(const GramData& gd, const std::vector<int>& order,
                        const Eigen::VectorXd& beta, Eigen::VectorXd& h) {
  h = gd.c;
  for (int j : order)
    if (beta[j] != 0.0) h.noalias() -= gd.G.col(j) * beta[j];
}

double kkt_violation(const GramData& gd, const Eigen::VectorXd& beta, const Eigen::VectorXd& h,
                     double lambda) {
  double v = 0;
  for (int j = 0; j < beta.size(); ++j) {
    const double g = h[j] / gd.n;
    if (beta[j] == 0.0)
      v = std::max(v, std::abs(g) - lambda);
    else
      v = std::max(v, std::abs(g - lambda * (beta[j] > 0 ? 1.0 : -1.0)));
  }
  return std::max(v, 0.0);
}

CdResult coordinate_descent(const GramData& gd, double lambda, const LassoOptions& opt,
                            const std::vector<int>& order, const Eigen::VectorXd* warm) {
  const int q = static_cast<int>(gd.c.size());
  CdResult res;
  res.beta = warm ? *warm : Eigen::VectorXd::Zero(q);
  Eigen::VectorXd h(q);
  recompute_gradient(gd, order, res.beta, h);

  // Stationarity is the convergence contract; the coordinate-change
  // tolerance drives the sweeps, and a periodic exact KKT check catches the
  // (dense, correlated) fits whose coordinate steps shrink slowly while the
  // gradient is already stationary.
  int since_check = 0;
  auto stationary = [&]() {
    recompute_gradient(gd, order, res.beta, h);
    res.kkt_violation = kkt_violation(gd, res.beta, h, lambda);
    since_check = 0;
    return res.kkt_violation <= opt.kkt_tol;
  };

  while (res.sweeps < opt.max_sweeps) {
    if (opt.active_set) {
      // Full pass to refresh the active set, then iterate on it.
      double full_change = sweep_once(gd, order, lambda, res.beta, h, false);
      ++res.sweeps;
      ++since_check;
      while (full_change >= opt.tol && res.sweeps < opt.max_sweeps) {
        double change = sweep_once(gd, order, lambda, res.beta, h, true);
        ++res.sweeps;
        if (++since_check >= 10 && stationary()) return res;
        if (change < opt.tol) break;
      }
      if (full_change >= opt.tol) continue;
    } else {
      double change = sweep_once(gd, order, lambda, res.beta, h, false);
      ++res.sweeps;
      if (++since_check >= 10 && stationary()) return res;
      if (change >= opt.tol) continue;
    }
    if (stationary()) return res;
  }
  recompute_gradient(gd, order, res.beta, h);
  res.kkt_violation = kkt_violation(gd, res.beta, h, lambda);
  res.converged = res.kkt_violation <= opt.kkt_tol;
  return res;
}

std::vector<int> natural_order(int q) {
  std::vector<int> order(q);
  std::iota(order.begin(), order.end(), 0);
  return order;
}

std::vector<int> order_from_scores(const Eigen::VectorXd& scores) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    double sa = std::abs(scores[a]), sb = std::abs(scores[b]);
    if (sa != sb) return sa > sb;
    return a < b;
  });
  return order;
}

void validate_inputs(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
  if (x.rows() != y.size()) fail_validation("DimensionError", "X rows and y length differ");
  if (!x.allFinite() || !y.allFinite())
    fail_validation("NonFiniteInput", "lasso inputs contain non-finite values");
  if (!(lambda >= 0)) fail_validation("BadLambda", "lambda must be >= 0");
}

LassoFit finalize_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                      CdResult&& cd) {
  LassoFit fit;
  fit.beta = std::move(cd.beta);
  fit.lambda = lambda;
  fit.kkt_violation = cd.kkt_violation;
  fit.iterations = cd.sweeps;
  fit.converged = cd.converged;
  Eigen::VectorXd resid = y - x * fit.beta;
  fit.objective = resid.squaredNorm() / (2.0 * x.rows()) + lambda * fit.beta.lpNorm<1>();
  return fit;
}

}  // namespace

IndexSet LassoFit::support() const {
  IndexSet s;
  for (int j = 0; j < beta.size(); ++j)
    if (beta[j] != 0.0) s.push_back(j);
  return s;
}

double lasso_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  return (x.transpose() * y).cwiseAbs().maxCoeff() / x.rows();
}

Eigen::VectorXd lasso_lambda_grid(double lambda_max, int grid_size, double min_ratio) {
  if (grid_size < 1) fail_validation("BadGrid", "grid size must be >= 1");
  lambda_max = std::max(lambda_max, 1e-12);
  Eigen::VectorXd grid(grid_size);
  for (int i = 0; i < grid_size; ++i) {
    double frac = grid_size == 1 ? 0.0 : static_cast<double>(i) / (grid_size - 1);
    grid[i] = lambda_max * std::pow(min_ratio, frac);
  }
  return grid;
}

LassoFit fit_lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                   const LassoOptions& opt) {
  validate_inputs(x, y, lambda);
  GramData gd = make_gram(x, y);
  std::vector<int> order =
      opt.sweep_order ? *opt.sweep_order : natural_order(static_cast<int>(x.cols()));
  return finalize_fit(x, y, lambda, coordinate_descent(gd, lambda, opt, order, opt.warm_start));
}

LassoFit fit_lasso_gram(const Eigen::MatrixXd& gram, const Eigen::VectorXd& xty, double yty,
                        int n_rows, double lambda, const LassoOptions& opt) {
  if (gram.rows() != gram.cols() || gram.rows() != xty.size())
    fail_validation("DimensionError", "gram and inner-product sizes differ");
  if (!(lambda >= 0)) fail_validation("BadLambda", "lambda must be >= 0");
  GramData gd{gram, xty, yty, n_rows};
  std::vector<int> order =
      opt.sweep_order ? *opt.sweep_order : natural_order(static_cast<int>(xty.size()));
  CdResult cd = coordinate_descent(gd, lambda, opt, order, opt.warm_start);

  LassoFit fit;
  fit.beta = std::move(cd.beta);
  fit.lambda = lambda;
  fit.kkt_violation = cd.kkt_violation;
  fit.iterations = cd.sweeps;
  fit.converged = cd.converged;
  double quad = yty - 2.0 * xty.dot(fit.beta);
  for (int j = 0; j < fit.beta.size(); ++j)
    if (fit.beta[j] != 0.0) quad += fit.beta[j] * gram.col(j).dot(fit.beta);
  fit.objective = std::max(quad, 0.0) / (2.0 * n_rows) + lambda * fit.beta.lpNorm<1>();
  return fit;
}

double cv_lambda(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int folds, int grid_size,
                 Rng& rng, std::vector<double>* cv_errors) {
  const int n = static_cast<int>(x.rows());
  if (folds < 2 || folds > n) fail_validation("BadFolds", "need n >= folds >= 2");
  validate_inputs(x, y, 0.0);

  GramData full = make_gram(x, y);
  Eigen::VectorXd grid = lasso_lambda_grid(full.c.cwiseAbs().maxCoeff() / n, grid_size);
  std::vector<int> order = order_from_scores(full.c);

  std::vector<int> fold_of(n);
  std::vector<int> perm = rng.permutation(n);
  for (int i = 0; i < n; ++i) fold_of[perm[i]] = i % folds;

  // per-fold error curves, reduced in fold order afterwards
  std::vector<std::vector<double>> fold_errors(folds);
  parallel_for(folds, [&](int f) {
    std::vector<int> test_rows;
    for (int i = 0; i < n; ++i)
      if (fold_of[i] == f) test_rows.push_back(i);
    Eigen::MatrixXd x_test = x(test_rows, Eigen::all);
    Eigen::VectorXd y_test = y(test_rows);

    GramData train;
    train.G = full.G - x_test.transpose() * x_test;
    train.c = full.c - x_test.transpose() * y_test;
    train.n = n - static_cast<int>(test_rows.size());
    if (train.n < 1) fail_validation("BadFolds", "empty training fold");

    LassoOptions opt;
    fold_errors[f].assign(grid_size, 0.0);
    Eigen::VectorXd warm = Eigen::VectorXd::Zero(x.cols());
    for (int g = 0; g < grid_size; ++g) {
      CdResult cd = coordinate_descent(train, grid[g], opt, order, &warm);
      warm = cd.beta;
      double sse = (y_test - x_test * cd.beta).squaredNorm();
      fold_errors[f][g] = sse / test_rows.size();
    }
  });

  std::vector<double> errors(grid_size, 0.0);
  for (int f = 0; f < folds; ++f)
    for (int g = 0; g < grid_size; ++g) errors[g] += fold_errors[f][g] / folds;

  int best = 0;
  for (int g = 1; g < grid_size; ++g)
    if (errors[g] < errors[best]) best = g;  // ties keep the larger λ
  if (cv_errors) *cv_errors = errors;
  return grid[best];
}

LassoPath lasso_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int grid_size,
                     bool keep_fits, const LassoOptions& opt) {
  validate_inputs(x, y, 0.0);
  const int q = static_cast<int>(x.cols());
  GramData gd = make_gram(x, y);
  std::vector<int> order = order_from_scores(gd.c);

  LassoPath path;
  path.lambda_grid = lasso_lambda_grid(gd.c.cwiseAbs().maxCoeff() / gd.n, grid_size);
  path.entry_lambda = Eigen::VectorXd::Zero(q);

  Eigen::VectorXd warm = Eigen::VectorXd::Zero(q);
  for (int g = 0; g < grid_size; ++g) {
    CdResult cd = coordinate_descent(gd, path.lambda_grid[g], opt, order, &warm);
    if (!cd.converged)
      fail_numeric("NoConvergence", "lasso path did not converge at grid index " +
                   std::to_string(g));
    warm = cd.beta;
    for (int j = 0; j < q; ++j)
      if (path.entry_lambda[j] == 0.0 && cd.beta[j] != 0.0)
        path.entry_lambda[j] = path.lambda_grid[g];
    if (keep_fits) path.fits.push_back(cd.beta);
  }
  return path;
}

std::vector<int> correlation_sweep_order(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  return order_from_scores(x.transpose() * y);
}

}  // namespace sgk
