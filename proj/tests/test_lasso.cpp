#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "stabgknock/lasso.hpp"
#include "test_util.hpp"

using namespace sgk;
using sgk_test::random_matrix;
using sgk_test::random_orthonormal;
using sgk_test::random_vector;

namespace {

double soft(double z, double t) { return z > t ? z - t : (z < -t ? z + t : 0.0); }

// oracle: stationarity residual of the (1/(2n))‖y−Xβ‖² + λ‖β‖₁ objective
double kkt_oracle(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                  double lambda) {
  Eigen::VectorXd g = x.transpose() * (y - x * beta) / x.rows();
  double v = 0;
  for (int j = 0; j < beta.size(); ++j) {
    if (beta[j] == 0.0)
      v = std::max(v, std::abs(g[j]) - lambda);
    else
      v = std::max(v, std::abs(g[j] - lambda * (beta[j] > 0 ? 1 : -1)));
  }
  return std::max(v, 0.0);
}

}  // namespace

TEST_SUITE_BEGIN("lasso");

TEST_CASE("one-dimensional fit matches the closed-form soft threshold") {
  const int n = 64;
  Eigen::VectorXd col = random_vector(n, 31);
  col *= std::sqrt(double(n)) / col.norm();  // XᵀX = n
  Eigen::MatrixXd x = col;
  Eigen::VectorXd y = random_vector(n, 32);

  const double rho = col.dot(y) / n;
  for (double lambda : {0.0, 0.05, 0.2, std::abs(rho) * 1.5}) {
    LassoFit fit = fit_lasso(x, y, lambda);
    CHECK(std::abs(fit.beta[0] - soft(rho, lambda)) <= 1e-10);
  }
}

TEST_CASE("lambda above the global null threshold yields zero") {
  Eigen::MatrixXd x = random_matrix(50, 8, 33);
  Eigen::VectorXd y = random_vector(50, 34);
  double lmax = lasso_lambda_max(x, y);
  LassoFit fit = fit_lasso(x, y, lmax * 1.000001);
  CHECK(fit.beta.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("unpenalized limit recovers ordinary least squares") {
  Eigen::MatrixXd x = random_matrix(60, 5, 35);
  Eigen::VectorXd y = random_vector(60, 36);
  LassoFit fit = fit_lasso(x, y, 0.0);
  Eigen::VectorXd ols = x.householderQr().solve(y);
  CHECK((fit.beta - ols).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("KKT conditions hold on random instances") {
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd x = random_matrix(40 + trial, 10 + trial % 7, 100 + trial);
    Eigen::VectorXd y = random_vector(40 + trial, 200 + trial);
    double lambda = 0.3 * lasso_lambda_max(x, y);
    LassoFit fit = fit_lasso(x, y, lambda);
    CHECK(fit.converged);
    CHECK(fit.kkt_violation <= 1e-6);
    CHECK(kkt_oracle(x, y, fit.beta, lambda) <= 1e-6);
  }
}

TEST_CASE("active-set strategy matches plain full sweeps") {
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXd x = random_matrix(80, 30, 300 + trial);
    Eigen::VectorXd beta0 = Eigen::VectorXd::Zero(30);
    beta0.head(4) << 2, -1, 1.5, -2;
    Eigen::VectorXd y = x * beta0 + random_vector(80, 400 + trial);
    double lambda = 0.2 * lasso_lambda_max(x, y);

    LassoFit fast = fit_lasso(x, y, lambda);
    LassoOptions naive_opt;
    naive_opt.active_set = false;
    LassoFit naive = fit_lasso(x, y, lambda, naive_opt);
    CHECK((fast.beta - naive.beta).cwiseAbs().maxCoeff() <= 1e-7);
  }
}

TEST_CASE("objective is non-increasing over naive sweeps") {
  // re-run descent manually, tracking the objective after every sweep
  Eigen::MatrixXd x = random_matrix(50, 12, 41);
  Eigen::VectorXd y = random_vector(50, 42);
  const double lambda = 0.1 * lasso_lambda_max(x, y);
  const int n = 50;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(12);
  double prev = y.squaredNorm() / (2.0 * n);
  for (int sweep = 0; sweep < 40; ++sweep) {
    for (int j = 0; j < 12; ++j) {
      Eigen::VectorXd r = y - x * beta + x.col(j) * beta[j];
      double rho = x.col(j).dot(r) / n;
      double ajj = x.col(j).squaredNorm() / n;
      beta[j] = soft(rho, lambda) / ajj;
    }
    double obj = (y - x * beta).squaredNorm() / (2.0 * n) + lambda * beta.lpNorm<1>();
    CHECK(obj <= prev + 1e-12);
    prev = obj;
  }
}

TEST_CASE("cv picks a large lambda under the global null") {
  Eigen::MatrixXd x = random_matrix(100, 20, 43);
  Eigen::VectorXd y = random_vector(100, 44);  // beta = 0
  double lmax = lasso_lambda_max(x, y);
  Eigen::VectorXd grid = lasso_lambda_grid(lmax, 100);

  int top_quartile = 0;
  const int runs = 50;
  for (int s = 0; s < runs; ++s) {
    Rng rng(900 + s);
    double chosen = cv_lambda(x, y, 10, 100, rng);
    if (chosen >= grid[24]) ++top_quartile;
  }
  CHECK(top_quartile >= 40);  // >= 80% of seeded runs
}

TEST_CASE("cv keeps a strong signal in the refit support") {
  Eigen::MatrixXd x = random_matrix(200, 15, 45);
  Eigen::VectorXd beta0 = Eigen::VectorXd::Zero(15);
  beta0[3] = 3.0;
  Eigen::VectorXd y = x * beta0 + random_vector(200, 46);
  Rng rng(47);
  double lambda = cv_lambda(x, y, 10, 100, rng);
  LassoFit fit = fit_lasso(x, y, lambda);
  IndexSet support = fit.support();
  CHECK(std::find(support.begin(), support.end(), 3) != support.end());
}

TEST_CASE("leave-one-out runs and returns a grid member") {
  Eigen::MatrixXd x = random_matrix(10, 3, 48);
  Eigen::VectorXd y = random_vector(10, 49);
  Rng rng(50);
  double lambda = cv_lambda(x, y, 10, 25, rng);
  Eigen::VectorXd grid = lasso_lambda_grid(lasso_lambda_max(x, y), 25);
  bool member = false;
  for (int g = 0; g < grid.size(); ++g)
    if (grid[g] == lambda) member = true;
  CHECK(member);
}

TEST_CASE("path entry point of an isolated signal sits at its amplitude") {
  const int n = 64, p = 8;
  Eigen::MatrixXd x = random_orthonormal(n, p, 51) * std::sqrt(double(n));  // XᵀX = n·I
  const double a = 0.7;
  Eigen::VectorXd y = x.col(2) * a;

  LassoPath path = lasso_path(x, y, 100);
  const double step = path.lambda_grid[0] / path.lambda_grid[1];
  CHECK(path.entry_lambda[2] <= a + 1e-12);
  CHECK(path.entry_lambda[2] >= a / step - 1e-12);

  for (int j = 0; j < p; ++j) {
    if (j == 2) continue;
    CHECK(path.entry_lambda[j] == 0.0);  // orthogonal nulls never enter
    CHECK(path.entry_lambda[j] <= path.lambda_grid[0]);
  }
}

TEST_CASE("entry lambdas never exceed the grid maximum") {
  Eigen::MatrixXd x = random_matrix(70, 12, 52);
  Eigen::VectorXd y = random_vector(70, 53);
  LassoPath path = lasso_path(x, y, 60);
  for (int j = 0; j < 12; ++j) CHECK(path.entry_lambda[j] <= path.lambda_grid[0] + 1e-15);
}

TEST_CASE("content-based sweep order is permutation-equivariant") {
  Eigen::MatrixXd x = random_matrix(40, 6, 54);
  Eigen::VectorXd y = random_vector(40, 55);
  std::vector<int> order = correlation_sweep_order(x, y);

  Eigen::MatrixXd xsw = x;
  xsw.col(1).swap(xsw.col(4));
  std::vector<int> order_sw = correlation_sweep_order(xsw, y);

  auto relabel = [](int j) { return j == 1 ? 4 : (j == 4 ? 1 : j); };
  for (size_t i = 0; i < order.size(); ++i) CHECK(order_sw[i] == relabel(order[i]));
}

TEST_SUITE_END();
