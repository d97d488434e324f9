#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "stabgknock/screening.hpp"
#include "stabgknock/simulate.hpp"
#include "stabgknock/spline.hpp"
#include "test_util.hpp"

using namespace sgk;
using sgk_test::random_matrix;
using sgk_test::random_orthonormal;
using sgk_test::random_vector;

namespace {

// naive O(n^2) oracle for Kendall tau-a
double kendall_naive(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const int n = static_cast<int>(a.size());
  long long cd = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double sa = a[i] == a[j] ? 0.0 : (a[i] < a[j] ? 1.0 : -1.0);
      double sb = b[i] == b[j] ? 0.0 : (b[i] < b[j] ? 1.0 : -1.0);
      cd += static_cast<long long>(sa * sb);
    }
  return double(cd) / (double(n) * (n - 1) / 2.0);
}

Eigen::MatrixXd unit_columns(Eigen::MatrixXd x) {
  for (int j = 0; j < x.cols(); ++j) x.col(j) /= x.col(j).norm();
  return x;
}

}  // namespace

TEST_SUITE_BEGIN("screening");

TEST_CASE("noiseless two-signal recovery matches the exhaustive oracle") {
  Eigen::MatrixXd x = unit_columns(random_matrix(50, 4, 110));
  Eigen::VectorXd beta(4);
  beta << 1, 1, 0, 0;
  Eigen::VectorXd y = x * beta;

  Rng rng(111);
  ScreenResult local = spls_screen(x, y, 2, {}, rng);
  ScreenResult oracle = exhaustive_best_subset(x, y, 2);

  CHECK(local.kept == IndexSet{0, 1});
  CHECK(local.objective <= 1e-10);
  CHECK(oracle.kept == IndexSet{0, 1});
  CHECK(std::abs(local.objective - oracle.objective) <= 1e-12);
}

TEST_CASE("k >= p degenerates to the least-squares fit") {
  Eigen::MatrixXd x = unit_columns(random_matrix(40, 5, 112));
  Eigen::VectorXd y = random_vector(40, 113);
  Rng rng(114);
  ScreenResult res = spls_screen(x, y, 7, {}, rng);
  CHECK(res.kept.size() == 5);
  Eigen::VectorXd ols = x.householderQr().solve(y);
  double ols_obj = (y - x * ols).squaredNorm() / (2.0 * 40);
  CHECK(std::abs(res.objective - ols_obj) <= 1e-10);
}

TEST_CASE("oracle dominance and local search quality") {
  int equal = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    Rng gen(500 + t);
    const int p = 6 + gen.uniform_int(5);  // 6..10
    const int n = 40;
    const int k = 1 + gen.uniform_int(3);  // 1..3
    Eigen::MatrixXd x = unit_columns(random_matrix(n, p, 600 + t));
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    for (int s = 0; s < k; ++s) beta[gen.uniform_int(p)] = gen.normal();
    Eigen::VectorXd y = x * beta + 0.5 * random_vector(n, 700 + t);

    Rng rng(800 + t);
    ScreenResult local = spls_screen(x, y, k, {}, rng);
    ScreenResult oracle = exhaustive_best_subset(x, y, k);
    CHECK(oracle.objective <= local.objective + 1e-12);
    if (local.objective <= oracle.objective * (1 + 1e-9) + 1e-12) ++equal;
  }
  CHECK(equal >= 95);
}

TEST_CASE("exhaustive oracle edge cases") {
  Eigen::MatrixXd x = unit_columns(random_matrix(30, 6, 115));
  Eigen::VectorXd y = random_vector(30, 116);

  ScreenResult null_model = exhaustive_best_subset(x, y, 0);
  CHECK(null_model.kept.empty());
  CHECK(std::abs(null_model.objective - y.squaredNorm() / 60.0) <= 1e-12);

  ScreenResult full = exhaustive_best_subset(x, y, 6);
  Eigen::VectorXd ols = x.householderQr().solve(y);
  CHECK(std::abs(full.objective - (y - x * ols).squaredNorm() / 60.0) <= 1e-10);

  Eigen::MatrixXd wide = random_matrix(20, 16, 117);
  CHECK_THROWS_WITH_AS(exhaustive_best_subset(wide, y.head(20), 2),
                       doctest::Contains("TooLarge"), Error);
}

TEST_CASE("support size and refit optimality invariants") {
  for (int t = 0; t < 10; ++t) {
    Eigen::MatrixXd x = unit_columns(random_matrix(60, 20, 900 + t));
    Eigen::VectorXd y = random_vector(60, 950 + t);
    Rng rng(1000 + t);
    const int k = 4;
    ScreenResult res = spls_screen(x, y, k, {}, rng);
    CHECK(int(res.kept.size()) <= k);

    // restricted normal equations hold on the support
    Eigen::VectorXd grad = x.transpose() * (y - x * res.beta_k);
    for (int j : res.kept) CHECK(std::abs(grad[j]) <= 1e-8 * (1.0 + y.norm()));
    // support matches the nonzeros
    IndexSet nz;
    for (int j = 0; j < 20; ++j)
      if (res.beta_k[j] != 0.0) nz.push_back(j);
    CHECK(nz == res.kept);
  }
}

TEST_CASE("joint-effect signal: spls retains what marginal screening drops") {
  // compound symmetry, signals {0,1,2,3} with coefficient 1 and signal 4 with
  // coefficient -4ρ: feature 4 is marginally uncorrelated with y while every
  // null inherits correlation 4ρ(1-ρ) > 0, so it cannot enter any marginal
  // top-k that excludes most nulls
  const int n = 200, p = 30;
  const double rho = 0.5;
  Scenario sc;
  sc.n = n;
  sc.p = p;
  sc.p1 = 0;
  sc.amplitude = 0;
  sc.rho = rho;
  sc.cov_kind = CovKind::Compound;
  sc.seed = 118;
  GeneratedInstance inst = generate(sc);
  Eigen::MatrixXd x = unit_columns(inst.data.X);
  Eigen::VectorXd y = x.col(0) + x.col(1) + x.col(2) + x.col(3) - 4.0 * rho * x.col(4);
  y += 0.02 * random_vector(n, 119);

  const int k = 6;
  IndexSet sis = sis_screen(x, y, k);
  Rng rng(120);
  ScreenResult spls = spls_screen(x, y, k, {}, rng);

  bool spls_has_joint = std::find(spls.kept.begin(), spls.kept.end(), 4) != spls.kept.end();
  bool sis_has_joint = std::find(sis.begin(), sis.end(), 4) != sis.end();
  CHECK(spls_has_joint);
  CHECK_FALSE(sis_has_joint);
}

TEST_CASE("sis orders a perfectly correlated feature first") {
  Eigen::MatrixXd x = unit_columns(random_matrix(50, 8, 121));
  Eigen::VectorXd y = 2.0 * x.col(0);
  std::vector<int> ranking = sis_ranking(x, y);
  CHECK(ranking[0] == 0);
  CHECK(sis_screen(x, y, 8).size() == 8);
}

TEST_CASE("rrcs is invariant to monotone transforms") {
  Eigen::MatrixXd x = unit_columns(random_matrix(60, 5, 122));
  Eigen::VectorXd y(60);
  for (int i = 0; i < 60; ++i) y[i] = std::exp(2.0 * x(i, 3));  // increasing in x3
  CHECK(kendall_tau(x.col(3), y) == 1.0);
  std::vector<int> ranking = rrcs_ranking(x, y);
  CHECK(ranking[0] == 3);
  CHECK(rrcs_screen(x, y, 5).size() == 5);
}

TEST_CASE("kendall tau of an independent pair obeys the null bound") {
  const int n = 200;
  Eigen::VectorXd a = random_vector(n, 123);
  Eigen::VectorXd b = random_vector(n, 124);
  const double sd = std::sqrt(2.0 * (2 * n + 5) / (9.0 * n * (n - 1.0)));
  CHECK(std::abs(kendall_tau(a, b)) <= 3.0 * sd);
}

TEST_CASE("fast kendall tau matches the naive oracle, including ties") {
  for (int t = 0; t < 20; ++t) {
    Rng rng(1100 + t);
    const int n = 30 + rng.uniform_int(40);
    Eigen::VectorXd a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = rng.uniform() < 0.3 ? std::round(rng.normal()) : rng.normal();
      b[i] = rng.uniform() < 0.3 ? std::round(rng.normal()) : rng.normal();
    }
    CHECK(std::abs(kendall_tau(a, b) - kendall_naive(a, b)) <= 1e-12);
  }
}

TEST_CASE("zero-variance column raises in sis") {
  Eigen::MatrixXd x = random_matrix(30, 3, 125);
  x.col(2).setConstant(1.0);
  Eigen::VectorXd y = random_vector(30, 126);
  CHECK_THROWS_WITH_AS(sis_screen(x, y, 2), doctest::Contains("ZeroVariance"), Error);
}

TEST_CASE("spls ranking puts the kept set first and covers every feature") {
  Eigen::MatrixXd x = unit_columns(random_matrix(80, 12, 127));
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(12);
  beta[2] = 2.0;
  beta[7] = -1.5;
  Eigen::VectorXd y = x * beta + 0.2 * random_vector(80, 128);
  Rng rng(129);
  ScreenResult res = spls_screen(x, y, 3, {}, rng);
  std::vector<int> ranking = spls_ranking(res, x, y);

  REQUIRE(ranking.size() == 12);
  std::vector<int> sorted = ranking;
  std::sort(sorted.begin(), sorted.end());
  for (int j = 0; j < 12; ++j) CHECK(sorted[j] == j);
  IndexSet prefix(ranking.begin(), ranking.begin() + res.kept.size());
  std::sort(prefix.begin(), prefix.end());
  CHECK(prefix == res.kept);
}

TEST_CASE("multistart screening is reproducible from the seed") {
  Eigen::MatrixXd x = unit_columns(random_matrix(100, 40, 130));
  Eigen::VectorXd y = random_vector(100, 131);
  Rng rng1(132), rng2(132);
  ScreenResult a = spls_screen(x, y, 8, {}, rng1);
  ScreenResult b = spls_screen(x, y, 8, {}, rng2);
  CHECK(a.kept == b.kept);
  CHECK(a.objective == b.objective);
}

TEST_SUITE_END();
