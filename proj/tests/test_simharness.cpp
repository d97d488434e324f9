#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "stabgknock/simulate.hpp"
#include "test_util.hpp"

using namespace sgk;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_SUITE_BEGIN("simharness");

TEST_CASE("null amplitude records support but carries no linear signal") {
  Scenario sc;
  sc.n = 50;
  sc.p = 10;
  sc.p1 = 3;
  sc.amplitude = 0.0;
  sc.seed = 140;
  GeneratedInstance inst = generate(sc);
  CHECK(inst.support.size() == 3);
  CHECK(inst.beta.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("independent design: sample correlations concentrate near zero") {
  Scenario sc;
  sc.n = 400;
  sc.p = 12;
  sc.p1 = 0;
  sc.rho = 0.0;
  sc.seed = 141;
  GeneratedInstance inst = generate(sc);

  Eigen::MatrixXd x = inst.data.X;
  Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  for (int j = 0; j < 12; ++j) centered.col(j) /= centered.col(j).norm();
  Eigen::MatrixXd corr = centered.transpose() * centered;
  corr.diagonal().setZero();
  CHECK(corr.cwiseAbs().maxCoeff() <= 4.0 / std::sqrt(400.0));
}

TEST_CASE("compound covariance matches its target") {
  Scenario sc;
  sc.n = 4000;
  sc.p = 8;
  sc.p1 = 0;
  sc.rho = 0.6;
  sc.cov_kind = CovKind::Compound;
  sc.seed = 142;
  GeneratedInstance inst = generate(sc);

  Eigen::MatrixXd x = inst.data.X;
  Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  Eigen::MatrixXd cov = centered.transpose() * centered / (sc.n - 1);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      double expect = i == j ? 1.0 : 0.6;
      CHECK(std::abs(cov(i, j) - expect) <= 0.08);
    }
}

TEST_CASE("ar1 covariance decays geometrically") {
  Scenario sc;
  sc.n = 4000;
  sc.p = 6;
  sc.p1 = 0;
  sc.rho = 0.5;
  sc.seed = 143;
  GeneratedInstance inst = generate(sc);
  Eigen::MatrixXd x = inst.data.X;
  Eigen::MatrixXd cov = (x.transpose() * x) / sc.n;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      CHECK(std::abs(cov(i, j) - std::pow(0.5, std::abs(i - j))) <= 0.08);
}

TEST_CASE("t3 rows keep the scale-matrix correlation structure") {
  Scenario sc;
  sc.n = 6000;
  sc.p = 5;
  sc.p1 = 0;
  sc.rho = 0.5;
  sc.design_dist = DesignDist::StudentT3;
  sc.seed = 144;
  GeneratedInstance inst = generate(sc);
  Eigen::MatrixXd x = inst.data.X;
  Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  for (int j = 0; j < 5; ++j) centered.col(j) /= centered.col(j).norm();
  Eigen::MatrixXd corr = centered.transpose() * centered;
  // heavy tails widen the band; the geometric decay must still show
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      CHECK(std::abs(corr(i, j) - std::pow(0.5, std::abs(i - j))) <= 0.15);
}

TEST_CASE("generation is deterministic given the seed") {
  Scenario sc;
  sc.n = 30;
  sc.p = 6;
  sc.p1 = 2;
  sc.amplitude = 0.8;
  sc.seed = 145;
  GeneratedInstance a = generate(sc);
  GeneratedInstance b = generate(sc);
  CHECK((a.data.X - b.data.X).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.data.Y - b.data.Y).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.support == b.support);
}

TEST_CASE("run_experiment on canned selectors") {
  Scenario sc;
  sc.n = 40;
  sc.p = 12;
  sc.p1 = 4;
  sc.amplitude = 1.0;
  sc.seed = 146;

  // empty selector: |Ŝ|∨1 convention gives zero on both metrics
  MetricReport empty_sel =
      run_experiment(sc, [](const DesignTriple&, uint64_t) { return IndexSet{}; }, 3);
  CHECK(empty_sel.fdr_hat == 0.0);
  CHECK(empty_sel.power_hat == 0.0);

  MetricReport all = run_experiment(
      sc,
      [&](const DesignTriple& d, uint64_t) {
        IndexSet everything(d.p());
        for (int j = 0; j < d.p(); ++j) everything[j] = j;
        return everything;
      },
      3);
  CHECK(std::abs(all.fdr_hat - (12.0 - 4.0) / 12.0) <= 1e-12);
  CHECK(all.power_hat == 1.0);
}

TEST_CASE("perfect selector scores zero fdr and unit power") {
  Scenario sc;
  sc.n = 30;
  sc.p = 8;
  sc.p1 = 3;
  sc.amplitude = 1.0;
  sc.seed = 147;

  MetricReport rep = run_experiment(
      sc,
      [&](const DesignTriple&, uint64_t method_seed) {
        // replay the replicate's generation seed: method_seed derives from it
        for (int r = 0; r < 3; ++r) {
          uint64_t rep_seed = derive_seed(sc.seed, "replicate", r);
          if (derive_seed(rep_seed, "method") == method_seed) {
            Scenario sr = sc;
            sr.seed = rep_seed;
            return generate(sr).support;
          }
        }
        return IndexSet{};
      },
      3);
  CHECK(rep.fdr_hat == 0.0);
  CHECK(rep.power_hat == 1.0);
}

TEST_CASE("screening metrics on hand-checked logs") {
  std::vector<IndexSet> kept = {{0, 1, 2}, {0, 1, 2}};
  std::vector<IndexSet> supports = {{0, 1}, {0, 1}};
  std::vector<std::vector<int>> rankings = {{0, 1, 2, 3}, {2, 0, 1, 3}};
  MetricReport rep = screening_metrics(kept, supports, rankings);
  CHECK(std::abs(rep.screen_fdr - 1.0 / 3.0) <= 1e-12);
  CHECK(rep.prr == 1.0);
  CHECK(rep.ssr == 1.0);
  CHECK(rep.mms_quantiles.at(50) == 2.0);  // second replicate needs depth 3
  CHECK(rep.mms_quantiles.at(5) == 2.0);
  CHECK(rep.mms_quantiles.at(95) == 3.0);

  std::vector<IndexSet> perfect = {{0, 1}, {0, 1}};
  MetricReport perfect_rep = screening_metrics(perfect, supports, {});
  CHECK(perfect_rep.screen_fdr == 0.0);
  CHECK(perfect_rep.prr == 1.0);
  CHECK(perfect_rep.ssr == 1.0);
  CHECK(perfect_rep.mms_quantiles.empty());
}

TEST_CASE("mms equals p1 when the ranking lists all signals first") {
  std::vector<IndexSet> kept = {{0, 1, 2}};
  std::vector<IndexSet> supports = {{0, 1, 2}};
  std::vector<std::vector<int>> rankings = {{2, 0, 1, 3, 4}};
  MetricReport rep = screening_metrics(kept, supports, rankings);
  for (int pct : {5, 25, 50, 75, 95}) CHECK(rep.mms_quantiles.at(pct) == 3.0);
}

TEST_CASE("csv export round-trips and is deterministic") {
  Scenario sc;
  sc.n = 20;
  sc.p = 5;
  sc.p1 = 2;
  sc.amplitude = 0.7;
  sc.rho = 0.25;
  sc.seed = 148;
  MetricReport rep;
  rep.has_selection = true;
  rep.fdr_hat = 1.0 / 3.0;
  rep.fdr_se = 0.0123456789012345678;
  rep.power_hat = 0.5;
  rep.power_se = 0.25;
  std::vector<ResultRow> rows = report_rows(rep, sc, "test-method", 0.1);

  const std::string path = temp_path("sgk_results_test.csv");
  export_results(rows, path, "{}");
  std::vector<ResultRow> loaded = read_results(path);
  CHECK(rows == loaded);

  const std::string path2 = temp_path("sgk_results_test2.csv");
  export_results(rows, path2, "{}");
  std::ifstream f1(path), f2(path2);
  std::stringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  CHECK(s1.str() == s2.str());

  std::filesystem::remove(path);
  std::filesystem::remove(path + ".manifest.json");
  std::filesystem::remove(path2);
  std::filesystem::remove(path2 + ".manifest.json");
}

TEST_CASE("empty report writes a header-only csv") {
  const std::string path = temp_path("sgk_results_empty.csv");
  export_results({}, path, "{}");
  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "scenario_id,method,q,A,rho,n,p,p1,metric,value,stderr,seed");
  CHECK_FALSE(std::getline(in, line));
  CHECK(read_results(path).empty());
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".manifest.json");
}

TEST_SUITE_END();
