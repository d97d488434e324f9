#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "stabgknock/pipeline.hpp"
#include "stabgknock/simulate.hpp"
#include "test_util.hpp"

using namespace sgk;

namespace {

PipelineConfig fast_config(uint64_t seed) {
  PipelineConfig cfg;
  cfg.subsample_replications = 15;
  cfg.grid_size = 40;
  cfg.seed = seed;
  cfg.multistarts = 4;
  return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("pipeline");

TEST_CASE("split plan is disjoint, exhaustive and deterministic") {
  SplitPlan plan = split_data(500, 250, 150);
  CHECK(plan.idx1.size() == 250);
  CHECK(plan.idx2.size() == 250);
  IndexSet all = plan.idx1;
  all.insert(all.end(), plan.idx2.begin(), plan.idx2.end());
  std::sort(all.begin(), all.end());
  for (int i = 0; i < 500; ++i) CHECK(all[i] == i);

  SplitPlan again = split_data(500, 250, 150);
  CHECK(plan.idx1 == again.idx1);

  SplitPlan tiny = split_data(10, 9, 151);
  CHECK(tiny.idx2.size() == 1);
  CHECK_THROWS_AS(split_data(10, 10, 152), Error);
}

TEST_CASE("single-stage pipeline finds a strong signal") {
  Scenario sc;
  sc.n = 200;
  sc.p = 25;
  sc.p1 = 1;
  sc.amplitude = 1.5;
  sc.rho = 0.2;
  sc.seed = 153;
  GeneratedInstance inst = generate(sc);

  PipelineConfig cfg = fast_config(154);
  cfg.q = 0.2;
  // knockoff+ cannot return fewer than ceil(1/q) discoveries, so a lone
  // signal is only reachable with the plain knockoff threshold
  cfg.mode = ThresholdMode::Knockoff;
  PipelineResult res = stab_gknock(inst.data, cfg);
  CHECK(res.algorithm == "stab-gknock");
  CHECK(res.construction_residual_gram <= 1e-6);
  CHECK(contains_all(res.outcome.selected, inst.support));
}

TEST_CASE("pipeline runs are bit-reproducible for a fixed seed") {
  Scenario sc;
  sc.n = 120;
  sc.p = 15;
  sc.p1 = 3;
  sc.amplitude = 1.0;
  sc.rho = 0.3;
  sc.seed = 155;
  GeneratedInstance inst = generate(sc);

  PipelineConfig cfg = fast_config(156);
  PipelineResult a = stab_gknock(inst.data, cfg);
  PipelineResult b = stab_gknock(inst.data, cfg);
  CHECK((a.w - b.w).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.outcome.selected == b.outcome.selected);
  CHECK(a.outcome.threshold == b.outcome.threshold);
}

TEST_CASE("row augmentation engages between p and 2p samples") {
  Scenario sc;
  sc.n = 90;
  sc.p = 50;
  sc.p1 = 2;
  sc.amplitude = 1.2;
  sc.rho = 0.2;
  sc.seed = 157;
  GeneratedInstance inst = generate(sc);

  PipelineConfig cfg = fast_config(158);
  PipelineResult res = stab_gknock(inst.data, cfg);
  CHECK(res.augmented_rows == 10);
  CHECK(res.construction_residual_gram <= 1e-6);

  cfg.allow_row_augment = false;
  CHECK_THROWS_WITH_AS(stab_gknock(inst.data, cfg), doctest::Contains("DimensionError"), Error);
}

TEST_CASE("two-stage pipeline respects containment and original indexing") {
  Scenario sc;
  sc.n = 160;
  sc.p = 120;
  sc.p1 = 3;
  sc.amplitude = 1.5;
  sc.rho = 0.2;
  sc.seed = 159;
  GeneratedInstance inst = generate(sc);

  PipelineConfig cfg = fast_config(160);
  cfg.q = 0.25;
  cfg.screen_k = 20;
  PipelineResult res = spls_stab_gknock(inst.data, cfg);

  CHECK(res.algorithm == "spls-stab-gknock");
  CHECK(res.screened.size() <= 20);
  CHECK(contains_all(res.screened, res.outcome.selected));  // Ŝ ⊆ Ŝ₁
  for (int j : res.outcome.selected) {
    CHECK(j >= 0);
    CHECK(j < 120);
  }
  CHECK(res.w_columns == res.screened);
}

TEST_CASE("two-stage pipeline validates the screen size") {
  Scenario sc;
  sc.n = 60;
  sc.p = 80;
  sc.p1 = 2;
  sc.amplitude = 1.0;
  sc.seed = 161;
  GeneratedInstance inst = generate(sc);
  PipelineConfig cfg = fast_config(162);
  cfg.screen_k = 40;  // exceeds floor(n2/2) = 15
  CHECK_THROWS_WITH_AS(spls_stab_gknock(inst.data, cfg), doctest::Contains("BadSparsity"), Error);
}

TEST_CASE("auto dispatch selects the stage by dimension") {
  Scenario sc;
  sc.n = 120;
  sc.p = 12;
  sc.p1 = 2;
  sc.amplitude = 1.2;
  sc.seed = 163;
  GeneratedInstance low = generate(sc);
  PipelineConfig cfg = fast_config(164);
  CHECK(auto_select(low.data, cfg).algorithm == "stab-gknock");

  cfg.screen_k = 10;
  CHECK(auto_select(low.data, cfg, true).algorithm == "spls-stab-gknock");

  Scenario hi = sc;
  hi.p = 150;
  hi.seed = 165;
  GeneratedInstance high = generate(hi);
  PipelineConfig cfg2 = fast_config(166);
  cfg2.screen_k = 25;
  CHECK(auto_select(high.data, cfg2).algorithm == "spls-stab-gknock");
}

TEST_CASE("screening bottleneck still completes with bounded power") {
  // k below the true support size: power is capped at k/p1 but the pipeline
  // must run through
  Scenario sc;
  sc.n = 140;
  sc.p = 60;
  sc.p1 = 6;
  sc.amplitude = 2.0;
  sc.rho = 0.1;
  sc.seed = 167;
  GeneratedInstance inst = generate(sc);
  PipelineConfig cfg = fast_config(168);
  cfg.screen_k = 3;
  cfg.q = 0.3;
  PipelineResult res = spls_stab_gknock(inst.data, cfg);
  CHECK(res.outcome.selected.size() <= 3);
}

TEST_CASE("config validation rejects a bad level") {
  PipelineConfig cfg = fast_config(169);
  cfg.q = 1.5;
  Scenario sc;
  sc.n = 50;
  sc.p = 5;
  sc.p1 = 1;
  sc.amplitude = 1;
  sc.seed = 170;
  GeneratedInstance inst = generate(sc);
  CHECK_THROWS_WITH_AS(stab_gknock(inst.data, cfg), doctest::Contains("BadLevel"), Error);
}

TEST_SUITE_END();
