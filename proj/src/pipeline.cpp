#include "stabgknock/pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace sgk {

namespace {

Eigen::VectorXd compute_statistic(const AugmentedDesign& aug, const Eigen::VectorXd& y_star,
                                  const PipelineConfig& cfg, uint64_t seed,
                                  double* lambda_used) {
  switch (cfg.statistic) {
    case StatKind::Spd: {
      SubsamplePlan plan =
          make_plan(aug.n(), cfg.subsample_replications, derive_seed(seed, "plan"));
      SpdOptions opt;
      opt.lambda_rule = cfg.lambda_rule;
      opt.cv_folds = cfg.cv_folds;
      opt.grid_size = cfg.grid_size;
      opt.seed = seed;
      auto [stats, freq] = spd_statistics(aug, y_star, plan, opt);
      *lambda_used = stats.lambda_used;
      return stats.w;
    }
    case StatKind::Lsm: {
      KnockoffStats stats = lsm_statistics(aug, y_star, cfg.grid_size);
      *lambda_used = 0;
      return stats.w;
    }
    case StatKind::Lcd: {
      Rng cv_rng(derive_seed(seed, "lcd-cv"));
      double lambda =
          cv_lambda(aug.joint(), y_star, std::min(cfg.cv_folds, aug.n()), cfg.grid_size, cv_rng);
      KnockoffStats stats = lcd_statistics(aug, y_star, lambda);
      *lambda_used = lambda;
      return stats.w;
    }
  }
  fail_validation("BadStatistic", "unknown statistic kind");
}

SplineSpec stage_spline_spec(const DesignTriple& d, const PipelineConfig& cfg) {
  SplineSpec spec = cfg.spline;
  if (cfg.spline_bic && spec.interior_knots < 0) {
    int cap = std::max(0, std::min(d.n() / 4 - spec.order, 25));
    spec.interior_knots = select_interior_knots_bic(d.U, d.Y, spec.order, cap);
  }
  return resolve_spline_spec(spec, d.n());
}

}  // namespace

void PipelineConfig::validate() const {
  if (!(q > 0 && q < 1)) fail_validation("BadLevel", "q must lie in (0,1)");
  if (subsample_replications < 1) fail_validation("BadPlan", "L must be >= 1");
  if (cv_folds < 2) fail_validation("BadFolds", "cv_folds must be >= 2");
  if (grid_size < 2) fail_validation("BadGrid", "grid_size must be >= 2");
  if (multistarts < 1) fail_validation("BadConfig", "multistarts must be >= 1");
}

SplitPlan split_data(int n, int n1, uint64_t seed) {
  if (n1 < 1 || n1 >= n) fail_validation("BadSplit", "need 1 <= n1 < n");
  Rng rng(derive_seed(seed, "split"));
  SplitPlan plan;
  plan.idx1 = rng.sample_without_replacement(n, n1);
  std::vector<char> in1(n, 0);
  for (int i : plan.idx1) in1[i] = 1;
  plan.idx2.reserve(n - n1);
  for (int i = 0; i < n; ++i)
    if (!in1[i]) plan.idx2.push_back(i);
  return plan;
}

PipelineResult stab_gknock(const DesignTriple& d, const PipelineConfig& cfg) {
  cfg.validate();
  d.validate();
  const int n = d.n();
  const int p = d.p();

  SplineSpec spec = stage_spline_spec(d, cfg);
  Projector projector(Eigen::MatrixXd::Identity(1, 1));
  ProjectedData pd = project_data(d, spec, &projector);

  if (n < 2 * p) {
    if (!cfg.allow_row_augment)
      fail_validation("DimensionError",
                      "n < 2p and row augmentation is disabled; cannot build knockoffs");
    if (n <= p)
      fail_validation("DimensionError", "knockoff stage requires p < n");
    Rng sigma_rng(derive_seed(cfg.seed, "sigma2"));
    double sigma2 = estimate_noise_variance(pd.x_star, pd.y_star, sigma_rng);
    Rng aug_rng(derive_seed(cfg.seed, "row-augment"));
    pd = row_augment(pd, sigma2, aug_rng);
    projector = projector.padded(pd.augmented_rows);
  }

  Eigen::VectorXd s;
  if (cfg.knockoff.s_mode == SMode::UserSupplied) {
    if (!cfg.knockoff.s_user || cfg.knockoff.s_user->size() != p)
      fail_validation("BadS", "user-supplied s has the wrong length");
    s = *cfg.knockoff.s_user;
  } else {
    s = equicorrelated_s(gram_matrix(pd.x_star));
  }

  AugmentedDesign aug = construct_gknockoff(pd.x_star, s, cfg.knockoff, &projector);

  PipelineResult res;
  res.algorithm = "stab-gknock";
  res.lambda_used = 0;
  res.w = compute_statistic(aug, pd.y_star, cfg, cfg.seed, &res.lambda_used);
  res.outcome = select(res.w, cfg.q, cfg.mode);
  res.outcome.seed = cfg.seed;
  res.outcome.config_digest = cfg.digest;
  res.w_columns.resize(p);
  for (int j = 0; j < p; ++j) res.w_columns[j] = j;
  res.col_scales = pd.col_scales;
  res.construction_residual_gram = aug.residual_gram;
  res.construction_residual_cross = aug.residual_cross;
  res.augmented_rows = pd.augmented_rows;
  res.basis_dim = spec.basis_dim();
  res.cholesky_degraded = aug.cholesky_degraded;
  res.u_projected = aug.u_projected;
  return res;
}

PipelineResult spls_stab_gknock(const DesignTriple& d, const PipelineConfig& cfg) {
  cfg.validate();
  d.validate();
  const int n = d.n();

  const int n1 = cfg.split_n1 > 0 ? cfg.split_n1 : n / 2;
  SplitPlan plan = split_data(n, n1, cfg.seed);
  const int n2 = static_cast<int>(plan.idx2.size());

  int k = cfg.screen_k;
  if (k <= 0) k = std::min(static_cast<int>(n / std::log(double(n))), n2 / 2);
  if (k < 1 || k > n2 / 2)
    fail_validation("BadSparsity",
                    "screen size k must satisfy 1 <= k <= floor(n2/2), got k=" +
                        std::to_string(k));

  // Stage one: joint screening on the first half.
  DesignTriple d1 = d.rows(plan.idx1);
  SplineSpec spec1 = stage_spline_spec(d1, cfg);
  ProjectedData pd1 = project_data(d1, spec1);
  ScreenOptions sopt;
  sopt.multistarts = cfg.multistarts;
  Rng screen_rng(derive_seed(cfg.seed, "screen"));
  ScreenResult screen = spls_screen(pd1.x_star, pd1.y_star, k, sopt, screen_rng);
  if (screen.kept.empty())
    fail_validation("ScreeningTooAggressive", "screening stage returned an empty set");

  // Stage two: single-stage selection on the complementary rows, restricted
  // to the screened columns; the basis is re-fit on those rows.
  DesignTriple d2 = d.rows(plan.idx2).columns(screen.kept);
  PipelineConfig cfg2 = cfg;
  cfg2.seed = derive_seed(cfg.seed, "stage2");
  PipelineResult inner = stab_gknock(d2, cfg2);

  PipelineResult res = inner;
  res.algorithm = "spls-stab-gknock";
  res.screened = screen.kept;
  res.screen_k = k;
  res.outcome.seed = cfg.seed;
  res.outcome.config_digest = cfg.digest;
  res.outcome.selected.clear();
  for (int j : inner.outcome.selected) res.outcome.selected.push_back(screen.kept[j]);
  res.w_columns = screen.kept;
  return res;
}

PipelineResult auto_select(const DesignTriple& d, const PipelineConfig& cfg,
                           bool force_two_stage) {
  if (!force_two_stage && d.p() < d.n() / 2.0) return stab_gknock(d, cfg);
  return spls_stab_gknock(d, cfg);
}

}  // namespace sgk
