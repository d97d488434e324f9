#include "stabgknock/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stabgknock/parallel.hpp"

namespace sgk {

namespace {

LassoFit subsample_fit(const Eigen::MatrixXd& joint, const Eigen::VectorXd& y,
                       const IndexSet& rows, double lambda) {
  Eigen::MatrixXd xr = joint(rows, Eigen::all);
  Eigen::VectorXd yr = y(rows);
  // Content-derived sweep order keeps the solver equivariant under
  // feature/knockoff column swaps.
  std::vector<int> order = correlation_sweep_order(xr, yr);
  LassoOptions opt;
  opt.sweep_order = &order;
  return fit_lasso(xr, yr, lambda, opt);
}

// Gram of a row subset plus inner products; the complement's Gram follows by
// subtraction from the full-data one, so each replicate pays for one half.
struct HalfGram {
  Eigen::MatrixXd gram;
  Eigen::VectorXd xty;
  double yty = 0;
  int n = 0;
};

HalfGram half_gram(const Eigen::MatrixXd& joint, const Eigen::VectorXd& y,
                   const IndexSet& rows) {
  HalfGram h;
  const int q = static_cast<int>(joint.cols());
  Eigen::MatrixXd xr = joint(rows, Eigen::all);
  Eigen::VectorXd yr = y(rows);
  h.gram = Eigen::MatrixXd::Zero(q, q);
  h.gram.selfadjointView<Eigen::Lower>().rankUpdate(xr.transpose());
  h.gram.triangularView<Eigen::StrictlyUpper>() = h.gram.transpose();
  h.xty.noalias() = xr.transpose() * yr;
  h.yty = yr.squaredNorm();
  h.n = static_cast<int>(rows.size());
  return h;
}

IndexSet gram_pair_intersection(const HalfGram& a, const HalfGram& b, double lambda) {
  auto fit_one = [&](const HalfGram& h) {
    std::vector<int> order(h.xty.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
      double si = std::abs(h.xty[i]), sj = std::abs(h.xty[j]);
      if (si != sj) return si > sj;
      return i < j;
    });
    LassoOptions opt;
    opt.sweep_order = &order;
    return fit_lasso_gram(h.gram, h.xty, h.yty, h.n, lambda, opt);
  };
  LassoFit fa = fit_one(a);
  LassoFit fb = fit_one(b);
  if (!fa.converged || !fb.converged)
    fail_numeric("NoConvergence", "half-sample lasso fit did not converge");
  return intersect_support(fa.beta, fb.beta);
}

}  // namespace

SubsamplePlan make_plan(int n, int replications, uint64_t seed) {
  if (n < 4) fail_validation("DimensionError", "subsampling needs n >= 4");
  if (replications < 1) fail_validation("BadPlan", "need at least one replication");
  SubsamplePlan plan;
  plan.n = n;
  plan.seed = seed;
  plan.pairs.reserve(replications);
  const int half = n / 2;
  for (int l = 0; l < replications; ++l) {
    Rng rng(derive_seed(seed, "subsample", l));
    std::vector<int> perm = rng.permutation(n);
    IndexSet first(perm.begin(), perm.begin() + half);
    IndexSet second(perm.begin() + half, perm.end());
    std::sort(first.begin(), first.end());
    std::sort(second.begin(), second.end());
    plan.pairs.emplace_back(std::move(first), std::move(second));
  }
  return plan;
}

IndexSet intersect_support(const Eigen::VectorXd& b1, const Eigen::VectorXd& b2) {
  if (b1.size() != b2.size()) fail_validation("DimensionError", "support vectors differ in length");
  IndexSet out;
  for (int j = 0; j < b1.size(); ++j)
    if (b1[j] != 0.0 && b2[j] != 0.0) out.push_back(j);
  return out;
}

IndexSet replicate_intersection(const Eigen::MatrixXd& joint, const Eigen::VectorXd& y,
                                const IndexSet& rows_a, const IndexSet& rows_b, double lambda) {
  LassoFit fa = subsample_fit(joint, y, rows_a, lambda);
  LassoFit fb = subsample_fit(joint, y, rows_b, lambda);
  if (!fa.converged || !fb.converged)
    fail_numeric("NoConvergence", "half-sample lasso fit did not converge");
  return intersect_support(fa.beta, fb.beta);
}

std::pair<KnockoffStats, SelectionFrequencies> spd_statistics(const AugmentedDesign& aug,
                                                              const Eigen::VectorXd& y_star,
                                                              const SubsamplePlan& plan,
                                                              const SpdOptions& opt) {
  const int p = aug.p();
  if (plan.n != aug.n())
    fail_validation("DimensionError", "subsample plan does not span the augmented rows");
  Eigen::MatrixXd joint = aug.joint();

  double shared_lambda = 0;
  if (opt.lambda_rule == LambdaRule::GlobalCv) {
    Rng cv_rng(derive_seed(opt.seed, "spd-cv"));
    shared_lambda = cv_lambda(joint, y_star, opt.cv_folds, opt.grid_size, cv_rng);
  }

  const int L = plan.replications();
  std::vector<IndexSet> supports(L);
  std::vector<std::string> failures(L);

  // full-data Gram, shared: each replicate's complement half is a subtraction
  HalfGram full;
  {
    IndexSet all(aug.n());
    std::iota(all.begin(), all.end(), 0);
    full = half_gram(joint, y_star, all);
  }

  parallel_for(L, [&](int l) {
    const auto& [rows_a, rows_b] = plan.pairs[l];
    try {
      double lambda = shared_lambda;
      if (opt.lambda_rule == LambdaRule::PerReplicateCv) {
        Eigen::MatrixXd xa = joint(rows_a, Eigen::all);
        Rng rng_a(derive_seed(opt.seed, "spd-cv-rep", 2 * l));
        const int fa = std::min(opt.cv_folds, static_cast<int>(rows_a.size()));
        lambda = cv_lambda(xa, y_star(rows_a), fa, opt.grid_size, rng_a);
      }
      HalfGram ga = half_gram(joint, y_star, rows_a);
      HalfGram gb;
      gb.gram = full.gram - ga.gram;
      gb.xty = full.xty - ga.xty;
      gb.yty = full.yty - ga.yty;
      gb.n = full.n - ga.n;
      supports[l] = gram_pair_intersection(ga, gb, lambda);
    } catch (const Error& e) {
      failures[l] = e.what();
    }
  });
  for (int l = 0; l < L; ++l)
    if (!failures[l].empty())
      fail_numeric("NoConvergence",
                   "replicate " + std::to_string(l) + " failed: " + failures[l]);

  SelectionFrequencies freq;
  freq.pi_tilde = Eigen::VectorXd::Zero(2 * p);
  freq.per_replicate_supports = std::move(supports);
  for (const IndexSet& s : freq.per_replicate_supports)
    for (int j : s) freq.pi_tilde[j] += 1.0;
  freq.pi_tilde /= static_cast<double>(L);

  KnockoffStats stats;
  stats.kind = StatKind::Spd;
  stats.lambda_used = shared_lambda;
  stats.plan = plan;
  stats.w = freq.pi_tilde.head(p) - freq.pi_tilde.tail(p);
  return {std::move(stats), std::move(freq)};
}

KnockoffStats lsm_statistics(const AugmentedDesign& aug, const Eigen::VectorXd& y_star,
                             int grid_size) {
  const int p = aug.p();
  LassoPath path = lasso_path(aug.joint(), y_star, grid_size);
  KnockoffStats stats;
  stats.kind = StatKind::Lsm;
  stats.grid_size = grid_size;
  stats.w.resize(p);
  for (int j = 0; j < p; ++j) {
    const double z = path.entry_lambda[j];
    const double zt = path.entry_lambda[j + p];
    if (z == zt)
      stats.w[j] = 0.0;
    else
      stats.w[j] = std::max(z, zt) * (z > zt ? 1.0 : -1.0);
  }
  return stats;
}

KnockoffStats lcd_statistics(const AugmentedDesign& aug, const Eigen::VectorXd& y_star,
                             double lambda) {
  const int p = aug.p();
  Eigen::MatrixXd joint = aug.joint();
  std::vector<int> order = correlation_sweep_order(joint, y_star);
  LassoOptions opt;
  opt.sweep_order = &order;
  LassoFit fit = fit_lasso(joint, y_star, lambda, opt);
  if (!fit.converged) fail_numeric("NoConvergence", "lasso fit did not converge");

  KnockoffStats stats;
  stats.kind = StatKind::Lcd;
  stats.lambda_used = lambda;
  stats.w.resize(p);
  for (int j = 0; j < p; ++j)
    stats.w[j] = std::abs(fit.beta[j]) - std::abs(fit.beta[j + p]);
  return stats;
}

bool check_antisymmetry(const StatisticFn& fn, const AugmentedDesign& aug,
                        const Eigen::VectorXd& y_star, int j, uint64_t seed, double tol) {
  if (j < 0 || j >= aug.p()) fail_validation("BadIndex", "feature index out of range");
  Eigen::VectorXd base = fn(aug, y_star, seed);
  Eigen::VectorXd flipped = fn(aug.swapped({j}), y_star, seed);
  if (std::abs(flipped[j] + base[j]) > tol) return false;
  for (int k = 0; k < base.size(); ++k) {
    if (k == j) continue;
    if (std::abs(flipped[k] - base[k]) > tol) return false;
  }
  return true;
}

}  // namespace sgk
