#include "stabgknock/gknockoff.hpp"

#include <algorithm>
#include <cmath>

#include "stabgknock/lasso.hpp"

namespace sgk {

namespace {

// p orthonormal columns orthogonal to span(X*), built deterministically by
// extending the Householder QR of X*. When `proj` is usable the candidates
// are pushed through it first, which keeps ŨᵀX* = 0 because X* lives inside
// the projected row space already.
Eigen::MatrixXd orthonormal_complement(const Eigen::MatrixXd& x_star, const Projector* proj) {
  const int n = static_cast<int>(x_star.rows());
  const int p = static_cast<int>(x_star.cols());

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(x_star);
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, p);
  int accepted = 0;

  const int batch = p;
  for (int start = p; start < n && accepted < p; start += batch) {
    const int count = std::min(batch, n - start);
    Eigen::MatrixXd eye = Eigen::MatrixXd::Zero(n, count);
    for (int c = 0; c < count; ++c) eye(start + c, c) = 1.0;
    Eigen::MatrixXd cand = qr.householderQ() * eye;
    if (proj) cand = proj->apply(cand);

    for (int c = 0; c < count && accepted < p; ++c) {
      Eigen::VectorXd v = cand.col(c);
      for (int pass = 0; pass < 2; ++pass)
        for (int k = 0; k < accepted; ++k) v -= u.col(k) * u.col(k).dot(v);
      const double norm = v.norm();
      if (norm > 1e-8) u.col(accepted++) = v / norm;
    }
  }
  if (accepted < p)
    fail_numeric("RankDeficient", "could not assemble an orthonormal complement of rank p");
  return u;
}

Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& a, const KnockoffConfig& cfg,
                                bool* degraded) {
  const int p = static_cast<int>(a.rows());
  if (a.cwiseAbs().maxCoeff() == 0.0) return Eigen::MatrixXd::Zero(p, p);
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) return llt.matrixU();

  Eigen::MatrixXd jittered = a + cfg.jitter * Eigen::MatrixXd::Identity(p, p);
  llt.compute(jittered);
  if (llt.info() == Eigen::Success) {
    *degraded = true;
    return llt.matrixU();
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.eigenvalues().minCoeff() < -cfg.psd_tolerance)
    fail_numeric("CholeskyFailure",
                 "knockoff C-matrix argument is indefinite beyond tolerance after jitter");
  Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  *degraded = true;
  return clipped.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

Eigen::MatrixXd AugmentedDesign::joint() const {
  Eigen::MatrixXd j(n(), 2 * p());
  j.leftCols(p()) = x_star;
  j.rightCols(p()) = x_tilde;
  return j;
}

AugmentedDesign AugmentedDesign::swapped(const IndexSet& a) const {
  AugmentedDesign out = *this;
  for (int j : a) {
    if (j < 0 || j >= p()) fail_validation("BadIndex", "swap index out of range");
    out.x_star.col(j) = x_tilde.col(j);
    out.x_tilde.col(j) = x_star.col(j);
  }
  return out;
}

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& x_star) {
  if (!x_star.allFinite()) fail_validation("NonFiniteInput", "design contains non-finite values");
  Eigen::MatrixXd sigma = x_star.transpose() * x_star;
  return (sigma + sigma.transpose()) / 2.0;
}

Eigen::VectorXd equicorrelated_s(const Eigen::MatrixXd& sigma) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  const double lambda_min = es.eigenvalues().minCoeff();
  if (lambda_min <= 1e-10)
    fail_numeric("SingularGram", "Gram matrix is numerically singular (lambda_min <= 1e-10)");
  return Eigen::VectorXd::Constant(sigma.rows(), std::min(2.0 * lambda_min, 1.0));
}

AugmentedDesign construct_gknockoff(const Eigen::MatrixXd& x_star, const Eigen::VectorXd& s,
                                    const KnockoffConfig& cfg, const Projector* projector) {
  const int n = static_cast<int>(x_star.rows());
  const int p = static_cast<int>(x_star.cols());
  if (s.size() != p) fail_validation("DimensionError", "s must have one entry per column");
  if (n < 2 * p)
    fail_validation("DimensionError",
                    "knockoff construction needs n >= 2p; row-augment the data first");
  if ((s.array() < 0).any()) fail_validation("BadS", "s entries must be nonnegative");

  AugmentedDesign aug;
  aug.x_star = x_star;
  aug.s = s;
  aug.degenerate_s = s.minCoeff() < 1e-12;

  Eigen::MatrixXd sigma = gram_matrix(x_star);
  Eigen::LDLT<Eigen::MatrixXd> sigma_ldlt(sigma);
  if (sigma_ldlt.info() != Eigen::Success || sigma_ldlt.isNegative())
    fail_numeric("SingularGram", "Gram matrix is not positive definite");

  // sigma_inv_s = (Σ*)⁻¹ diag{s}
  Eigen::MatrixXd sigma_inv_s = sigma_ldlt.solve(Eigen::MatrixXd(s.asDiagonal()));
  Eigen::MatrixXd c_arg = s.asDiagonal() * sigma_inv_s;
  c_arg = -c_arg;
  c_arg.diagonal() += 2.0 * s;
  c_arg = (c_arg + c_arg.transpose()) / 2.0;

  Eigen::MatrixXd c = cholesky_factor(c_arg, cfg, &aug.cholesky_degraded);

  const bool use_projector =
      projector != nullptr && projector->rows() == n && n - projector->basis_dim() >= 2 * p;
  Eigen::MatrixXd u = orthonormal_complement(x_star, use_projector ? projector : nullptr);
  aug.u_projected = use_projector;

  aug.x_tilde = x_star - x_star * sigma_inv_s + u * c;

  aug.u_orthogonality = (u.transpose() * x_star).cwiseAbs().maxCoeff();
  aug.residual_gram = (aug.x_tilde.transpose() * aug.x_tilde - sigma).cwiseAbs().maxCoeff();
  aug.residual_cross =
      (aug.x_tilde.transpose() * x_star - (sigma - Eigen::MatrixXd(s.asDiagonal())))
          .cwiseAbs()
          .maxCoeff();
  aug.gram = gram_matrix(aug.joint());
  return aug;
}

double verify_exchangeability(const AugmentedDesign& aug, const IndexSet& swap_set) {
  AugmentedDesign sw = aug.swapped(swap_set);
  Eigen::MatrixXd gram = gram_matrix(sw.joint());
  return (gram - aug.gram).cwiseAbs().maxCoeff();
}

ProjectedData row_augment(const ProjectedData& pd, double sigma2_hat, Rng& rng) {
  const int n = pd.n();
  const int p = pd.p();
  if (!(sigma2_hat > 0)) fail_validation("BadVariance", "sigma2_hat must be positive");
  if (n >= 2 * p) return pd;
  if (n <= p)
    fail_validation("DimensionError", "row augmentation requires p < n");

  const int extra = 2 * p - n;
  ProjectedData out = pd;
  out.x_star.conservativeResize(2 * p, Eigen::NoChange);
  out.x_star.bottomRows(extra).setZero();
  out.y_star.conservativeResize(2 * p);
  const double sd = std::sqrt(sigma2_hat);
  for (int i = 0; i < extra; ++i) out.y_star[n + i] = rng.normal(0.0, sd);
  out.augmented_rows = extra;
  return out;
}

double estimate_noise_variance(const Eigen::MatrixXd& x_star, const Eigen::VectorXd& y_star,
                               Rng& rng) {
  const int n = static_cast<int>(x_star.rows());
  const int folds = std::min(10, n);
  double lambda = cv_lambda(x_star, y_star, folds, 100, rng);
  LassoFit fit = fit_lasso(x_star, y_star, lambda);
  const int support = static_cast<int>(fit.support().size());
  const double rss = (y_star - x_star * fit.beta).squaredNorm();
  double dof = std::max(1, n - support);
  double sigma2 = rss / dof;
  if (!(sigma2 > 0)) sigma2 = y_star.squaredNorm() / std::max(1, n - 1);
  return sigma2;
}

}  // namespace sgk
