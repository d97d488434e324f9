#include "stabgknock/spline.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace sgk {

namespace {

double quantile_type7(const std::vector<double>& sorted, double prob) {
  const int n = static_cast<int>(sorted.size());
  if (n == 1) return sorted[0];
  double pos = prob * (n - 1);
  int lo = static_cast<int>(std::floor(pos));
  int hi = std::min(lo + 1, n - 1);
  double frac = pos - lo;
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

// de Boor's recurrence for the `order` B-splines that are nonzero on the
// interval [t[ell], t[ell+1]). Writes values for function indices
// ell-order+1 .. ell into out (size order).
void bsplvb(const std::vector<double>& t, int order, int ell, double u, std::vector<double>& out) {
  out.assign(order, 0.0);
  out[0] = 1.0;
  std::vector<double> deltal(order, 0.0), deltar(order, 0.0);
  for (int j = 1; j < order; ++j) {
    deltar[j] = t[ell + j] - u;
    deltal[j] = u - t[ell + 1 - j];
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      double term = out[r] / (deltar[r + 1] + deltal[j - r]);
      out[r] = saved + deltar[r + 1] * term;
      saved = deltal[j - r] * term;
    }
    out[j] = saved;
  }
}

void check_basis_rank(const Eigen::MatrixXd& z) {
  Eigen::MatrixXd gram = z.transpose() * z;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  double lo = es.eigenvalues().minCoeff();
  double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0) || hi / lo > 1e12) {
    fail_numeric("RankDeficient", "basis matrix is numerically rank deficient (condition "
                 "number of ZᵀZ exceeds 1e12)");
  }
}

}  // namespace

int default_interior_knots(int n) {
  return static_cast<int>(std::floor(std::pow(static_cast<double>(n), 1.0 / 9.0)));
}

SplineSpec resolve_spline_spec(SplineSpec spec, int n) {
  if (spec.order < 1) fail_validation("BadSplineSpec", "spline order must be >= 1");
  if (spec.interior_knots < 0) spec.interior_knots = default_interior_knots(n);
  return spec;
}

Eigen::MatrixXd build_basis(const Eigen::VectorXd& u, const SplineSpec& spec,
                            std::vector<double>* knots_out) {
  const int n = static_cast<int>(u.size());
  const int m = spec.order;
  const int ks = spec.interior_knots;
  if (m < 1) fail_validation("BadSplineSpec", "spline order must be >= 1");
  if (ks < 0) fail_validation("BadSplineSpec", "interior knot count must be resolved (>= 0)");
  const int K = ks + m;
  if (n <= K) fail_validation("BadSplineSpec", "need n > basis dimension K");
  if (!u.allFinite()) fail_validation("NonFiniteInput", "covariate contains non-finite values");

  std::vector<double> su(u.data(), u.data() + n);
  std::sort(su.begin(), su.end());
  const double a = su.front();
  const double b = su.back();

  if (ks > 0) {
    int distinct = 1;
    for (int i = 1; i < n; ++i)
      if (su[i] != su[i - 1]) ++distinct;
    if (distinct < ks)
      fail_validation("DegenerateKnots", "fewer distinct covariate values than interior knots");
  }

  if (!(b > a)) {
    if (m == 1 && ks == 0) {
      if (knots_out) *knots_out = {a, a};
      return Eigen::MatrixXd::Ones(n, 1);
    }
    fail_validation("DegenerateKnots", "covariate range is a single point");
  }

  std::vector<double> interior(ks);
  for (int i = 0; i < ks; ++i) {
    double prob = static_cast<double>(i + 1) / (ks + 1);
    interior[i] = spec.knot_rule == KnotRule::Quantile ? quantile_type7(su, prob)
                                                       : a + prob * (b - a);
  }
  for (int i = 0; i < ks; ++i) {
    bool inside = interior[i] > a && interior[i] < b;
    bool increasing = i == 0 || interior[i] > interior[i - 1];
    if (!inside || !increasing)
      fail_validation("DegenerateKnots", "interior knots are not strictly increasing inside "
                      "the covariate range");
  }

  // Clamped knot vector: m copies of each boundary around the interior knots.
  std::vector<double> t(K + m);
  for (int i = 0; i < m; ++i) t[i] = a;
  for (int i = 0; i < ks; ++i) t[m + i] = interior[i];
  for (int i = 0; i < m; ++i) t[K + i] = b;

  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, K);
  std::vector<double> vals;
  for (int i = 0; i < n; ++i) {
    double ui = u[i];
    // Interval index ell in [m-1, K-1] with t[ell] <= u < t[ell+1]; u = b maps
    // to the last interval so the right boundary keeps the partition of unity.
    int ell = m - 1;
    while (ell < K - 1 && ui >= t[ell + 1]) ++ell;
    bsplvb(t, m, ell, ui, vals);
    for (int r = 0; r < m; ++r) z(i, ell - m + 1 + r) = vals[r];
  }

  check_basis_rank(z);
  if (knots_out) *knots_out = t;
  return z;
}

int select_interior_knots_bic(const Eigen::VectorXd& u, const Eigen::VectorXd& y, int order,
                              int max_interior) {
  const int n = static_cast<int>(u.size());
  int best = 0;
  double best_bic = std::numeric_limits<double>::infinity();
  for (int ks = 0; ks <= max_interior; ++ks) {
    SplineSpec spec{order, ks, KnotRule::Quantile};
    if (n <= spec.basis_dim()) break;
    Eigen::MatrixXd z;
    try {
      z = build_basis(u, spec);
    } catch (const Error&) {
      break;  // knots degenerate past this point
    }
    Eigen::VectorXd fit = z * z.householderQr().solve(y);
    double rss = (y - fit).squaredNorm();
    double bic = n * std::log(std::max(rss, 1e-300) / n) + spec.basis_dim() * std::log(double(n));
    if (bic < best_bic - 1e-12) {
      best_bic = bic;
      best = ks;
    }
  }
  return best;
}

Projector::Projector(const Eigen::MatrixXd& z) {
  check_basis_rank(z);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
  q_ = qr.householderQ() * Eigen::MatrixXd::Identity(z.rows(), z.cols());
}

Eigen::VectorXd Projector::apply(const Eigen::VectorXd& v) const {
  return v - q_ * (q_.transpose() * v);
}

Eigen::MatrixXd Projector::apply(const Eigen::MatrixXd& m) const {
  return m - q_ * (q_.transpose() * m);
}

Eigen::MatrixXd Projector::dense() const {
  const int n = rows();
  if (n > 4000)
    fail_validation("ProjectorTooLarge", "dense projector is limited to n <= 4000");
  return Eigen::MatrixXd::Identity(n, n) - q_ * q_.transpose();
}

Projector Projector::padded(int extra_rows) const {
  Projector out;
  out.q_ = Eigen::MatrixXd::Zero(rows() + extra_rows, basis_dim());
  out.q_.topRows(rows()) = q_;
  return out;
}

ProjectedData project_data(const DesignTriple& d, const SplineSpec& spec,
                           Projector* projector_out) {
  d.validate();
  SplineSpec resolved = resolve_spline_spec(spec, d.n());
  ProjectedData out;
  out.basis = resolved;
  out.z = build_basis(d.U, resolved);
  Projector w(out.z);

  Eigen::MatrixXd xs = w.apply(d.X);
  out.y_star = w.apply(d.Y);
  out.col_scales.resize(d.p());
  for (int j = 0; j < d.p(); ++j) {
    double norm = xs.col(j).norm();
    if (norm < 1e-12)
      fail_validation("ZeroColumn", "column " + std::to_string(j) +
                      " is fully explained by the spline basis");
    out.col_scales[j] = norm;
    xs.col(j) /= norm;
  }
  out.x_star = std::move(xs);
  if (projector_out) *projector_out = w;
  return out;
}

NonparametricFit recover_nonparametric(const Eigen::MatrixXd& z, const Eigen::VectorXd& y,
                                       const Eigen::MatrixXd& x,
                                       const Eigen::VectorXd& beta_hat) {
  if (z.rows() != y.size() || x.rows() != y.size() || x.cols() != beta_hat.size())
    fail_validation("DimensionError", "inconsistent dimensions in recover_nonparametric");
  check_basis_rank(z);
  Eigen::VectorXd resid = y - x * beta_hat;
  NonparametricFit fit;
  fit.theta = z.householderQr().solve(resid);
  fit.g_hat = z * fit.theta;
  return fit;
}

}  // namespace sgk
