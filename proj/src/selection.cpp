#include "stabgknock/selection.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace sgk {

namespace {

double threshold_ratio(const std::vector<double>& sorted_w, double t, ThresholdMode mode) {
  // counts via binary search on the sorted statistic values
  auto lo = std::upper_bound(sorted_w.begin(), sorted_w.end(), -t);  // first > -t
  const double negatives = static_cast<double>(lo - sorted_w.begin());
  auto hi = std::lower_bound(sorted_w.begin(), sorted_w.end(), t);  // first >= t
  const double positives = static_cast<double>(sorted_w.end() - hi);
  const double num = mode == ThresholdMode::KnockoffPlus ? 1.0 + negatives : negatives;
  return num / std::max(positives, 1.0);
}

}  // namespace

double knockoff_threshold(const Eigen::VectorXd& w, double q, ThresholdMode mode) {
  if (!(q > 0 && q < 1)) fail_validation("BadLevel", "q must lie in (0,1)");
  if (!w.allFinite()) fail_validation("NonFiniteInput", "statistics contain non-finite values");

  std::vector<double> candidates;
  candidates.reserve(w.size());
  for (int j = 0; j < w.size(); ++j)
    if (w[j] != 0.0) candidates.push_back(std::abs(w[j]));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::vector<double> sorted_w(w.data(), w.data() + w.size());
  std::sort(sorted_w.begin(), sorted_w.end());

  for (double t : candidates)
    if (threshold_ratio(sorted_w, t, mode) <= q) return t;
  return std::numeric_limits<double>::infinity();
}

SelectionOutcome select(const Eigen::VectorXd& w, double q, ThresholdMode mode) {
  SelectionOutcome out;
  out.q = q;
  out.mode = mode;
  out.threshold = knockoff_threshold(w, q, mode);
  if (std::isfinite(out.threshold)) {
    for (int j = 0; j < w.size(); ++j)
      if (w[j] >= out.threshold) out.selected.push_back(j);
    std::vector<double> sorted_w(w.data(), w.data() + w.size());
    std::sort(sorted_w.begin(), sorted_w.end());
    out.fdp_hat = threshold_ratio(sorted_w, out.threshold, mode);
  }
  return out;
}

IndexSet bh_select(const Eigen::VectorXd& pvalues, double q) {
  const int p = static_cast<int>(pvalues.size());
  for (int j = 0; j < p; ++j)
    if (!(pvalues[j] >= 0 && pvalues[j] <= 1))
      fail_validation("BadPValue", "p-values must lie in [0,1]");

  std::vector<double> sorted(pvalues.data(), pvalues.data() + p);
  std::sort(sorted.begin(), sorted.end());
  double cutoff = -1;
  for (int k = p; k >= 1; --k) {
    if (sorted[k - 1] <= q * k / p) {
      cutoff = sorted[k - 1];
      break;
    }
  }
  IndexSet rejected;
  if (cutoff >= 0)
    for (int j = 0; j < p; ++j)
      if (pvalues[j] <= cutoff) rejected.push_back(j);
  return rejected;
}

Eigen::VectorXd univariate_pvalues(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  if (n <= 2) fail_validation("DimensionError", "univariate regression needs n > 2");

  const double ymean = y.mean();
  boost::math::students_t tdist(n - 2);
  Eigen::VectorXd pv(p);
  for (int j = 0; j < p; ++j) {
    const double xmean = x.col(j).mean();
    Eigen::VectorXd xc = x.col(j).array() - xmean;
    const double sxx = xc.squaredNorm();
    if (sxx < 1e-24)
      fail_validation("ZeroVariance", "column " + std::to_string(j) + " has zero variance");
    const double slope = xc.dot(y) / sxx;
    const double intercept = ymean - slope * xmean;
    const double rss =
        (y.array() - intercept - slope * x.col(j).array()).matrix().squaredNorm();
    const double se2 = rss / (n - 2) / sxx;
    if (se2 <= 0) {
      pv[j] = 0.0;
      continue;
    }
    const double t = slope / std::sqrt(se2);
    pv[j] = 2.0 * boost::math::cdf(boost::math::complement(tdist, std::abs(t)));
  }
  return pv;
}

}  // namespace sgk
