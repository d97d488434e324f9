#pragma once

#include <Eigen/Dense>
#include <optional>

#include "stabgknock/common.hpp"
#include "stabgknock/rng.hpp"
#include "stabgknock/spline.hpp"

namespace sgk {

enum class SMode { Equicorrelated, UserSupplied };

struct KnockoffConfig {
  SMode s_mode = SMode::Equicorrelated;
  std::optional<Eigen::VectorXd> s_user;
  double psd_tolerance = 1e-8;
  double jitter = 1e-10;
};

// Side-by-side [X*, X̃] together with the construction diagnostics. The two
// residuals measure the max-abs deviation from
//   X̃ᵀX̃ = Σ*   and   X̃ᵀX* = Σ* − diag{s}.
struct AugmentedDesign {
  Eigen::MatrixXd x_star;
  Eigen::MatrixXd x_tilde;
  Eigen::VectorXd s;
  Eigen::MatrixXd gram;         // 2p×2p Gram of [X*, X̃]
  double residual_gram = 0;
  double residual_cross = 0;
  double u_orthogonality = 0;   // max |ŨᵀX*|
  bool cholesky_degraded = false;
  bool u_projected = false;     // Ũ was re-projected through the spline projector
  bool degenerate_s = false;    // min s_j ≈ 0: that knockoff equals its original

  int n() const { return static_cast<int>(x_star.rows()); }
  int p() const { return static_cast<int>(x_star.cols()); }
  Eigen::MatrixXd joint() const;                    // [X*, X̃], n×2p
  AugmentedDesign swapped(const IndexSet& a) const; // columns j ↔ j+p for j ∈ a
};

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& x_star);

// Equicorrelated rule for unit-diagonal Σ*: s_j = min(2·λ_min, 1).
Eigen::VectorXd equicorrelated_s(const Eigen::MatrixXd& sigma);

// Fixed-design knockoff construction X̃ = X*[I − (Σ*)⁻¹diag{s}] + ŨC for
// n ≥ 2p. When a projector is supplied and n − K ≥ 2p, Ũ is additionally
// projected through it so the knockoffs stay inside the projected row space.
AugmentedDesign construct_gknockoff(const Eigen::MatrixXd& x_star, const Eigen::VectorXd& s,
                                    const KnockoffConfig& cfg = {},
                                    const Projector* projector = nullptr);

// Max-abs deviation of the swapped Gram from the unswapped one; the pairwise
// exchangeability contract bounds it by 1e-6 for any swap set.
double verify_exchangeability(const AugmentedDesign& aug, const IndexSet& swap_set);

// Remark-style row augmentation for p < n < 2p: zero rows are appended to X*
// and centered Gaussian pseudo-responses with variance sigma2_hat to Y*.
ProjectedData row_augment(const ProjectedData& pd, double sigma2_hat, Rng& rng);

// Residual variance from a cross-validated lasso fit on (X*, Y*), corrected
// by the selected-support size.
double estimate_noise_variance(const Eigen::MatrixXd& x_star, const Eigen::VectorXd& y_star,
                               Rng& rng);

}  // namespace sgk
