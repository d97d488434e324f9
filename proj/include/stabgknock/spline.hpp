#pragma once

#include <Eigen/Dense>
#include <vector>

#include "stabgknock/common.hpp"
#include "stabgknock/types.hpp"

namespace sgk {

enum class KnotRule { Quantile, Uniform };

// Polynomial spline description. `order` follows the B-spline convention in
// which order 1 is piecewise constant; the basis has
// interior_knots + order functions.
struct SplineSpec {
  int order = 3;
  int interior_knots = -1;  // -1: resolved to floor(n^(1/9)) at fit time
  KnotRule knot_rule = KnotRule::Quantile;

  int basis_dim() const { return order + interior_knots; }
};

int default_interior_knots(int n);
SplineSpec resolve_spline_spec(SplineSpec spec, int n);

// B-spline basis matrix Z with Z(i,k) = B_k(u_i). Boundary knots sit at the
// observed range of u; rows sum to one.
Eigen::MatrixXd build_basis(const Eigen::VectorXd& u, const SplineSpec& spec,
                            std::vector<double>* knots_out = nullptr);

// Picks the interior-knot count in [0, max_interior] minimizing
// n*log(RSS/n) + K*log(n) for the spline-only regression of y on u.
int select_interior_knots_bic(const Eigen::VectorXd& u, const Eigen::VectorXd& y, int order,
                              int max_interior);

// Orthogonal-complement projector W = I - Z(ZᵀZ)⁻¹Zᵀ held in factored form
// (thin orthonormal basis of span Z). apply() and dense() agree to 1e-8.
class Projector {
 public:
  explicit Projector(const Eigen::MatrixXd& z);

  int rows() const { return static_cast<int>(q_.rows()); }
  int basis_dim() const { return static_cast<int>(q_.cols()); }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  Eigen::MatrixXd apply(const Eigen::MatrixXd& m) const;
  Eigen::MatrixXd dense() const;  // materialized n×n form; n ≤ 4000

  // Block-diagonal extension diag(W, I_extra); used after row augmentation.
  Projector padded(int extra_rows) const;

 private:
  Projector() = default;
  Eigen::MatrixXd q_;
};

struct ProjectedData {
  Eigen::MatrixXd x_star;      // W·X with unit-norm columns
  Eigen::VectorXd y_star;      // W·Y
  Eigen::VectorXd col_scales;  // pre-standardization column norms of W·X
  SplineSpec basis;
  Eigen::MatrixXd z;           // basis matrix for the original rows
  int augmented_rows = 0;

  int n() const { return static_cast<int>(x_star.rows()); }
  int p() const { return static_cast<int>(x_star.cols()); }
};

ProjectedData project_data(const DesignTriple& d, const SplineSpec& spec,
                           Projector* projector_out = nullptr);

struct NonparametricFit {
  Eigen::VectorXd theta;
  Eigen::VectorXd g_hat;
};

// Least-squares basis fit of the partial residual Y - X·beta_hat.
NonparametricFit recover_nonparametric(const Eigen::MatrixXd& z, const Eigen::VectorXd& y,
                                       const Eigen::MatrixXd& x,
                                       const Eigen::VectorXd& beta_hat);

}  // namespace sgk
