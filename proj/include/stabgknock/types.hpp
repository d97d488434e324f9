#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "stabgknock/common.hpp"

namespace sgk {

// Raw observations of the partially linear model: an n×p design, a scalar
// covariate entering nonparametrically, and the response.
struct DesignTriple {
  Eigen::MatrixXd X;
  Eigen::VectorXd U;
  Eigen::VectorXd Y;
  std::vector<std::string> col_names;  // optional; size p when present

  int n() const { return static_cast<int>(X.rows()); }
  int p() const { return static_cast<int>(X.cols()); }
  void validate() const;
  DesignTriple rows(const IndexSet& idx) const;
  DesignTriple columns(const IndexSet& idx) const;
};

}  // namespace sgk
