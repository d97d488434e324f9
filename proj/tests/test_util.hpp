#pragma once

#include <Eigen/Dense>

#include "stabgknock/rng.hpp"

namespace sgk_test {

inline Eigen::MatrixXd random_matrix(int n, int p, uint64_t seed) {
  sgk::Rng rng(seed);
  Eigen::MatrixXd m(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) m(i, j) = rng.normal();
  return m;
}

inline Eigen::VectorXd random_vector(int n, uint64_t seed) {
  sgk::Rng rng(seed);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

// Orthonormal columns via QR of a random Gaussian matrix.
inline Eigen::MatrixXd random_orthonormal(int n, int p, uint64_t seed) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(n, p, seed));
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
}

}  // namespace sgk_test
