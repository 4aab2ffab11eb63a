#pragma once

// Shared fixtures for the unit and acceptance suites: seeded clouds,
// orthogonal matrices, weight vectors.

#include <Eigen/Dense>
#include <Eigen/QR>
#include <cstdint>
#include <random>

namespace testsupport {

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline Eigen::MatrixXd random_cloud(int n, int d, std::mt19937_64& gen,
                                    double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd m(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = scale * gauss(gen);
  return m;
}

// Cloud with distinct per-axis scales; the spread between principal axes
// keeps rotation-recovery problems well conditioned.
inline Eigen::MatrixXd anisotropic_cloud(int n, int d, std::mt19937_64& gen) {
  Eigen::MatrixXd m = random_cloud(n, d, gen);
  for (int j = 0; j < d; ++j) m.col(j) *= std::pow(1.8, j);
  return m;
}

inline Eigen::MatrixXd random_orthogonal(int d, std::mt19937_64& gen) {
  const Eigen::MatrixXd a = random_cloud(d, d, gen);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

inline Eigen::VectorXd uniform_weights(int n) {
  return Eigen::VectorXd::Constant(n, 1.0 / n);
}

inline Eigen::VectorXd random_weights(int n, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.2, 1.0);
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w(i) = u(gen);
  w /= w.sum();
  return w;
}

}  // namespace testsupport
