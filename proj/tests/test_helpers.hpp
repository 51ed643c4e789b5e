#pragma once

#include <Eigen/QR>
#include <random>

#include "cvnc/common.hpp"
#include "cvnc/symplectic.hpp"

namespace cvnc::testing {

inline CMat random_unitary(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(gauss(rng), gauss(rng));
  Eigen::HouseholderQR<CMat> qr(a);
  CMat q = qr.householderQ();
  CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i) q.col(i) *= r(i, i) / std::abs(r(i, i));
  return q;
}

inline Mat random_orthosymplectic(std::mt19937_64& rng, int n_modes) {
  return mode_unitary_to_orthosymplectic(random_unitary(rng, n_modes));
}

inline Mat random_spd(std::mt19937_64& rng, int dim, double min_eig = 0.05, double max_eig = 4.0) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uni(min_eig, max_eig);
  Mat a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = gauss(rng);
  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ();
  Vec d(dim);
  for (int i = 0; i < dim; ++i) d(i) = uni(rng);
  return q * d.asDiagonal() * q.transpose();
}

// Random physical covariance matrix via the Bloch-Messiah form
// V = R1 Z (R2 D R2^T) Z R1^T with rotations in K(n), a diagonal squeezer Z
// and thermal symplectic eigenvalues in D.
inline Mat random_covariance(std::mt19937_64& rng, int n_modes, double max_squeeze = 1.2,
                             double max_thermal = 2.0) {
  std::uniform_real_distribution<double> sq(-max_squeeze, max_squeeze);
  std::uniform_real_distribution<double> th(0.5, max_thermal);
  Vec z(2 * n_modes), d(2 * n_modes);
  for (int i = 0; i < n_modes; ++i) {
    const double r = sq(rng);
    z(2 * i) = std::exp(r);
    z(2 * i + 1) = std::exp(-r);
    d(2 * i) = d(2 * i + 1) = th(rng);
  }
  Mat r1 = random_orthosymplectic(rng, n_modes);
  Mat r2 = random_orthosymplectic(rng, n_modes);
  Mat core = r2 * d.asDiagonal() * r2.transpose();
  Mat v = r1 * z.asDiagonal() * core * z.asDiagonal() * r1.transpose();
  return 0.5 * (v + v.transpose());
}

}  // namespace cvnc::testing
