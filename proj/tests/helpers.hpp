#pragma once

#include <Eigen/Dense>
#include <random>

#include "relscat/sphere.hpp"

namespace relscat::testing {

inline Vec3 random_unit(std::mt19937& rng) {
  std::normal_distribution<double> n;
  Vec3 v(n(rng), n(rng), n(rng));
  return v.normalized();
}

// Random coefficients with the real-valuedness symmetry.
inline ShExpansion random_real_expansion(std::mt19937& rng, int lmax) {
  std::normal_distribution<double> n;
  ShExpansion e(lmax);
  for (int l = 0; l <= lmax; ++l) {
    e.at(l, 0) = n(rng);
    for (int m = 1; m <= l; ++m) {
      cplx c(n(rng), n(rng));
      e.at(l, m) = c;
      e.at(l, -m) = ((m % 2) ? -1.0 : 1.0) * std::conj(c);
    }
  }
  return e;
}

inline ShExpansion random_expansion(std::mt19937& rng, int lmax) {
  std::normal_distribution<double> n;
  ShExpansion e(lmax);
  for (auto& c : e.c) c = cplx(n(rng), n(rng));
  return e;
}

inline Mat3 random_rotation(std::mt19937& rng) {
  std::normal_distribution<double> n;
  Eigen::Matrix3d a;
  for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = n(rng);
  Eigen::HouseholderQR<Eigen::Matrix3d> qr(a);
  Mat3 q = qr.householderQ();
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

}  // namespace relscat::testing
