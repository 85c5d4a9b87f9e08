#include <gtest/gtest.h>

#include <cmath>

#include "relscat/special.hpp"

using namespace relscat;

TEST(GaussLegendre, IntegratesPolynomialsToDegree2nMinus1) {
  auto g = gauss_legendre(7, 0.0, 2.0);
  for (int k = 0; k <= 13; ++k) {
    double s = 0.0;
    for (size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * std::pow(g.x[i], k);
    EXPECT_NEAR(s, std::pow(2.0, k + 1) / (k + 1), 1e-12 * std::pow(2.0, k + 1));
  }
}

TEST(GaussLaguerre, Moments) {
  auto g = gauss_laguerre(40);
  double fact = 1.0;
  for (int k = 0; k <= 20; ++k) {
    if (k > 0) fact *= k;
    double s = 0.0;
    for (size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * std::pow(g.x[i], k);
    EXPECT_NEAR(s / fact, 1.0, 1e-10) << "k=" << k;
  }
}

TEST(SphericalHankel, MatchesBesselPairOnRealAxis) {
  for (int l = 0; l <= 12; ++l)
    for (double x : {0.7, 3.0, 11.5, 40.0}) {
      cplx h = sph_h1(l, x);
      EXPECT_NEAR(h.real(), sph_j(l, x), 1e-10 * std::max(1.0, std::abs(h)));
      EXPECT_NEAR(h.imag(), sph_y(l, x), 1e-10 * std::max(1.0, std::abs(h)));
      EXPECT_NEAR(std::abs(sph_h2(l, x) - std::conj(h)), 0.0, 1e-10 * std::max(1.0, std::abs(h)));
    }
}

TEST(SmoothStep, LimitsAndSymmetry) {
  EXPECT_EQ(smooth_step(-0.1), 0.0);
  EXPECT_EQ(smooth_step(1.3), 1.0);
  EXPECT_NEAR(smooth_step(0.5), 0.5, 1e-15);
  for (double t = 0.05; t < 1.0; t += 0.1) {
    EXPECT_NEAR(smooth_step(t) + smooth_step(1.0 - t), 1.0, 1e-14);
    double h = 1e-6;
    EXPECT_NEAR(smooth_step_deriv(t), (smooth_step(t + h) - smooth_step(t - h)) / (2 * h), 1e-6);
  }
}

TEST(NormalizedLegendre, LowDegreeClosedForms) {
  std::vector<double> p;
  double x = 0.3, s = std::sqrt(1 - x * x);
  normalized_legendre(2, x, p);
  EXPECT_NEAR(p[plm_index(0, 0)], std::sqrt(1 / (4 * kPi)), 1e-15);
  EXPECT_NEAR(p[plm_index(1, 0)], std::sqrt(3 / (4 * kPi)) * x, 1e-15);
  EXPECT_NEAR(p[plm_index(1, 1)], -std::sqrt(3 / (8 * kPi)) * s, 1e-15);
  EXPECT_NEAR(p[plm_index(2, 1)], -std::sqrt(15 / (8 * kPi)) * s * x, 1e-15);
}
