#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "relscat/error.hpp"
#include "relscat/xray.hpp"

using namespace relscat;
using relscat::testing::random_unit;

namespace {

ShExpansion constant(double c) {
  ShExpansion e(0);
  e.at(0, 0) = c * std::sqrt(4 * kPi);
  return e;
}

PolyhomPotential single(double m, const ShExpansion& v0) {
  PolyhomPotential v;
  HomLayer L;
  L.order = m;
  L.angular = v0;
  v.layers.push_back(L);
  return v;
}

ShExpansion one_plus_half_y10() {
  ShExpansion e(1);
  e.at(0, 0) = std::sqrt(4 * kPi);
  e.at(1, 0) = 0.5;
  return e;
}

Vec3 orthogonal_to(const Vec3& t, std::mt19937& rng) {
  Vec3 a = random_unit(rng);
  return (a - a.dot(t) * t).normalized();
}

}  // namespace

TEST(LineIntegral, InverseQuarticOracle) {
  auto v = single(4.0, constant(1.0));
  auto r = line_integral(v, {Vec3(0, 0, 1), Vec3(2, 0, 0)});
  EXPECT_NEAR(r.value, kPi / 16.0, 1e-10);
  EXPECT_LE(r.error, 1e-8);
  EXPECT_FALSE(r.window_contaminated);
}

TEST(LineIntegral, OffsetScalingAndDirectionSymmetry) {
  std::mt19937 rng(8);
  auto v = single(4.0, one_plus_half_y10());
  for (int k = 0; k < 10; ++k) {
    Vec3 t = random_unit(rng), w = orthogonal_to(t, rng);
    double a = line_integral(v, {t, 2.0 * w}).value, b = line_integral(v, {t, 4.0 * w}).value;
    EXPECT_NEAR(b / a, 0.125, 1e-9);
    EXPECT_NEAR(line_integral(v, {-t, 2.0 * w}).value, a, 1e-12);
  }
}

TEST(LineIntegral, OddPotentialOnCenteredLineVanishes) {
  ShExpansion odd(1);
  odd.at(1, 0) = 1.0;
  auto v = single(3.5, odd);
  auto r = line_integral(v, {Vec3(0, 0.6, 0.8), Vec3::Zero()});
  EXPECT_NEAR(r.value, 0.0, 1e-10);
  EXPECT_TRUE(r.window_contaminated);
}

TEST(LineIntegral, RejectsNonOrthogonalOffset) {
  auto v = single(4.0, constant(1.0));
  EXPECT_THROW(line_integral(v, {Vec3(0, 0, 1), Vec3(1, 0, 0.5)}), Error);
}

TEST(LineIntegral, HomogeneityAcrossScales) {
  std::mt19937 rng(31);
  for (double m : {3.5, 4.0}) {
    auto v = single(m, one_plus_half_y10());
    for (int k = 0; k < 5; ++k) {
      Vec3 t = random_unit(rng), w = orthogonal_to(t, rng);
      double ref = line_integral(v, {t, 1.5 * w}).value * std::pow(1.5, m - 1);
      for (double s : {2.0, 3.7, 8.0})
        EXPECT_NEAR(line_integral(v, {t, s * w}).value * std::pow(s, m - 1), ref, 1e-6);
    }
  }
}

TEST(WeightedGeodesic, WallisOracles) {
  EXPECT_NEAR(weighted_geodesic(constant(1.0), 4.0, Vec3(0, 0, 1), Vec3(1, 0, 0)), kPi / 2, 1e-10);
  EXPECT_NEAR(weighted_geodesic(constant(1.0), 3.0, Vec3(0, 0, 1), Vec3(1, 0, 0)), 2.0, 1e-10);
}

TEST(WeightedGeodesic, DomainChecks) {
  try {
    weighted_geodesic(constant(1.0), 4.0, Vec3(0, 0, 1), Vec3(1, 0, 1).normalized());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Domain);
  }
}

TEST(WeightedGeodesic, MatchesScaledLineIntegral) {
  std::mt19937 rng(17);
  for (double m : {3.5, 4.0, 4.5}) {
    auto v0 = one_plus_half_y10();
    auto v = single(m, v0);
    for (int k = 0; k < 6; ++k) {
      Vec3 t = random_unit(rng), w = orthogonal_to(t, rng);
      double I = weighted_geodesic(v0, m, t, w);
      EXPECT_NEAR(line_integral(v, {t, 4.0 * w}).value * std::pow(4.0, m - 1), I, 1e-6);
    }
  }
}

// A harmonic odd under the reflection through the plane normal to theta
// changes sign under alpha -> pi - alpha when weighted symmetrically.
TEST(WeightedGeodesic, ReversalOddHarmonicVanishes) {
  ShExpansion e(1);
  e.at(1, 0) = 1.0;  // z, odd under z -> -z
  EXPECT_NEAR(weighted_geodesic(e, 3.5, Vec3(0, 0, 1), Vec3(0, 1, 0)), 0.0, 1e-12);
}

TEST(PlaneRadon, ZeroPotentialGivesZeroField) {
  PolyhomPotential v;
  auto r = plane_radon_invert(v, {Vec3(0, 0, 1), 2.0}, 64);
  EXPECT_EQ(r.rel_error, 0.0);
  for (int i = 0; i < r.recon.rows(); ++i)
    for (int j = 0; j < r.recon.cols(); ++j)
      if (!std::isnan(r.recon(i, j))) EXPECT_EQ(r.recon(i, j), 0.0);
}

TEST(PlaneRadon, SingleLayerReconstruction) {
  auto v = single(3.5, constant(1.0));
  FbpOptions opt;
  opt.angles = 90;
  opt.output_points = 32;
  auto r = plane_radon_invert(v, {Vec3(0, 0, 1), 2.0}, 128, opt);
  EXPECT_LT(r.rel_error, 0.05);
}

TEST(PlaneRadon, EqualLeadingLayerDifferenceIsAtNoiseFloor) {
  auto v1 = single(3.5, one_plus_half_y10());
  auto v2 = v1;
  v2.bumps.push_back({Vec3::Zero(), 0.3, 1.0});
  FbpOptions opt;
  opt.angles = 60;
  opt.output_points = 24;
  Vec3 n = Vec3(1, 1, 0).normalized();
  auto a = plane_radon_invert(v1, {n, 3.0}, 96, opt), b = plane_radon_invert(v2, {n, 3.0}, 96, opt);
  double diff = 0.0, ref = 0.0;
  for (int i = 0; i < a.recon.rows(); ++i)
    for (int j = 0; j < a.recon.cols(); ++j)
      if (!std::isnan(a.recon(i, j))) {
        diff += std::pow(a.recon(i, j) - b.recon(i, j), 2);
        ref += std::pow(a.recon(i, j) - a.direct(i, j), 2);
      }
  EXPECT_LE(std::sqrt(diff), 1e-6 + std::sqrt(ref));
}

TEST(PlaneRadon, ErrorBoundEnforced) {
  auto v = single(3.5, constant(1.0));
  FbpOptions opt;
  opt.angles = 16;
  opt.output_points = 16;
  opt.error_bound = 1e-6;
  try {
    plane_radon_invert(v, {Vec3(0, 0, 1), 2.0}, 16, opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Precision);
  }
}
