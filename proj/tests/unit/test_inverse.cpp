#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <random>

#include "../helpers.hpp"
#include "relscat/error.hpp"
#include "relscat/inverse.hpp"
#include "relscat/special.hpp"
#include "relscat/xray.hpp"

using namespace relscat;

namespace {

HomLayer layer(double m, std::vector<std::tuple<int, int, double>> coefs, int lmax = 2) {
  HomLayer L;
  L.order = m;
  L.angular = ShExpansion(lmax);
  for (auto [l, mm, c] : coefs) L.angular.at(l, mm) = c;
  return L;
}

// v0 = 1 + 0.5 Y10 + 0.3 Re Y21
HomLayer leading() {
  return layer(3.5, {{0, 0, std::sqrt(4 * kPi)}, {1, 0, 0.5}, {2, 1, 0.15}, {2, -1, -0.15}});
}

HomLayer second() { return layer(4.5, {{0, 0, 0.6 * std::sqrt(4 * kPi)}, {2, 0, 0.4}}); }

AmplitudeTable born1(const PolyhomPotential& v, double lambda, GridPtr g) {
  return amplitude_table(v, lambda, g, g, 1, AmplitudeConvention{});
}

double coef_error(const ShExpansion& got, const ShExpansion& want, int lmax) {
  double num = 0.0, den = 0.0;
  for (int l = 0; l <= lmax; ++l)
    for (int m = -l; m <= l; ++m) {
      num += std::norm(got.get(l, m) - want.get(l, m));
      den += std::norm(want.get(l, m));
    }
  return std::sqrt(num / den);
}

}  // namespace

TEST(FourierBall, SamplesMatchQuadratureTransform) {
  PolyhomPotential v;
  v.layers.push_back(leading());
  v.bumps.push_back({Vec3(0.2, 0.0, -0.1), 0.6, 0.4});
  double lambda = 2.0;
  auto g = SphereGrid::product(10, 12);
  auto d = fourier_from_amplitude(born1(v, lambda, g));
  std::mt19937 rng(1);
  std::uniform_int_distribution<size_t> pick(0, d.xi.size() - 1);
  int checked = 0;
  for (int k = 0; k < 400 && checked < 40; ++k) {
    size_t s = pick(rng);
    double r = d.xi[s].norm() / lambda;
    if (r < 0.05 || r > 1.0) continue;
    cplx ref = fourier_hat(v, d.xi[s]);
    EXPECT_LT(std::abs(d.value[s] - ref), 0.03 * std::abs(ref));
    ++checked;
  }
  EXPECT_GT(checked, 20);
}

TEST(FourierBall, BinnedProfilesTrackTransform) {
  PolyhomPotential v;
  v.bumps.push_back({Vec3(0.2, 0.0, -0.1), 0.6, 0.4});
  v.layers.push_back(layer(3.5, {{0, 0, 1.0}}));
  double lambda = 1.5;
  auto g = SphereGrid::product(24, 24);
  auto d = fourier_from_amplitude(born1(v, lambda, g));
  TransformEvaluator T(v);
  // Per-shell relative L2 over populated bins. Below 0.2 lambda the rho^{1/2} curvature
  // across one binning radius dominates; the order fit uses raw samples there.
  int shells = 0;
  for (size_t k = 0; k < d.rho.size(); ++k) {
    if (d.rho[k] < 0.2 * lambda - 1e-12 || d.rho[k] > lambda + 1e-12) continue;
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < d.dirs->size(); ++i) {
      cplx p = d.profile(Eigen::Index(k), Eigen::Index(i));
      if (std::isnan(p.real())) continue;
      cplx ref = T(d.rho[k] * d.dirs->node(i));
      num += std::norm(p - ref);
      den += std::norm(ref);
    }
    if (den == 0.0) continue;
    ++shells;
    EXPECT_LT(std::sqrt(num / den), 0.03) << "rho/lambda " << d.rho[k] / lambda;
  }
  EXPECT_GE(shells, 15);
  EXPECT_LT(d.max_conjugate_defect, 0.03);
}

TEST(FourierBall, DiagonalGivesVolumeIntegral) {
  HomLayer L = layer(3.5, {{0, 0, 2.0}}, 0);
  PolyhomPotential v;
  v.layers.push_back(L);
  Bump b{Vec3(0.1, 0.2, 0.0), 0.5, 0.7};
  v.bumps.push_back(b);
  // int V: radial quadrature of the window plus the closed tail, plus the Gaussian mass
  double a = L.r0 + L.delta;
  double win = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      [&](double r) { return L.window(r) * std::pow(r, 2.0 - L.order); }, L.r0, a);
  double tail = std::pow(a, 3.0 - L.order) / (L.order - 3.0);
  double ref = std::sqrt(4 * kPi) * 2.0 * (win + tail) + b.amplitude * std::pow(2 * kPi, 1.5) * std::pow(b.width, 3);
  auto g = SphereGrid::product(6, 8);
  auto d = fourier_from_amplitude(born1(v, 1.0, g));
  int n = 0;
  for (size_t s = 0; s < d.xi.size(); ++s)
    if (d.xi[s].norm() == 0.0) {
      EXPECT_NEAR(d.value[s].real(), ref, 0.03 * ref);
      ++n;
    }
  EXPECT_EQ(n, int(g->size()));
}

TEST(FourierBall, ZeroTableGivesZeroData) {
  auto g = SphereGrid::product(6, 8);
  auto d = fourier_from_amplitude(born1(PolyhomPotential{}, 1.0, g));
  for (auto& x : d.value) EXPECT_EQ(x, cplx(0.0));
  EXPECT_TRUE(estimate_order(d).smooth);
  EXPECT_TRUE(layer_strip(born1(PolyhomPotential{}, 1.0, g), 2).layers.empty());
}

TEST(EstimateOrder, SyntheticHalfPower) {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(0.0, 0.6);
  std::vector<Vec3> xi;
  std::vector<cplx> val;
  for (int k = 0; k < 6000; ++k) {
    Vec3 x = u(rng) * relscat::testing::random_unit(rng);
    xi.push_back(x);
    val.push_back(1.0 + std::sqrt(x.norm()));
  }
  auto d = fourier_from_samples(2.0, xi, val);
  auto e = estimate_order(d);
  EXPECT_FALSE(e.smooth);
  EXPECT_NEAR(e.order, 3.5, 0.02);
}

TEST(EstimateOrder, PureLayerThroughForwardPipeline) {
  PolyhomPotential v;
  v.layers.push_back(layer(3.5, {{0, 0, 1.0}}, 0));
  auto g = SphereGrid::product(16, 16);
  auto d = fourier_from_amplitude(born1(v, 2.0, g));
  auto e = estimate_order(d);
  EXPECT_NEAR(e.order, 3.5, 0.05);
  auto r = recover_angular(d, e.order, 2);
  EXPECT_NEAR(r.angular.at(0, 0).real(), 1.0, 0.05);
}

TEST(EstimateOrder, CompactPotentialIsSmooth) {
  PolyhomPotential v;
  v.bumps.push_back({Vec3(0.1, -0.2, 0.3), 0.7, 1.0});
  auto g = SphereGrid::product(16, 16);
  auto e = estimate_order(fourier_from_amplitude(born1(v, 2.0, g)));
  EXPECT_TRUE(e.smooth);
  EXPECT_TRUE(std::isnan(e.order));
}

TEST(RecoverAngular, DegreeOneComponent) {
  PolyhomPotential v;
  v.layers.push_back(layer(3.5, {{0, 0, std::sqrt(4 * kPi)}, {1, 0, 0.5}}, 1));
  auto g = SphereGrid::product(16, 16);
  auto d = fourier_from_amplitude(born1(v, 2.0, g));
  auto r = recover_angular(d, 3.5, 2);
  EXPECT_NEAR(r.angular.at(0, 0).real(), std::sqrt(4 * kPi), 0.05 * std::sqrt(4 * kPi));
  EXPECT_NEAR(r.angular.at(1, 0).real(), 0.5, 0.025);
  EXPECT_TRUE(r.unrecoverable.empty());
}

TEST(RecoverAngular, ZeroSingularPart) {
  PolyhomPotential v;
  v.bumps.push_back({Vec3::Zero(), 0.7, 1.0});
  auto g = SphereGrid::product(16, 16);
  auto d = fourier_from_amplitude(born1(v, 2.0, g));
  auto r = recover_angular(d, 3.5, 2);
  // relative to the data scale |V^(0)|
  EXPECT_LT(r.angular.norm(), 1e-3 * std::pow(2 * kPi, 1.5) * std::pow(0.7, 3));
  auto z = recover_angular(fourier_from_amplitude(born1(PolyhomPotential{}, 2.0, g)), 3.5, 2);
  EXPECT_EQ(z.angular.norm(), 0.0);
}

TEST(LayerStrip, SingleLayerThenSmooth) {
  PolyhomPotential v;
  v.layers.push_back(leading());
  auto g = SphereGrid::product(16, 16);
  auto r = layer_strip(born1(v, 2.0, g), 2);
  ASSERT_EQ(r.layers.size(), 1u) << r.diagnostic;
  EXPECT_TRUE(r.smooth_remainder);
  EXPECT_NEAR(r.layers[0].order, 3.5, 0.05);
  EXPECT_LT(coef_error(r.layers[0].angular, leading().angular, 2), 0.05);
}

TEST(LayerStrip, TwoLayersAndInvariants) {
  PolyhomPotential v;
  v.layers = {leading(), second()};
  double lambda = 2.0;
  auto g = SphereGrid::product(18, 18);
  StripOptions so;
  so.lmax = 3;
  auto r = layer_strip(born1(v, lambda, g), 2, so);
  ASSERT_EQ(r.layers.size(), 2u) << r.diagnostic;
  EXPECT_NEAR(r.layers[0].order, 3.5, 0.05);
  EXPECT_NEAR(r.layers[1].order, 4.5, 0.1);
  EXPECT_LT(coef_error(r.layers[0].angular, leading().angular, 2), 0.05);
  EXPECT_LT(coef_error(r.layers[1].angular, second().angular, 2), 0.10);
  // order monotonicity
  EXPECT_GE(r.layers[1].order, r.layers[0].order + 1 - 0.1);

  // idempotence at Born level
  auto again = layer_strip(born1(synthesize(r.layers), lambda, g), 2, so);
  ASSERT_EQ(again.layers.size(), 2u);
  for (int k = 0; k < 2; ++k) {
    EXPECT_NEAR(again.layers[k].order, r.layers[k].order, 0.05);
    EXPECT_LT(coef_error(again.layers[k].angular, r.layers[k].angular, 2), 0.05);
  }

  // X-ray cross-check on the leading layer
  std::mt19937 rng(9);
  ShExpansion diff = r.layers[0].angular - leading().angular;
  for (int k = 0; k < 10; ++k) {
    Vec3 th = relscat::testing::random_unit(rng);
    Vec3 w = relscat::testing::random_unit(rng);
    w = (w - w.dot(th) * th).normalized();
    double ref = std::abs(weighted_geodesic(leading().angular, 3.5, th, w));
    EXPECT_LE(std::abs(weighted_geodesic(diff, 3.5, th, w)), 0.1 * ref);
  }
}

TEST(LayerStrip, ScalingCovariance) {
  PolyhomPotential v;
  v.layers.push_back(leading());
  auto g = SphereGrid::product(16, 16);
  auto a = layer_strip(born1(v, 2.0, g), 1), b = layer_strip(born1(scaled(v, 3.0), 2.0, g), 1);
  ASSERT_EQ(a.layers.size(), 1u);
  ASSERT_EQ(b.layers.size(), 1u);
  EXPECT_NEAR(a.layers[0].order, b.layers[0].order, 0.02);
  EXPECT_LT(coef_error(b.layers[0].angular, 3.0 * a.layers[0].angular, 2), 1e-3);
}

TEST(Smoothness, Dichotomy) {
  PolyhomPotential base;
  base.layers.push_back(layer(3.5, {{0, 0, 3.5}}, 0));
  PolyhomPotential bumped = base, layered = base;
  bumped.bumps.push_back({Vec3(0.2, 0.1, -0.3), 0.6, 0.5});
  layered.layers.push_back(layer(4.5, {{0, 0, std::sqrt(4 * kPi)}, {1, 0, 0.3}}, 1));
  auto out = SphereGrid::product(64, 128);
  auto inc = SphereGrid::points({Vec3(0, 0, 1), Vec3(1, 0, 0), Vec3(0.3, 0.5, -0.8)});
  AmplitudeConvention c;
  auto t0 = amplitude_table(base, 2.0, inc, out, 1, c);
  EXPECT_TRUE(smoothness_test(t0, t0).smooth);
  EXPECT_TRUE(smoothness_test(amplitude_table(bumped, 2.0, inc, out, 1, c), t0).smooth);
  auto s = smoothness_test(amplitude_table(layered, 2.0, inc, out, 1, c), t0);
  EXPECT_FALSE(s.smooth);
  EXPECT_NEAR(s.order, 4.5, 0.1);
}
