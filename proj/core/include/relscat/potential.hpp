#pragma once

#include <vector>

#include "relscat/sphere.hpp"
#include "relscat/types.hpp"

namespace relscat {

// A exp(-|x-c|^2 / (2 w^2))
struct Bump {
  Vec3 center = Vec3::Zero();
  double width = 1.0;
  double amplitude = 1.0;
  double eval(const Vec3& x) const;
};

// W(|x|) |x|^{-m} v(x/|x|), W rising smoothly from 0 at r0 to 1 at r0 + delta.
struct HomLayer {
  double order = 4.0;
  ShExpansion angular;
  double r0 = 1.0;
  double delta = 0.25;

  double window(double r) const;
  double angular_value(const Vec3& dir) const { return angular.evaluate(dir).real(); }
  double eval(const Vec3& x) const;
};

struct PolyhomPotential {
  std::vector<HomLayer> layers;
  std::vector<Bump> bumps;

  bool empty() const { return layers.empty() && bumps.empty(); }
  double leading_order() const;
  // Orders increasing, leading > 3, angular parts real. Throws Validation.
  void validate() const;
  double eval(const Vec3& x) const;
  // Support radius beyond which only homogeneous layers remain (bumps < 1e-16).
  double core_radius() const;
  // Sampled estimate of sup |V(x)| <x>^m over a fixed set of rays.
  double decay_constant() const;
};

PolyhomPotential operator+(const PolyhomPotential& a, const PolyhomPotential& b);
PolyhomPotential scaled(const PolyhomPotential& v, double s);

struct FourierOptions {
  double r_max = 40.0;       // quadrature radius before the analytic tail
  double tolerance = 1e-9;   // absolute, on each radial integral
};

// V^(xi) = int e^{-i x.xi} V(x) dx by polar quadrature and an analytic tail.
cplx fourier_hat(const PolyhomPotential& v, const Vec3& xi, const FourierOptions& opt = {});

// int_{r0}^inf W(r) r^{2-m} j_l(rho r) dr for one layer's window.
double layer_radial_integral(const HomLayer& layer, int l, double rho, const FourierOptions& opt = {},
                             double* err = nullptr);

// gamma with  F[|x|^{-a} Y_l](xi) = gamma |xi|^{a-3} Y_l(xi/|xi|).
cplx hom_ft_multiplier(double a, int l);

// Fast transform: exact singular term plus an entire remainder from the
// window series; falls back to quadrature for large |xi|.
class TransformEvaluator {
 public:
  explicit TransformEvaluator(const PolyhomPotential& v, const FourierOptions& opt = {});
  cplx operator()(const Vec3& xi) const;
  // Homogeneous contribution gamma_{l,m} rho^{m-3} c_lm Y_lm for every layer.
  cplx singular_part(const Vec3& xi) const;
  cplx analytic_part(const Vec3& xi) const { return (*this)(xi) - singular_part(xi); }
  const PolyhomPotential& potential() const { return v_; }

 private:
  double entire_radial(size_t layer, int l, double rho) const;
  PolyhomPotential v_;
  FourierOptions opt_;
  std::vector<std::vector<cplx>> gamma_;  // [layer][l]
  std::vector<double> tx_, tw_;           // transition-zone rule on [0,1]
};

}  // namespace relscat
