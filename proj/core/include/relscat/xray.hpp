#pragma once

#include <Eigen/Core>
#include <limits>
#include <vector>

#include "relscat/potential.hpp"

namespace relscat {

struct LineSpec {
  Vec3 direction;  // unit
  Vec3 offset;     // orthogonal to direction
};

struct PlaneSpec {
  Vec3 normal;  // unit
  double offset = 2.0;
};

struct LineIntegral {
  double value = 0.0;
  double error = 0.0;                // quadrature error estimate
  bool window_contaminated = false;  // line meets the layers' inner window
};

LineIntegral line_integral(const PolyhomPotential& v, const LineSpec& line);

// int_0^pi sin^{m-2}(a) v0(-cos(a) theta + sin(a) w) da
double weighted_geodesic(const ShExpansion& v0, double m, const Vec3& theta, const Vec3& w);

struct FbpOptions {
  int angles = 180;
  double detector_extent = 12.0;  // detector half-width in units of |d|
  double patch_factor = 3.0;      // certified patch radius in units of |d|
  int output_points = 64;         // per side of the square covering the patch
  double error_bound = std::numeric_limits<double>::infinity();
};

struct PlaneReconstruction {
  Vec3 origin, e1, e2;
  std::vector<double> coords;  // shared u and v sample positions
  Eigen::MatrixXd recon;       // NaN outside the patch
  Eigen::MatrixXd direct;      // NaN outside the patch
  double patch_radius = 0.0;
  double rel_error = 0.0;
};

PlaneReconstruction plane_radon_invert(const PolyhomPotential& v, const PlaneSpec& plane, int resolution,
                                       const FbpOptions& opt = {});

// Orthonormal pair spanning the plane orthogonal to n.
void plane_basis(const Vec3& n, Vec3& e1, Vec3& e2);

}  // namespace relscat
