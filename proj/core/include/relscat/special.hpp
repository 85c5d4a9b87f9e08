#pragma once

#include <vector>

#include "relscat/types.hpp"

namespace relscat {

struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};

// Gauss-Legendre on [a, b].
GaussRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

// Gauss-Laguerre for weight e^{-t} on [0, inf).
GaussRule gauss_laguerre(int n);

double sph_j(int l, double x);
double sph_y(int l, double x);
// Spherical Hankel functions for complex argument via the terminating series.
cplx sph_h1(int l, cplx z);
cplx sph_h2(int l, cplx z);

// Smooth step: 0 for t <= 0, 1 for t >= 1, C-infinity in between.
double smooth_step(double t);
// Derivative of smooth_step with respect to t.
double smooth_step_deriv(double t);

// 1 on [0, a], smoothly down to 0 on [a, b].
inline double smooth_cutoff(double r, double a, double b) {
  return 1.0 - smooth_step((r - a) / (b - a));
}

// Fully normalized associated Legendre values for 0 <= m <= l <= lmax at x,
// including the Condon-Shortley phase. out[l*(l+1)/2 + m].
void normalized_legendre(int lmax, double x, std::vector<double>& out);
inline int plm_index(int l, int m) { return l * (l + 1) / 2 + m; }

double double_factorial(int n);

}  // namespace relscat
