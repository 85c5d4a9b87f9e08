#include "relscat/special.hpp"

#include <cmath>

#include "relscat/error.hpp"

namespace relscat {

GaussRule gauss_legendre(int n, double a, double b) {
  require(n >= 1, ErrorKind::Structural, "gauss_legendre: n must be positive");
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) {
        // one more refresh of dp at the converged node
        p0 = 1.0, p1 = 0.0;
        for (int k = 1; k <= n; ++k) {
          double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        break;
      }
    }
    double w = 2.0 / ((1.0 - z * z) * dp * dp);
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    r.x[i] = c - h * z;
    r.x[n - 1 - i] = c + h * z;
    r.w[i] = r.w[n - 1 - i] = h * w;
  }
  return r;
}

GaussRule gauss_laguerre(int n) {
  require(n >= 1, ErrorKind::Structural, "gauss_laguerre: n must be positive");
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    if (i == 0)
      z = 3.0 / (1.0 + 2.4 * n);
    else if (i == 1)
      z += 15.0 / (1.0 + 2.5 * n);
    else {
      double ai = i - 1;
      z += ((1.0 + 2.55 * ai) / (1.9 * ai)) * (z - r.x[i - 2]);
    }
    double pp = 0.0, p1 = 0.0;
    for (int it = 0; it < 200; ++it) {
      p1 = 1.0;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2 * j + 1 - z) * p2 - j * p3) / (j + 1);
      }
      pp = n * (p1 - p2) / z;
      double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::abs(z)) break;
    }
    // recompute with final z for the weight
    double q1 = 1.0, q2 = 0.0;
    for (int j = 0; j < n; ++j) {
      double q3 = q2;
      q2 = q1;
      q1 = ((2 * j + 1 - z) * q2 - j * q3) / (j + 1);
    }
    (void)q1;
    r.x[i] = z;
    // w = 1 / (z * [L_n'(z)]^2) with L_n' = n (L_n - L_{n-1}) / z ... use L_{n-1}
    // identity w = z / ((n+1)^2 L_{n+1}(z)^2)
    double l_np1 = ((2 * n + 1 - z) * q1 - n * q2) / (n + 1);
    r.w[i] = z / ((n + 1.0) * (n + 1.0) * l_np1 * l_np1);
  }
  return r;
}

double sph_j(int l, double x) { return std::sph_bessel(static_cast<unsigned>(l), x); }

double sph_y(int l, double x) { return std::sph_neumann(static_cast<unsigned>(l), x); }

namespace {
// h_l^{(1)}(z) = (-i)^{l+1} e^{iz}/z sum_k (l+k)!/(k!(l-k)!) (i/(2z))^k
cplx hankel_series(int l, cplx z, double sgn) {
  cplx s = 0.0, term = 1.0;
  cplx q = cplx(0.0, sgn) / (2.0 * z);
  for (int k = 0; k <= l; ++k) {
    if (k > 0) term *= q * double((l + k) * (l - k + 1)) / double(k);
    s += term;
  }
  cplx pre = sgn > 0 ? minus_i_pow(l + 1) : i_pow(l + 1);
  return pre * std::exp(cplx(0.0, sgn) * z) / z * s;
}
}  // namespace

cplx sph_h1(int l, cplx z) { return hankel_series(l, z, 1.0); }
cplx sph_h2(int l, cplx z) { return hankel_series(l, z, -1.0); }

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

double smooth_step_deriv(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  double da = a / (t * t), db = -b / ((1.0 - t) * (1.0 - t));
  return (da * b - a * db) / ((a + b) * (a + b));
}

void normalized_legendre(int lmax, double x, std::vector<double>& out) {
  out.assign(static_cast<size_t>((lmax + 1) * (lmax + 2) / 2), 0.0);
  double s = std::sqrt(std::max(0.0, 1.0 - x * x));
  double pmm = std::sqrt(1.0 / (4.0 * kPi));
  for (int m = 0; m <= lmax; ++m) {
    if (m > 0) pmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
    out[plm_index(m, m)] = pmm;
    if (m + 1 <= lmax) out[plm_index(m + 1, m)] = x * std::sqrt(2.0 * m + 3.0) * pmm;
    for (int l = m + 2; l <= lmax; ++l) {
      double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
      double b = std::sqrt(((l - 1.0) * (l - 1.0) - double(m) * m) / (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
      out[plm_index(l, m)] = a * (x * out[plm_index(l - 1, m)] - b * out[plm_index(l - 2, m)]);
    }
  }
}

double double_factorial(int n) {
  double r = 1.0;
  for (int k = n; k > 1; k -= 2) r *= k;
  return r;
}

}  // namespace relscat
