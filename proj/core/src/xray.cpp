#include "relscat/xray.hpp"

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

#include "relscat/error.hpp"

namespace relscat {

void plane_basis(const Vec3& n, Vec3& e1, Vec3& e2) {
  Vec3 a = std::abs(n.x()) < 0.9 ? Vec3(1, 0, 0) : Vec3(0, 1, 0);
  e1 = (a - a.dot(n) * n).normalized();
  e2 = n.cross(e1);
}

LineIntegral line_integral(const PolyhomPotential& v, const LineSpec& line) {
  const Vec3& th = line.direction;
  const Vec3& x = line.offset;
  require(std::abs(th.norm() - 1.0) <= 1e-12, ErrorKind::Structural, "line direction must be a unit vector");
  require(std::abs(x.dot(th)) <= 1e-12 * std::max(1.0, x.norm()), ErrorKind::Structural,
          "line offset must be orthogonal to its direction");
  LineIntegral out;
  double rx = x.norm();
  for (const auto& L : v.layers)
    if (rx <= L.r0 + L.delta) out.window_contaminated = true;
  if (v.empty()) return out;

  // t = s tan(beta) maps the whole line onto (-pi/2, pi/2)
  double s = std::max(rx, 1.0);
  auto f = [&](double beta) {
    double c = std::cos(beta);
    double t = s * std::tan(beta);
    return v.eval(x + t * th) * s / (c * c);
  };
  std::vector<double> cuts{0.0};
  double rc = v.core_radius();
  if (rc > rx) {
    double tc = std::sqrt(rc * rc - rx * rx);
    cuts.push_back(tc);
    cuts.push_back(-tc);
  }
  for (const auto& b : v.bumps) cuts.push_back(b.center.dot(th));
  std::vector<double> betas{-kPi / 2, kPi / 2};
  for (double t : cuts) betas.push_back(std::atan(t / s));
  std::sort(betas.begin(), betas.end());
  betas.erase(std::unique(betas.begin(), betas.end(), [](double a, double b) { return b - a < 1e-12; }), betas.end());

  boost::math::quadrature::tanh_sinh<double> ts(12);
  for (size_t i = 0; i + 1 < betas.size(); ++i) {
    double err = 0.0, l1 = 0.0;
    out.value += ts.integrate(f, betas[i], betas[i + 1], 1e-13, &err, &l1);
    out.error += err;
  }
  return out;
}

double weighted_geodesic(const ShExpansion& v0, double m, const Vec3& theta, const Vec3& w) {
  if (std::abs(theta.dot(w)) > 1e-10) fail(ErrorKind::Domain, "weighted_geodesic needs w orthogonal to theta");
  if (!(m > 2.0)) fail(ErrorKind::Domain, "weighted_geodesic needs m > 2");
  Vec3 t = theta.normalized(), u = w.normalized();
  auto f = [&](double a) {
    Vec3 p = -std::cos(a) * t + std::sin(a) * u;
    return std::pow(std::sin(a), m - 2.0) * v0.evaluate(p.normalized()).real();
  };
  boost::math::quadrature::tanh_sinh<double> ts(12);
  return ts.integrate(f, 0.0, kPi, 1e-14);
}

PlaneReconstruction plane_radon_invert(const PolyhomPotential& v, const PlaneSpec& plane, int resolution,
                                       const FbpOptions& opt) {
  require(std::abs(plane.normal.norm() - 1.0) < 1e-12, ErrorKind::Structural, "plane normal must be unit");
  double d = std::abs(plane.offset);
  for (const auto& L : v.layers)
    require(d > L.r0 + L.delta, ErrorKind::Domain, "plane must avoid the layers' inner window");
  require(resolution >= 16 && opt.angles >= 8, ErrorKind::Structural, "FBP resolution too small");

  PlaneReconstruction out;
  plane_basis(plane.normal, out.e1, out.e2);
  out.origin = plane.offset * plane.normal;
  out.patch_radius = opt.patch_factor * d;

  const int ns = resolution, na = opt.angles;
  const double S = opt.detector_extent * d;
  const double ds = 2.0 * S / (ns - 1);
  std::vector<double> sgrid(ns);
  for (int j = 0; j < ns; ++j) sgrid[j] = -S + ds * j;

  // Shepp-Logan kernel on the detector lattice
  std::vector<double> h(2 * ns - 1);
  for (int n = -(ns - 1); n <= ns - 1; ++n)
    h[n + ns - 1] = -2.0 / (kPi * kPi * ds * ds * (4.0 * n * n - 1.0));

  std::vector<std::vector<double>> filtered(na, std::vector<double>(ns, 0.0));
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < na; ++k) {
    double phi = kPi * k / na;
    Vec3 om = std::cos(phi) * out.e1 + std::sin(phi) * out.e2;
    Vec3 dir = -std::sin(phi) * out.e1 + std::cos(phi) * out.e2;
    std::vector<double> p(ns);
    for (int j = 0; j < ns; ++j) p[j] = line_integral(v, {dir, out.origin + sgrid[j] * om}).value;
    for (int i = 0; i < ns; ++i) {
      double acc = 0.0;
      for (int j = 0; j < ns; ++j) acc += h[i - j + ns - 1] * p[j];
      filtered[k][i] = acc * ds;
    }
  }

  const int no = opt.output_points;
  out.coords.resize(no);
  for (int i = 0; i < no; ++i) out.coords[i] = -out.patch_radius + 2.0 * out.patch_radius * i / (no - 1);
  out.recon.setConstant(no, no, std::numeric_limits<double>::quiet_NaN());
  out.direct = out.recon;
  double num = 0.0, den = 0.0;
  for (int a = 0; a < no; ++a)
    for (int b = 0; b < no; ++b) {
      double u = out.coords[a], w = out.coords[b];
      if (u * u + w * w > out.patch_radius * out.patch_radius) continue;
      double acc = 0.0;
      for (int k = 0; k < na; ++k) {
        double phi = kPi * k / na;
        double sp = u * std::cos(phi) + w * std::sin(phi);
        double pos = (sp + S) / ds;
        int i0 = std::clamp(int(std::floor(pos)), 0, ns - 2);
        double fr = pos - i0;
        acc += (1.0 - fr) * filtered[k][i0] + fr * filtered[k][i0 + 1];
      }
      double rec = acc * kPi / na;
      double dir = v.eval(out.origin + u * out.e1 + w * out.e2);
      out.recon(a, b) = rec;
      out.direct(a, b) = dir;
      num += (rec - dir) * (rec - dir);
      den += dir * dir;
    }
  out.rel_error = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  if (out.rel_error > opt.error_bound)
    fail(ErrorKind::Precision, "FBP resolution too low for the requested error bound", out.rel_error);
  return out;
}

}  // namespace relscat
