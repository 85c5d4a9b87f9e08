#include "relscat/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "relscat/error.hpp"
#include "relscat/special.hpp"

namespace relscat {

double Bump::eval(const Vec3& x) const {
  return amplitude * std::exp(-(x - center).squaredNorm() / (2.0 * width * width));
}

double HomLayer::window(double r) const { return smooth_step((r - r0) / delta); }

double HomLayer::eval(const Vec3& x) const {
  double r = x.norm();
  if (r <= r0) return 0.0;
  return window(r) * std::pow(r, -order) * angular_value(x / r);
}

double PolyhomPotential::leading_order() const {
  return layers.empty() ? std::numeric_limits<double>::infinity() : layers.front().order;
}

void PolyhomPotential::validate() const {
  for (size_t j = 0; j < layers.size(); ++j) {
    const auto& L = layers[j];
    if (j == 0 && !(L.order > 3.0))
      fail(ErrorKind::Validation, "leading layer violates order > 3 (got " + std::to_string(L.order) + ")");
    if (j > 0 && !(L.order > layers[j - 1].order))
      fail(ErrorKind::Validation, "layer orders must be strictly increasing");
    if (!(L.r0 > 0.0 && L.delta > 0.0)) fail(ErrorKind::Validation, "layer window needs r0 > 0 and delta > 0");
    if (L.angular.reality_defect() > 1e-10 * std::max(1.0, L.angular.norm()))
      fail(ErrorKind::Validation, "layer angular coefficients violate c_{l,-m} = (-1)^m conj(c_{l,m})");
  }
  for (const auto& b : bumps)
    if (!(b.width > 0.0)) fail(ErrorKind::Validation, "bump width must be positive");
}

double PolyhomPotential::eval(const Vec3& x) const {
  double s = 0.0;
  for (const auto& L : layers) s += L.eval(x);
  for (const auto& b : bumps) s += b.eval(x);
  return s;
}

double PolyhomPotential::core_radius() const {
  double r = 0.0;
  for (const auto& L : layers) r = std::max(r, L.r0 + L.delta);
  for (const auto& b : bumps) {
    double a = std::abs(b.amplitude);
    double reach = a > 1e-16 ? b.width * std::sqrt(2.0 * std::log(a / 1e-16)) : 0.0;
    r = std::max(r, b.center.norm() + reach);
  }
  return r;
}

double PolyhomPotential::decay_constant() const {
  if (empty()) return 0.0;
  double m = layers.empty() ? 0.0 : leading_order();
  auto grid = SphereGrid::product(6, 12);
  double c = 0.0;
  for (const auto& d : grid->nodes())
    for (double r = 0.0; r <= 64.0; r = r < 1.0 ? r + 0.125 : r * 1.25) {
      double v = std::abs(eval(r * d)) * std::pow(1.0 + r * r, 0.5 * m);
      c = std::max(c, v);
    }
  return c;
}

PolyhomPotential operator+(const PolyhomPotential& a, const PolyhomPotential& b) {
  PolyhomPotential r = a;
  for (const auto& L : b.layers) {
    auto it = std::find_if(r.layers.begin(), r.layers.end(), [&](const HomLayer& x) {
      return x.order == L.order && x.r0 == L.r0 && x.delta == L.delta;
    });
    if (it != r.layers.end())
      it->angular = it->angular + L.angular;
    else
      r.layers.push_back(L);
  }
  std::sort(r.layers.begin(), r.layers.end(), [](const HomLayer& x, const HomLayer& y) { return x.order < y.order; });
  r.bumps.insert(r.bumps.end(), b.bumps.begin(), b.bumps.end());
  return r;
}

PolyhomPotential scaled(const PolyhomPotential& v, double s) {
  PolyhomPotential r = v;
  for (auto& L : r.layers) L.angular = s * L.angular;
  for (auto& b : r.bumps) b.amplitude *= s;
  return r;
}

namespace {

const GaussRule& rule(int n) {
  static const GaussRule r16 = gauss_legendre(16, 0.0, 1.0);
  static const GaussRule r24 = gauss_legendre(24, 0.0, 1.0);
  static const GaussRule r48 = gauss_legendre(48, 0.0, 1.0);
  static const GaussRule r64 = gauss_legendre(64, 0.0, 1.0);
  switch (n) {
    case 16: return r16;
    case 24: return r24;
    case 48: return r48;
    default: return r64;
  }
}

const GaussRule& laguerre(int n) {
  static const GaussRule q40 = gauss_laguerre(40);
  static const GaussRule q60 = gauss_laguerre(60);
  return n == 40 ? q40 : q60;
}

template <class F>
double gl(const GaussRule& g, double a, double b, F&& f) {
  double s = 0.0, h = b - a;
  for (size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * f(a + h * g.x[i]);
  return s * h;
}

// int_R^inf r^{2-m} j_l(rho r) dr by rotating onto r = R + i t / rho.
double hankel_tail(int l, double m, double rho, double R, int n) {
  const GaussRule& q = laguerre(n);
  cplx s = 0.0;
  for (size_t i = 0; i < q.x.size(); ++i) {
    double t = q.x[i];
    cplx r(R, t / rho);
    // h1 carries e^{i rho R} e^{-t}; divide out e^{-t} for the Laguerre weight
    cplx h = sph_h1(l, cplx(rho * R, t)) * std::exp(t);
    s += q.w[i] * std::pow(r, 2.0 - m) * h;
  }
  return (kI * s / rho).real();
}

}  // namespace

double layer_radial_integral(const HomLayer& layer, int l, double rho, const FourierOptions& opt, double* err) {
  double m = layer.order;
  if (!(m > 3.0)) fail(ErrorKind::Divergence, "transform of a layer with order <= 3 diverges");
  double a = layer.r0, b = layer.r0 + layer.delta;
  auto integrand = [&](double r) { return std::pow(r, 2.0 - m) * sph_j(l, rho * r); };
  auto win = [&](int n) {
    return gl(rule(n), a, b, [&](double r) { return layer.window(r) * integrand(r); });
  };
  double w48 = win(48), w64 = win(64);
  double e = std::abs(w64 - w48);
  if (rho == 0.0) {
    if (err) *err = e;
    return l == 0 ? w64 + std::pow(b, 3.0 - m) / (m - 3.0) : 0.0;
  }
  double R = std::max({opt.r_max, (2.0 * l + 4.0) / rho, b});
  double body16 = 0.0, body24 = 0.0;
  for (double x = b; x < R;) {
    double step = std::min(kPi / rho, std::max(0.5, 0.5 * x));
    double y = std::min(R, x + step);
    body16 += gl(rule(16), x, y, integrand);
    body24 += gl(rule(24), x, y, integrand);
    x = y;
  }
  double t40 = hankel_tail(l, m, rho, R, 40), t60 = hankel_tail(l, m, rho, R, 60);
  e += std::abs(body24 - body16) + std::abs(t60 - t40);
  if (err) *err = e;
  if (e > opt.tolerance)
    fail(ErrorKind::Precision, "radial transform quadrature did not converge", e);
  return w64 + body24 + t60;
}

cplx fourier_hat(const PolyhomPotential& v, const Vec3& xi, const FourierOptions& opt) {
  if (!v.layers.empty() && !(v.leading_order() > 3.0))
    fail(ErrorKind::Divergence, "fourier_hat needs leading order > 3");
  double rho = xi.norm();
  Vec3 dir = rho > 0.0 ? Vec3(xi / rho) : Vec3(0, 0, 1);
  cplx total = 0.0;
  std::vector<cplx> y;
  for (const auto& L : v.layers) {
    sph_harmonics(L.angular.lmax, dir, y);
    for (int l = 0; l <= L.angular.lmax; ++l) {
      if (L.angular.degree_power(l) == 0.0) continue;
      if (rho == 0.0 && l > 0) continue;
      double I = layer_radial_integral(L, l, rho, opt);
      cplx ang = 0.0;
      for (int m = -l; m <= l; ++m) ang += L.angular.at(l, m) * y[ShExpansion::index(l, m)];
      total += 4.0 * kPi * minus_i_pow(l) * I * ang;
    }
  }
  for (const auto& b : v.bumps) {
    double R = 12.0 * b.width;
    double s = 0.0;
    const GaussRule& g = rule(64);
    int panels = 8;
    for (int p = 0; p < panels; ++p) {
      double lo = R * p / panels, hi = R * (p + 1) / panels;
      s += gl(g, lo, hi, [&](double r) {
        return 4.0 * kPi * r * r * sph_j(0, rho * r) * std::exp(-r * r / (2.0 * b.width * b.width));
      });
    }
    total += b.amplitude * s * std::exp(-kI * xi.dot(b.center));
  }
  return total;
}

cplx hom_ft_multiplier(double a, int l) {
  require(l >= 0, ErrorKind::Domain, "hom_ft_multiplier: negative degree");
  if (!(a > 0.0)) fail(ErrorKind::Domain, "hom_ft_multiplier: order must be positive");
  double z = 0.5 * (3.0 - a + l);
  if (z <= 0.0 && std::abs(z - std::round(z)) < 1e-9)
    fail(ErrorKind::Degenerate,
         "order a = 3 + l + 2k hits a pole of the homogeneous transform; this needs the log-corrected regime");
  double g = std::pow(kPi, 1.5) * std::pow(2.0, 3.0 - a) * std::tgamma(z) / std::tgamma(0.5 * (a + l));
  return minus_i_pow(l) * g;
}

TransformEvaluator::TransformEvaluator(const PolyhomPotential& v, const FourierOptions& opt) : v_(v), opt_(opt) {
  if (!v_.layers.empty() && !(v_.leading_order() > 3.0))
    fail(ErrorKind::Divergence, "transform needs leading order > 3");
  for (const auto& L : v_.layers) {
    std::vector<cplx> g(size_t(L.angular.lmax + 1), 0.0);
    for (int l = 0; l <= L.angular.lmax; ++l)
      if (L.angular.degree_power(l) > 0.0) g[l] = hom_ft_multiplier(L.order, l);
    gamma_.push_back(std::move(g));
  }
  const GaussRule& r = rule(64);
  tx_ = r.x;
  tw_ = r.w;
}

double TransformEvaluator::entire_radial(size_t li, int l, double rho) const {
  const HomLayer& L = v_.layers[li];
  double m = L.order, r0 = L.r0;
  // int_0^{r0} r^{2-m} j_l(rho r) dr, continued analytically in m
  double term = 1.0 / double_factorial(2 * l + 1);
  double x = rho * r0;
  double pw = std::pow(x, l) * std::pow(r0, 3.0 - m);
  double s = 0.0;
  for (int k = 0; k < 200; ++k) {
    double t = term * pw / (3.0 - m + l + 2.0 * k);
    s += t;
    if (k > 2 && std::abs(t) < 1e-18 * std::abs(s)) break;
    term *= -1.0 / (2.0 * (k + 1) * (2.0 * l + 2.0 * k + 3.0));
    pw *= x * x;
  }
  double tr = 0.0;
  for (size_t i = 0; i < tx_.size(); ++i) {
    double r = r0 + L.delta * tx_[i];
    tr += tw_[i] * (1.0 - L.window(r)) * std::pow(r, 2.0 - m) * sph_j(l, rho * r);
  }
  return s + tr * L.delta;
}

cplx TransformEvaluator::singular_part(const Vec3& xi) const {
  double rho = xi.norm();
  if (rho == 0.0) return 0.0;
  Vec3 dir = xi / rho;
  std::vector<cplx> y;
  cplx total = 0.0;
  for (size_t li = 0; li < v_.layers.size(); ++li) {
    const HomLayer& L = v_.layers[li];
    sph_harmonics(L.angular.lmax, dir, y);
    double pr = std::pow(rho, L.order - 3.0);
    for (int l = 0; l <= L.angular.lmax; ++l) {
      if (gamma_[li][l] == 0.0) continue;
      cplx ang = 0.0;
      for (int m = -l; m <= l; ++m) ang += L.angular.at(l, m) * y[ShExpansion::index(l, m)];
      total += gamma_[li][l] * pr * ang;
    }
  }
  return total;
}

cplx TransformEvaluator::operator()(const Vec3& xi) const {
  double rho = xi.norm();
  Vec3 dir = rho > 0.0 ? Vec3(xi / rho) : Vec3(0, 0, 1);
  cplx total = 0.0;
  std::vector<cplx> y;
  for (size_t li = 0; li < v_.layers.size(); ++li) {
    const HomLayer& L = v_.layers[li];
    sph_harmonics(L.angular.lmax, dir, y);
    bool series_ok = rho * L.r0 <= 6.0;
    double pr = rho > 0.0 ? std::pow(rho, L.order - 3.0) : 0.0;
    for (int l = 0; l <= L.angular.lmax; ++l) {
      if (gamma_[li][l] == 0.0) continue;
      cplx ang = 0.0;
      for (int m = -l; m <= l; ++m) ang += L.angular.at(l, m) * y[ShExpansion::index(l, m)];
      cplx radial;
      if (series_ok)
        radial = gamma_[li][l] * pr - 4.0 * kPi * minus_i_pow(l) * entire_radial(li, l, rho);
      else
        radial = 4.0 * kPi * minus_i_pow(l) * layer_radial_integral(L, l, rho, opt_);
      total += radial * ang;
    }
  }
  for (const auto& b : v_.bumps) {
    double w = b.width;
    total += b.amplitude * std::pow(2.0 * kPi, 1.5) * w * w * w * std::exp(-0.5 * w * w * rho * rho) *
             std::exp(-kI * xi.dot(b.center));
  }
  return total;
}

}  // namespace relscat
