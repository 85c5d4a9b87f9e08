#include "relscat/verify.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "relscat/error.hpp"
#include "relscat/inverse.hpp"

namespace relscat {

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Inconclusive: return "inconclusive";
  }
  return "?";
}

int VerifyReport::exit_code() const {
  bool inconclusive = false;
  for (const auto& c : checks) {
    if (c.status == CheckStatus::Fail) return 3;
    inconclusive |= c.status == CheckStatus::Inconclusive;
  }
  return inconclusive ? 4 : 0;
}

std::string VerifyReport::summary() const {
  std::ostringstream os;
  int pass = 0;
  for (const auto& c : checks) {
    pass += c.status == CheckStatus::Pass;
    os << "[" << to_string(c.status) << "] " << c.name << ": " << c.statement << "  (value " << c.value << ", tol "
       << c.tolerance << ")";
    if (!c.detail.empty()) os << "  " << c.detail;
    os << "\n";
  }
  os << pass << "/" << checks.size() << " checks passed\n";
  return os.str();
}

namespace {

ShExpansion random_expansion(std::mt19937_64& rng, int lmax) {
  std::normal_distribution<double> n;
  ShExpansion e(lmax);
  for (auto& c : e.c) c = cplx(n(rng), n(rng));
  return e;
}

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Eigen::Matrix3d a;
  for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = n(rng);
  Eigen::HouseholderQR<Eigen::Matrix3d> qr(a);
  Mat3 q = qr.householderQ();
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

PolyhomPotential gaussian(double amp, Vec3 c, double w) {
  PolyhomPotential v;
  v.bumps.push_back({c, w, amp});
  return v;
}

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

double rel_l2(const SphereFn& a, const SphereFn& b) { return l2_norm(a - b) / l2_norm(b); }

// Runs one check; module errors become failures (inconclusive for Inconclusive).
void run_check(VerifyReport& rep, const std::string& name, const std::string& statement, double tol,
               const std::function<double(std::string&)>& body) {
  CheckResult c;
  c.name = name;
  c.statement = statement;
  c.tolerance = tol;
  try {
    c.value = body(c.detail);
    c.status = (c.value <= tol) ? CheckStatus::Pass : CheckStatus::Fail;
  } catch (const Error& e) {
    c.status = e.kind() == ErrorKind::Inconclusive ? CheckStatus::Inconclusive : CheckStatus::Fail;
    c.value = e.residual();
    c.detail = std::string(to_string(e.kind())) + ": " + e.what();
  }
  rep.checks.push_back(c);
}

}  // namespace

double free_matrix_farfield_error(double lambda, const ShExpansion& h) {
  auto dirs = SphereGrid::product(8, 16);
  auto radii = linspace(40.0 / lambda, 80.0 / lambda, 24);
  ShExpansion hstar = h;
  for (int l = 0; l <= h.lmax; ++l)
    for (int m = -l; m <= l; ++m) hstar.at(l, m) *= (l % 2) ? -1.0 : 1.0;
  std::vector<std::vector<cplx>> s;
  for (double r : radii) {
    std::vector<Vec3> pts;
    for (auto& d : dirs->nodes()) pts.push_back(r * d);
    s.push_back(herglotz_sh(lambda, hstar, pts));
  }
  auto ff = farfield_fit_samples(s, radii, lambda, dirs);
  auto hs = sh_synthesize(h, dirs);
  return std::max(rel_l2(ff.g_minus, cplx(0, 2 * kPi / lambda) * hs),
                  rel_l2(ff.g_plus, cplx(0, -2 * kPi / lambda) * antipodal(hs)));
}

VerifyReport run_verify(const VerifyOptions& opt) {
  VerifyReport rep;
  rep.convention = opt.convention;
  std::mt19937_64 rng(opt.seed);
  auto g16 = SphereGrid::product(16, 32);

  run_check(rep, "quadrature_exactness", "sum w_i Y_lm conj(Y_l'm') = delta for l, l' <= D/2", 1e-10,
            [&](std::string&) {
              int half = g16->exact_degree() / 2;
              double err = 0.0;
              std::uniform_int_distribution<int> L(0, half);
              for (int t = 0; t < 40; ++t) {
                int l1 = L(rng), l2 = t % 3 ? L(rng) : l1;
                int m1 = std::uniform_int_distribution<int>(-l1, l1)(rng);
                int m2 = t % 3 ? std::uniform_int_distribution<int>(-l2, l2)(rng) : m1;
                auto f = SphereFn::sample(g16, [&](const Vec3& x) {
                  return sph_harmonic(l1, m1, x) * std::conj(sph_harmonic(l2, m2, x));
                });
                err = std::max(err, std::abs(integrate(f) - ((l1 == l2 && m1 == m2) ? 1.0 : 0.0)));
              }
              return err;
            });

  run_check(rep, "parseval", "<f, f> = sum |c_lm|^2 (relative)", 1e-8, [&](std::string&) {
    double err = 0.0;
    for (int t = 0; t < 4; ++t) {
      auto e = random_expansion(rng, 8);
      auto f = sh_synthesize(e, g16);
      err = std::max(err, std::abs(inner(f, f).real() - e.norm() * e.norm()) / (e.norm() * e.norm()));
    }
    return err;
  });

  run_check(rep, "round_trip", "analyze(synthesize(c)) = c on product and rotated grids", 1e-10,
            [&](std::string&) {
              double err = 0.0;
              for (int t = 0; t < 4; ++t) {
                GridPtr g = t % 2 ? g16->rotated(random_rotation(rng)) : g16;
                auto e = random_expansion(rng, 8);
                auto back = sh_analyze(sh_synthesize(e, g), 8);
                for (size_t i = 0; i < e.c.size(); ++i) err = std::max(err, std::abs(back.c[i] - e.c[i]));
              }
              return err;
            });

  run_check(rep, "antipodal_parity", "f(-x) has coefficients (-1)^l c_lm", 1e-10, [&](std::string&) {
    auto e = random_expansion(rng, 8);
    auto fa = sh_analyze(antipodal(sh_synthesize(e, g16)), 8);
    double err = 0.0;
    for (int l = 0; l <= 8; ++l)
      for (int m = -l; m <= l; ++m) err = std::max(err, std::abs(fa.at(l, m) - ((l % 2) ? -1.0 : 1.0) * e.at(l, m)));
    return err;
  });

  run_check(rep, "multiplier_composition", "|D|^2 = -Laplacian (relative)", 1e-12, [&](std::string&) {
    VolumeGrid g(32, 6.0);
    auto u = VolumeField::sample(g, [](const Vec3& x) {
      return cplx(std::exp(-(x - Vec3(0.3, -0.2, 0.5)).squaredNorm() / (2 * 0.81)));
    });
    auto twice = apply_radial_multiplier(apply_radial_multiplier(u, symbols::abs_xi()), symbols::abs_xi());
    auto lap = apply_radial_multiplier(u, symbols::neg_laplacian());
    return field_norm(twice - lap) / field_norm(lap);
  });

  run_check(rep, "free_matrix", "h'(theta) = -h(-theta) for V = 0, and far field of Phi0 h", 0.01,
            [&](std::string& d) {
              auto g = SphereGrid::product(8, 16);
              AmplitudeTable t;
              t.lambda = 1.0;
              t.inc = t.out = g;
              t.values = Eigen::MatrixXcd::Zero(g->size(), g->size());
              auto h = sh_synthesize(random_expansion(rng, 5), g);
              double alg = l2_norm(apply_smatrix(t, h) + antipodal(h)) / l2_norm(h);
              double ff = 0.0;
              for (auto [l, m] : {std::pair{0, 0}, {1, 0}, {2, 1}}) {
                ShExpansion e(l);
                e.at(l, m) = 1.0;
                ff = std::max(ff, free_matrix_farfield_error(1.0, e));
              }
              d = "algebraic " + sci(alg) + ", far-field fit " + sci(ff);
              return std::max(alg, ff);
            });

  run_check(rep, "hom_multiplier", "hom_ft_multiplier(2, 0) = 2 pi^2", 1e-10,
            [&](std::string&) { return std::abs(hom_ft_multiplier(2.0, 0) - 2 * kPi * kPi); });

  run_check(rep, "convention", "Born prefactor snapped to a closed-form candidate", 0.03, [&](std::string& d) {
    const auto& c = opt.convention;
    d = c.label + (c.measured ? " (measured)" : " (assumed)");
    return c.measured ? c.fit_rel_error : 0.0;
  });

  if (!opt.quick) {
    auto v1 = gaussian(0.1, Vec3(0.3, -0.2, 0.4), 0.7), v2 = gaussian(-0.07, Vec3(-0.5, 0.2, 0.0), 0.5);

    run_check(rep, "born_linearity", "first Born field is linear in V", 1e-8, [&](std::string&) {
      BornOptions bo;
      bo.grid = VolumeGrid(64, 12.0);
      bo.order = 1;
      bo.source_radius = 4.0;
      Vec3 w(0, 0, 1);
      auto a = born_field(v1, 2.0, w, bo).w, b = born_field(v2, 2.0, w, bo).w;
      auto ab = born_field(v1 + scaled(v2, 2.5), 2.0, w, bo).w;
      auto expect = a + cplx(2.5) * b;
      return field_norm(ab - expect, 6.0) / field_norm(expect, 6.0);
    });

    run_check(rep, "reciprocity", "f(theta, w) = f(-w, -theta) at Born order 2", 0.02, [&](std::string&) {
      auto v = gaussian(0.25, Vec3(0.3, -0.2, 0.4), 0.7);
      FarFieldAmplitudeOptions fo;
      fo.born.grid = opt.grid;
      fo.born.order = 2;
      Vec3 th(1, 0, 0), w(0, 0, 1);
      cplx a = amplitude_farfield(v, 2.0, w, SphereGrid::points({th}), fo).f.values[0];
      cplx b = amplitude_farfield(v, 2.0, -th, SphereGrid::points({-w}), fo).f.values[0];
      return std::abs(a - b) / std::abs(a);
    });

    run_check(rep, "route_equivalence", "grid far-field amplitude matches C lambda V^ at N = 1", 0.03,
              [&](std::string&) {
                double lambda = 3.0;
                auto out = SphereGrid::product(8, 16);
                FarFieldAmplitudeOptions fo;
                fo.born.grid = opt.grid;
                fo.born.order = 1;
                auto ff = amplitude_farfield(v1, lambda, Vec3(0, 0, 1), out, fo);
                auto t = amplitude_table(v1, lambda, SphereGrid::points({Vec3(0, 0, 1)}), out, 1, opt.convention);
                return rel_l2(ff.f, t.column(0));
              });
  }

  run_check(rep, "scaling_covariance", "layer_strip(sV) = s layer_strip(V): order and angular part", 0.02,
            [&](std::string& d) {
              HomLayer L;
              L.order = 3.5;
              L.angular = ShExpansion(1);
              L.angular.at(0, 0) = std::sqrt(4 * kPi);
              L.angular.at(1, 0) = 0.5 * std::sqrt(4 * kPi / 3);
              PolyhomPotential v;
              v.layers.push_back(L);
              auto g = SphereGrid::product(16, 16);
              auto a = layer_strip(amplitude_table(v, 2.0, g, g, 1, opt.convention), 1);
              auto b = layer_strip(amplitude_table(scaled(v, 3.0), 2.0, g, g, 1, opt.convention), 1);
              if (a.layers.empty() || b.layers.empty()) fail(ErrorKind::Precision, "no layer recovered");
              double dorder = std::abs(a.layers[0].order - b.layers[0].order);
              double num = 0.0, den = 0.0;
              for (int l = 0; l <= 2; ++l)
                for (int m = -l; m <= l; ++m) {
                  cplx ea = a.layers[0].angular.get(l, m) * 3.0, eb = b.layers[0].angular.get(l, m);
                  num += std::norm(eb - ea);
                  den += std::norm(ea);
                }
              double dang = std::sqrt(num / den);
              d = "order gap " + sci(dorder) + ", angular " + sci(dang);
              return std::max(dorder, dang);
            });

  ShiftedResolventResult sr;
  run_check(rep, "shifted_resolvent_sign", "sign of the (|D| + lambda)^{-1} far-field ratio, fit residual", 0.05,
            [&](std::string& d) {
              ShExpansion hp(2), hm(2);
              hp.at(0, 0) = 1.0;
              hp.at(1, 0) = 0.4;
              hm.at(2, 1) = 0.7;
              sr = shifted_resolvent_asymp(hp, hm, 3.0);
              if (sr.inconclusive || sr.sign == 0)
                fail(ErrorKind::Inconclusive, "sign undecided", sr.fit_residual);
              d = std::string("measured sign ") + (sr.sign > 0 ? "+1/(2 lambda)" : "-1/(2 lambda)");
              return sr.fit_residual;
            });
  rep.shifted_ratio = sr.ratio_plus;
  rep.shifted_sign = sr.sign;

  // Herglotz pairs make both sides vanish; the outgoing pair gives LHS = i<h+, h->.
  run_check(rep, "boundary_pairing", "pairing LHS = RHS for free Herglotz and outgoing pairs (relative)", 0.02,
            [&](std::string& d) {
              auto hp = random_expansion(rng, 3), hm = random_expansion(rng, 3);
              PairingOptions po;
              po.grid = opt.grid;
              if (sr.sign != 0) po.shifted_ratio = sr.sign / (2.0 * 2.0);  // measured sign at this lambda
              auto r = boundary_pairing_residual(hp, hm, PolyhomPotential{}, 2.0, po);
              po.outgoing_pair = true;
              auto o = boundary_pairing_residual(hp.truncated(2), hm.truncated(2), PolyhomPotential{}, 2.0, po);
              for (const auto* x : {&r, &o})
                if (x->inconclusive) fail(ErrorKind::Inconclusive, "Cesaro windows disagree", x->radial_spread);
              std::ostringstream os;
              os << "herglotz " << sci(r.residual) << " (scale " << sci(r.scale) << "), outgoing " << sci(o.residual)
                 << " lhs " << o.lhs << " rhs " << o.rhs;
              d = os.str();
              return std::max(r.residual, o.residual);
            });

  return rep;
}

}  // namespace relscat
