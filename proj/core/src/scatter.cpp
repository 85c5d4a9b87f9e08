#include "relscat/scatter.hpp"

#include <cmath>

#include "relscat/error.hpp"
#include "relscat/special.hpp"

namespace relscat {

double born_source_radius(const PolyhomPotential& v, const BornOptions& opt) {
  if (opt.source_radius > 0.0) return opt.source_radius;
  // Bumps are cut where they fall to 1e-6 of their peak; the window starts at 5/6 of the radius.
  double r = 0.0;
  for (const auto& b : v.bumps) r = std::max(r, b.center.norm() + b.width * std::sqrt(2.0 * std::log(1e6)));
  r *= 1.2;
  if (!v.layers.empty()) r = opt.grid.L / 2.0;
  return std::clamp(r, 1.0, opt.grid.L / 2.0);
}

BornResult born_field_incident(const PolyhomPotential& v, double lambda, const VolumeField& incident,
                               const BornOptions& opt) {
  require(opt.order >= 1, ErrorKind::Validation, "Born order must be at least 1");
  const VolumeGrid& g = incident.grid;
  BornResult out;
  out.source_radius = born_source_radius(v, opt);
  out.valid_radius = g.L - out.source_radius;
  out.report.order = opt.order;
  out.w = VolumeField(g);
  if (v.empty()) {
    out.report.term_norms.assign(size_t(opt.order + 1), 0.0);
    return out;
  }
  double Rs = out.source_radius;
  std::vector<double> vg(g.size());
#pragma omp parallel for
  for (long long q = 0; q < (long long)g.size(); ++q) {
    Vec3 x = g.point(size_t(q));
    double c = source_window(x.norm(), Rs);
    vg[q] = c == 0.0 ? 0.0 : c * v.eval(x);
  }
  ResolventParams rp;
  rp.lambda = lambda;
  rp.method = opt.method;
  rp.source_radius = Rs * 1.0001;  // V already carries the window
  auto times_v = [&](const VolumeField& u) {
    VolumeField r = u;
    for (size_t q = 0; q < r.values.size(); ++q) r.values[q] *= vg[q];
    return r;
  };
  VolumeField term = free_resolvent_plus(times_v(incident), rp).field;
  for (int j = 1; j <= opt.order + 1; ++j) {
    out.report.term_norms.push_back(field_norm(term, Rs));
    if (j <= opt.order) {
      double s = (j % 2) ? 1.0 : -1.0;
      for (size_t q = 0; q < term.values.size(); ++q) out.w.values[q] += s * term.values[q];
      term = free_resolvent_plus(times_v(term), rp).field;
    }
  }
  double ratio = 0.0;
  const auto& tn = out.report.term_norms;
  for (size_t j = 1; j < tn.size(); ++j)
    if (tn[j - 1] > 0.0) ratio = std::max(ratio, tn[j] / tn[j - 1]);
  out.report.contraction_ratio = ratio;
  if (ratio >= 1.0 || ratio >= opt.contraction_gate)
    fail(ErrorKind::Divergence,
         "Born series contraction ratio " + std::to_string(ratio) +
             " exceeds the gate; scale the potential down or suspect an eigenvalue",
         ratio);
  return out;
}

BornResult born_field(const PolyhomPotential& v, double lambda, const Vec3& w_dir, const BornOptions& opt) {
  require(lambda > 0.0, ErrorKind::Validation, "energy must be positive");
  Vec3 w = w_dir.normalized();
  VolumeField inc = VolumeField::sample(opt.grid, [&](const Vec3& x) { return std::polar(1.0, lambda * w.dot(x)); });
  return born_field_incident(v, lambda, inc, opt);
}

SphereFn amplitude_integral(const PolyhomPotential& v, const VolumeField& phi, double lambda, GridPtr out,
                            const IntegralOptions& opt, double* tail_bound) {
  const VolumeGrid& g = phi.grid;
  double R = opt.radius > 0.0 ? opt.radius : g.L;
  double h3 = std::pow(g.h(), 3);
  std::vector<Vec3> pts;
  std::vector<cplx> vphi;
  for (size_t q = 0; q < g.size(); ++q) {
    Vec3 x = g.point(q);
    if (x.norm() > R) continue;
    double val = v.eval(x);
    if (std::abs(val) < 1e-17) continue;
    pts.push_back(x);
    vphi.push_back(val * phi.values[q] * h3);
  }
  SphereFn f(out);
  double s = opt.exponent_sign >= 0 ? 1.0 : -1.0;
#pragma omp parallel for
  for (long long i = 0; i < (long long)out->size(); ++i) {
    Vec3 th = out->node(size_t(i));
    cplx acc = 0.0;
    for (size_t p = 0; p < pts.size(); ++p) acc += std::polar(1.0, s * lambda * th.dot(pts[p])) * vphi[p];
    f.values[i] = -lambda / (2.0 * kPi) * acc;
  }
  // |phi| is O(1) outside the core; bound the layers' contribution beyond R
  double tail = 0.0;
  double phimax = 1.0;
  for (const auto& L : v.layers) {
    double vmax = 0.0;
    auto gg = SphereGrid::product(8, 16);
    for (auto& d : gg->nodes()) vmax = std::max(vmax, std::abs(L.angular_value(d)));
    tail += lambda / (2.0 * kPi) * phimax * vmax * 4.0 * kPi * std::pow(R, 3.0 - L.order) / (L.order - 3.0);
  }
  if (tail_bound) *tail_bound = tail;
  double fmax = 0.0;
  for (auto& x : f.values) fmax = std::max(fmax, std::abs(x));
  if (tail > opt.tail_tolerance * std::max(fmax, 1e-300) && tail > 0.0)
    fail(ErrorKind::Precision, "amplitude integral tail bound exceeds tolerance", tail);
  return f;
}

FarFieldAmplitude amplitude_farfield(const PolyhomPotential& v, double lambda, const Vec3& w_dir, GridPtr out,
                                     const FarFieldAmplitudeOptions& opt) {
  FarFieldAmplitude res;
  BornResult b = born_field(v, lambda, w_dir, opt.born);
  res.report = b.report;
  if (v.empty()) {
    res.f = SphereFn(out);
    return res;
  }
  double a = b.source_radius + 0.5, c = b.valid_radius - 0.5;
  if (!(c > a)) fail(ErrorKind::Validation, "box too small: no far-field shell between source and valid radius");
  int nr = std::max(12, int(std::ceil(8.0 * (c - a) * lambda / (2.0 * kPi))));
  FarFieldOptions fo;
  fo.model = FarFieldModel::Hankel;
  fo.lmax = opt.lmax > 0 ? opt.lmax : std::min(40, int(std::ceil(lambda * b.source_radius)) + 10);
  FarField ff = farfield_fit(cplx(-1.0) * b.w, lambda, linspace(a, c, nr), out, fo);
  res.f = ff.g_plus;
  res.residual = ff.residual;
  if (ff.residual > opt.fit_tolerance)
    fail(ErrorKind::Precision, "far-field fit residual above tolerance", ff.residual);
  return res;
}

const std::vector<std::pair<std::string, cplx>>& convention_candidates() {
  static const std::vector<std::pair<std::string, cplx>> c = [] {
    std::vector<std::pair<std::string, cplx>> v;
    double a = 1.0 / (2.0 * kPi), b = 1.0 / (4.0 * kPi * kPi);
    v.push_back({"one_over_two_pi", a});
    v.push_back({"minus_one_over_two_pi", -a});
    v.push_back({"i_over_two_pi", cplx(0, a)});
    v.push_back({"minus_i_over_two_pi", cplx(0, -a)});
    v.push_back({"one_over_four_pi_squared", b});
    v.push_back({"minus_one_over_four_pi_squared", -b});
    v.push_back({"i_over_four_pi_squared", cplx(0, b)});
    v.push_back({"minus_i_over_four_pi_squared", cplx(0, -b)});
    return v;
  }();
  return c;
}

AmplitudeConvention measure_convention(const ConventionOptions& opt) {
  PolyhomPotential v;
  v.bumps.push_back({opt.center, opt.width, 0.1});
  double lambda = opt.lambda;
  Vec3 w(0, 0, 1);
  GridPtr out = SphereGrid::product(8, 16);
  FarFieldAmplitudeOptions fo;
  fo.born.grid = opt.grid;
  fo.born.order = 1;
  FarFieldAmplitude ff = amplitude_farfield(v, lambda, w, out, fo);

  TransformEvaluator T(v);
  AmplitudeConvention best;
  double best_err = std::numeric_limits<double>::infinity();
  for (int sgn : {1, -1}) {
    SphereFn model = SphereFn::sample(out, [&](const Vec3& th) { return lambda * T(sgn * lambda * (th - w)); });
    cplx c = inner(ff.f, model) / inner(model, model).real();
    double err = l2_norm(ff.f - c * model) / l2_norm(ff.f);
    if (err < best_err) {
      best_err = err;
      best.arg_sign = sgn;
      best.fitted = c;
    }
  }
  double snap_err = std::numeric_limits<double>::infinity();
  for (const auto& [label, val] : convention_candidates()) {
    double e = std::abs(best.fitted - val) / std::abs(val);
    if (e < snap_err) snap_err = e, best.constant = val, best.label = label;
  }
  best.fit_rel_error = std::max(snap_err, best_err);
  if (best.fit_rel_error > opt.snap_tolerance)
    fail(ErrorKind::Inconclusive, "Born prefactor does not snap to a candidate constant", best.fit_rel_error);

  // Volume-integral phase: which exponent reproduces the far-field route
  VolumeField phi0 = VolumeField::sample(opt.grid, [&](const Vec3& x) { return std::polar(1.0, lambda * w.dot(x)); });
  double e_minus = 0.0, e_plus = 0.0;
  for (int s : {-1, 1}) {
    IntegralOptions io;
    io.exponent_sign = s;
    SphereFn fi = amplitude_integral(v, phi0, lambda, out, io);
    (s < 0 ? e_minus : e_plus) = l2_norm(fi - ff.f) / l2_norm(ff.f);
  }
  best.exponent_sign = e_minus <= e_plus ? -1 : 1;
  best.measured = true;
  return best;
}

SphereFn AmplitudeTable::column(size_t j) const {
  SphereFn f(out);
  for (size_t i = 0; i < out->size(); ++i) f.values[i] = values(i, j);
  return f;
}

AmplitudeTable operator-(const AmplitudeTable& a, const AmplitudeTable& b) {
  require(a.out->size() == b.out->size() && a.inc->size() == b.inc->size() && a.lambda == b.lambda,
          ErrorKind::Structural, "amplitude tables live on different grids or energies");
  AmplitudeTable r = a;
  r.values = a.values - b.values;
  r.provenance = "difference";
  return r;
}

AmplitudeTable amplitude_table(const PolyhomPotential& v, double lambda, GridPtr inc, GridPtr out, int order,
                               const AmplitudeConvention& conv, const TableOptions& opt) {
  require(lambda > 0.0, ErrorKind::Validation, "energy must be positive");
  require(order >= 1, ErrorKind::Validation, "Born order must be at least 1");
  AmplitudeTable t;
  t.lambda = lambda;
  t.inc = inc;
  t.out = out;
  t.constant = conv.constant;
  t.arg_sign = conv.arg_sign;
  t.values = Eigen::MatrixXcd::Zero(out->size(), inc->size());
  t.column_errors.assign(inc->size(), "");
  bool closed = opt.route == TableRoute::ClosedForm || (opt.route == TableRoute::Auto && order == 1);
  if (closed) {
    require(order == 1, ErrorKind::Validation, "closed-form table exists only at Born order 1");
    t.provenance = "born-1";
    if (v.empty()) return t;
    TransformEvaluator T(v);
#pragma omp parallel for collapse(2)
    for (long long j = 0; j < (long long)inc->size(); ++j)
      for (long long i = 0; i < (long long)out->size(); ++i) {
        Vec3 xi = conv.arg_sign * lambda * (out->node(size_t(i)) - inc->node(size_t(j)));
        t.values(i, j) = conv.constant * lambda * T(xi);
      }
    return t;
  }
  t.provenance = order == 1 ? "farfield-fit" : "born-" + std::to_string(order);
  FarFieldAmplitudeOptions fo = opt.farfield;
  fo.born.order = order;
  for (size_t j = 0; j < inc->size(); ++j) {
    try {
      auto a = amplitude_farfield(v, lambda, inc->node(j), out, fo);
      for (size_t i = 0; i < out->size(); ++i) t.values(i, j) = a.f.values[i];
    } catch (const Error& e) {
      t.column_errors[j] = std::string(to_string(e.kind())) + ": " + e.what();
      for (size_t i = 0; i < out->size(); ++i) t.values(i, j) = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return t;
}

SphereFn apply_smatrix(const AmplitudeTable& table, const SphereFn& h) {
  require(h.grid && table.inc && table.out, ErrorKind::Structural, "apply_smatrix: missing grids");
  require(h.grid->size() == table.inc->size() && table.out->size() == table.inc->size(), ErrorKind::Structural,
          "apply_smatrix: h, incident and outgoing grids must coincide");
  require(table.values.rows() == Eigen::Index(table.out->size()) && table.values.cols() == Eigen::Index(table.inc->size()),
          ErrorKind::Structural, "apply_smatrix: table shape does not match its grids");
  for (size_t i = 0; i < h.grid->size(); ++i)
    require((h.grid->node(i) - table.inc->node(i)).norm() < 1e-12 && (h.grid->node(i) - table.out->node(i)).norm() < 1e-12,
            ErrorKind::Structural, "apply_smatrix: grid nodes differ");
  SphereFn hr = antipodal(h);
  SphereFn out(table.out);
  for (size_t i = 0; i < out.size(); ++i) {
    cplx s = 0.0;
    for (size_t j = 0; j < h.size(); ++j) s += table.inc->weight(j) * table.values(i, j) * hr.values[j];
    out.values[i] = -hr.values[i] + s;
  }
  return out;
}

namespace {

// Cesaro mean of ball integrals over R in [a, a + len]: a linear radial taper.
double cesaro_weight(double r, double a, double len) {
  if (r <= a) return 1.0;
  if (r >= a + len) return 0.0;
  return (a + len - r) / len;
}

cplx pairing_lhs(const VolumeField& up, const VolumeField& fp, const VolumeField& um, const VolumeField& fm,
                 double a, double len) {
  const VolumeGrid& g = up.grid;
  double h3 = std::pow(g.h(), 3);
  cplx s = 0.0;
  for (size_t q = 0; q < g.size(); ++q) {
    double w = cesaro_weight(g.point(q).norm(), a, len);
    if (w == 0.0) continue;
    s += w * (up.values[q] * std::conj(fm.values[q]) - fp.values[q] * std::conj(um.values[q]));
  }
  return s * h3;
}

}  // namespace

PairingResult boundary_pairing_residual(const ShExpansion& h_plus, const ShExpansion& h_minus,
                                        const PolyhomPotential& v, double lambda, const PairingOptions& opt) {
  PairingResult res;
  if (h_plus.norm() == 0.0 && h_minus.norm() == 0.0) return res;
  const VolumeGrid& g = opt.grid;
  double rho_s = opt.shifted_ratio != 0.0 ? opt.shifted_ratio : 1.0 / (2.0 * lambda);
  std::vector<Vec3> pts(g.size());
  for (size_t q = 0; q < g.size(); ++q) pts[q] = g.point(q);

  auto build = [&](const ShExpansion& h) {
    VolumeField u(g);
    if (opt.outgoing_pair) {
      u = VolumeField::sample(g, [&](const Vec3& x) -> cplx {
        double r = x.norm();
        double c = smooth_step((r - 1.0) / 2.0);
        if (c == 0.0) return 0.0;
        return c * std::polar(1.0 / r, lambda * r) * h.evaluate(x / r);
      });
      return u;
    }
    u.values = herglotz_sh(lambda, h, pts);
    if (!v.empty()) {
      BornOptions bo;
      bo.grid = g;
      bo.order = opt.born_order;
      auto b = born_field_incident(v, lambda, u, bo);
      u = u - b.w;
    }
    return u;
  };
  VolumeField up = build(h_plus), um = build(h_minus);

  GridPtr dirs = SphereGrid::product(opt.fit_lmax + 1, 2 * opt.fit_lmax + 2);
  FarFieldOptions fo;
  fo.model = FarFieldModel::Hankel;
  fo.lmax = opt.fit_lmax;
  double wl = 2.0 * kPi / lambda;
  int nr = std::max(12, int(std::ceil(8.0 * (opt.fit_end - opt.fit_start) / wl)));
  auto radii = linspace(opt.fit_start, opt.fit_end, nr);
  FarField fp = farfield_fit(up, lambda, radii, dirs, fo), fm = farfield_fit(um, lambda, radii, dirs, fo);
  res.rhs = 2.0 * kI * lambda * rho_s * (inner(fp.g_plus, fm.g_plus) - inner(fp.g_minus, fm.g_minus));
  res.scale = 2.0 * lambda * std::abs(rho_s) *
              (l2_norm(fp.g_plus) * l2_norm(fm.g_plus) + l2_norm(fp.g_minus) * l2_norm(fm.g_minus));

  auto cut = [&](const VolumeField& u) {
    return multiply(u, [&](const Vec3& x) { return smooth_cutoff(x.norm(), opt.window_start, opt.window_end); });
  };
  VolumeField wp = cut(up), wm = cut(um);
  auto op = [&](double k) { return cplx(k - lambda); };
  VolumeField gp = apply_radial_multiplier(wp, op), gm = apply_radial_multiplier(wm, op);
  cplx l1 = pairing_lhs(wp, gp, wm, gm, opt.cesaro_start, wl);
  cplx l2 = pairing_lhs(wp, gp, wm, gm, opt.cesaro_start - 0.5 * wl, wl);
  res.lhs = l1;
  double denom = std::abs(res.lhs) + std::abs(res.rhs) + res.scale;
  res.radial_spread = denom > 0.0 ? std::abs(l1 - l2) / denom : 0.0;
  res.residual = denom > 0.0 ? std::abs(res.lhs - res.rhs) / denom : 0.0;
  res.inconclusive = res.radial_spread > opt.consistency_tolerance;
  return res;
}

}  // namespace relscat
