#include "relscat/inverse.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <unordered_map>

#include "relscat/error.hpp"

namespace relscat {

namespace {

double nearest_spacing(const SphereGrid& g) {
  double worst = 0.0;
  for (size_t i = 0; i < g.size(); ++i) {
    double best = 4.0;
    for (size_t j = 0; j < g.size(); ++j)
      if (j != i) best = std::min(best, (g.node(i) - g.node(j)).norm());
    if (g.size() > 1) worst = std::max(worst, best);
  }
  return worst;
}

struct CellKey {
  long long x, y, z;
  bool operator==(const CellKey& o) const { return x == o.x && y == o.y && z == o.z; }
};
struct CellHash {
  size_t operator()(const CellKey& k) const {
    return size_t(k.x * 73856093LL) ^ size_t(k.y * 19349663LL) ^ size_t(k.z * 83492791LL);
  }
};

void bin_profiles(FourierBallData& d, const BallOptions& opt) {
  d.dirs = SphereGrid::product(opt.dir_polar, opt.dir_azimuth);
  d.rho.resize(size_t(opt.n_rho));
  for (int k = 0; k < opt.n_rho; ++k) d.rho[size_t(k)] = 2.0 * d.lambda * (k + 1) / opt.n_rho;
  d.profile = Eigen::MatrixXcd::Constant(opt.n_rho, Eigen::Index(d.dirs->size()), cplx(kMissing, kMissing));
  double r = d.bin_radius;
  if (!(r > 0.0) || d.xi.empty()) return;
  auto key = [&](const Vec3& x) {
    return CellKey{(long long)std::floor(x.x() / r), (long long)std::floor(x.y() / r), (long long)std::floor(x.z() / r)};
  };
  std::unordered_map<CellKey, std::vector<size_t>, CellHash> cells;
  for (size_t s = 0; s < d.xi.size(); ++s) cells[key(d.xi[s])].push_back(s);
  for (int k = 0; k < opt.n_rho; ++k)
    for (size_t i = 0; i < d.dirs->size(); ++i) {
      Vec3 t = d.rho[size_t(k)] * d.dirs->node(i);
      CellKey c = key(t);
      std::vector<size_t> members;
      for (long long a = -1; a <= 1; ++a)
        for (long long b = -1; b <= 1; ++b)
          for (long long e = -1; e <= 1; ++e) {
            auto it = cells.find({c.x + a, c.y + b, c.z + e});
            if (it == cells.end()) continue;
            for (size_t s : it->second)
              if ((d.xi[s] - t).norm() < r) members.push_back(s);
          }
      // A bin populated only at its rim would extrapolate across a hole: treat as empty.
      double nearest = 2.0 * r;
      for (size_t q : members) nearest = std::min(nearest, (d.xi[q] - t).norm());
      if (members.empty() || nearest > 0.5 * r) continue;
      // Local linear fit about the bin centre; a plain mean is biased by the
      // gradient whenever the members sit off-centre.
      cplx est = 0.0;
      for (size_t s : members) est += d.value[s];
      est /= double(members.size());
      if (members.size() >= 6) {
        Eigen::MatrixXd A(Eigen::Index(members.size()), 4);
        Eigen::VectorXcd y(Eigen::Index(members.size()));
        for (size_t q = 0; q < members.size(); ++q) {
          Vec3 dx = (d.xi[members[q]] - t) / r;
          A.row(Eigen::Index(q)) << 1.0, dx.x(), dx.y(), dx.z();
          y(Eigen::Index(q)) = d.value[members[q]];
        }
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
        cod.setThreshold(1e-6);
        Eigen::VectorXcd sol = cod.solve(y.real()).cast<cplx>() + kI * cod.solve(y.imag()).cast<cplx>();
        est = sol(0);
      }
      d.profile(k, Eigen::Index(i)) = est;
    }
  double mx = 0.0, defect = 0.0;
  for (Eigen::Index k = 0; k < d.profile.rows(); ++k)
    for (size_t i = 0; i < d.dirs->size(); ++i) {
      cplx a = d.profile(k, Eigen::Index(i));
      if (std::isnan(a.real())) continue;
      mx = std::max(mx, std::abs(a));
      auto j = d.dirs->antipode(i);
      if (!j) continue;
      cplx b = d.profile(k, Eigen::Index(*j));
      if (!std::isnan(b.real())) defect = std::max(defect, std::abs(a - std::conj(b)));
    }
  d.max_conjugate_defect = mx > 0.0 ? defect / mx : 0.0;
}

double median(std::vector<double> v) {
  if (v.empty()) return kMissing;
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Harmonic small-frequency model. Per degree-l harmonic: analytic rho^l, rho^{l+2}, ...;
// singular rho^p; nuisance rho^{p+1} and any fixed leftover exponents.
struct BallFit {
  std::vector<double> rho;
  std::vector<std::vector<cplx>> Y;  // per sample
  Eigen::VectorXcd b;
  int L = 0;
  int n_analytic = 3;
  std::vector<double> nuisance;
  bool next = true;

  int La = 4;  // analytic terms only up to this degree: the entire part's degree-l piece is O(rho^l)

  int analytic_count(int l) const { return l <= La ? n_analytic : 0; }
  int fixed_count(int l) const { return analytic_count(l) + int(nuisance.size()); }
  int per_harmonic(int l, bool with_singular = true) const {
    return fixed_count(l) + (with_singular ? 1 + int(next) : 0);
  }
  int offset(int h, bool with_singular = true) const {
    int o = 0;
    for (int l = 0; l <= L; ++l)
      for (int m = -l; m <= l; ++m) {
        if (l * l + l + m == h) return o;
        o += per_harmonic(l, with_singular);
      }
    return o;
  }

  struct Solution {
    Eigen::VectorXcd x;
    double rss = 0.0;
  };

  Eigen::MatrixXcd design(double p, bool with_singular) const {
    Eigen::MatrixXcd A(Eigen::Index(rho.size()), Eigen::Index(offset((L + 1) * (L + 1), with_singular)));
    for (size_t s = 0; s < rho.size(); ++s) {
      double r = rho[s];
      int c = 0;
      for (int l = 0; l <= L; ++l)
        for (int m = -l; m <= l; ++m) {
          cplx y = Y[s][size_t(l * l + l + m)];
          for (int a = 0; a < analytic_count(l); ++a) A(Eigen::Index(s), c++) = y * std::pow(r, l + 2 * a);
          for (double q : nuisance) A(Eigen::Index(s), c++) = y * std::pow(r, q);
          if (with_singular) {
            A(Eigen::Index(s), c++) = y * std::pow(r, p);
            if (next) A(Eigen::Index(s), c++) = y * std::pow(r, p + 1.0);
          }
        }
    }
    return A;
  }

  Solution solve(double p, bool with_singular = true) const {
    Eigen::MatrixXcd A = design(p, with_singular);
    Eigen::VectorXd scale = A.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      if (scale(j) > 0.0) A.col(j) /= scale(j);
    Solution out;
    Eigen::VectorXcd y = A.colPivHouseholderQr().solve(b);
    out.rss = (A * y - b).squaredNorm();
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      if (scale(j) > 0.0) y(j) /= scale(j);
    out.x = y;
    return out;
  }

  size_t unknowns() const { return size_t(offset((L + 1) * (L + 1))); }

  // The sample directions of a product grid pair can leave some harmonic combinations unobservable.
  bool full_rank(double p) const {
    Eigen::MatrixXcd A = design(p, true);
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      double n = A.col(j).norm();
      if (n == 0.0) return false;
      A.col(j) /= n;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(A);
    qr.setThreshold(1e-9);
    return qr.rank() == A.cols();
  }

  // Coefficient of rho^p for harmonic h.
  cplx singular_coef(const Solution& s, int h) const {
    int l = int(std::floor(std::sqrt(double(h)) + 1e-9));
    return s.x(offset(h) + fixed_count(l));
  }
};

BallFit make_fit(const FourierBallData& d, const OrderOptions& opt, int L) {
  BallFit f;
  f.L = L;
  f.La = std::min(L, opt.lfit);
  f.n_analytic = opt.analytic_terms;
  f.nuisance = opt.nuisance;
  f.next = opt.next_order_nuisance;
  std::vector<cplx> vals;
  for (size_t s = 0; s < d.xi.size(); ++s) {
    double r = d.xi[s].norm();
    if (r < opt.rho_lo * d.lambda || r > opt.rho_hi * d.lambda) continue;
    if (!std::isfinite(d.value[s].real()) || !std::isfinite(d.value[s].imag())) continue;
    std::vector<cplx> y;
    sph_harmonics(L, d.xi[s] / r, y);
    f.rho.push_back(r);
    f.Y.push_back(std::move(y));
    vals.push_back(d.value[s]);
  }
  f.b = Eigen::Map<Eigen::VectorXcd>(vals.data(), Eigen::Index(vals.size()));
  return f;
}

}  // namespace

FourierBallData fourier_from_samples(double lambda, std::vector<Vec3> xi, std::vector<cplx> value,
                                     const BallOptions& opt) {
  require(xi.size() == value.size(), ErrorKind::Structural, "sample and value counts differ");
  FourierBallData d;
  d.lambda = lambda;
  d.xi = std::move(xi);
  d.value = std::move(value);
  if (d.bin_radius == 0.0) d.bin_radius = 0.5 * 2.0 * lambda / opt.n_rho;
  bin_profiles(d, opt);
  return d;
}

FourierBallData fourier_from_amplitude(const AmplitudeTable& t, const BallOptions& opt) {
  require(t.out && t.inc && t.values.rows() == Eigen::Index(t.out->size()) &&
              t.values.cols() == Eigen::Index(t.inc->size()),
          ErrorKind::Structural, "amplitude table shape does not match its grids");
  require(std::abs(t.constant) > 0.0, ErrorKind::Validation, "amplitude table carries no convention constant");
  FourierBallData d;
  d.lambda = t.lambda;
  cplx scale = 1.0 / (t.constant * t.lambda);
  for (size_t j = 0; j < t.inc->size(); ++j)
    for (size_t i = 0; i < t.out->size(); ++i) {
      cplx f = t.values(Eigen::Index(i), Eigen::Index(j));
      if (!std::isfinite(f.real())) continue;
      d.xi.push_back(double(t.arg_sign) * t.lambda * (t.out->node(i) - t.inc->node(j)));
      d.value.push_back(f * scale);
    }
  double spacing = std::max(nearest_spacing(*t.out), nearest_spacing(*t.inc));
  d.bin_radius = opt.bin_factor * spacing * t.lambda;
  bin_profiles(d, opt);

  // Near-diagonal columns: their spectral tail encodes the order (kappa + 2).
  if (t.out->exact_degree() >= 48 && !t.out->is_rotated()) {
    int L = t.out->exact_degree() / 4;
    int l_min = L / 4;
    std::vector<double> orders;
    size_t ncol = std::min<size_t>(4, t.inc->size());
    for (size_t c = 0; c < ncol; ++c) {
      size_t j = c * t.inc->size() / ncol;
      auto ts = tail_slope(sh_analyze(t.column(j), L), l_min, 0.5);
      if (!ts.smooth) orders.push_back(ts.kappa + 2.0);
    }
    d.tail_order = median(orders);
  }
  return d;
}

OrderEstimate estimate_order(const FourierBallData& data, const OrderOptions& opt) {
  require(opt.p_hi > opt.p_lo, ErrorKind::Validation, "empty exponent bracket");
  OrderEstimate est;
  est.tail_order = data.tail_order;
  BallFit fit = make_fit(data, opt, opt.lfit);
  est.n_samples = fit.rho.size();
  double bnorm = fit.b.norm();
  if (bnorm == 0.0) {
    est.smooth = true;
    return est;
  }
  require(est.n_samples > 4 * fit.unknowns(), ErrorKind::Precision,
          "too few Fourier samples in the small-frequency window");
  double rms = bnorm / std::sqrt(double(est.n_samples));
  double ref = opt.reference_scale > 0.0 ? opt.reference_scale : rms;
  double width = opt.p_hi - opt.p_lo;
  auto obj = [&](double p) { return fit.solve(p).rss; };
  // coarse scan, then Brent around the best cell
  int nscan = 12;
  double best_p = opt.p_lo, best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= nscan; ++k) {
    double p = opt.p_lo + width * (0.01 + 0.98 * k / nscan);
    double v = obj(p);
    if (v < best) best = v, best_p = p;
  }
  double step = width * 0.98 / nscan;
  double a = std::max(opt.p_lo + 1e-6, best_p - step), b = std::min(opt.p_hi - 1e-6, best_p + step);
  auto r = boost::math::tools::brent_find_minima(obj, a, b, 40);
  double p = r.first;
  auto sol = fit.solve(p);
  est.exponent = p;
  est.order = 3.0 + p;
  est.fit_residual = std::sqrt(sol.rss) / bnorm;
  est.analytic_residual = std::sqrt(fit.solve(p, false).rss) / bnorm;
  est.scale_fraction = rms / ref;
  est.singular_gain = est.fit_residual > 0.0 ? est.analytic_residual / est.fit_residual
                                             : std::numeric_limits<double>::infinity();
  // Smooth: negligible against the reference, or the singular terms buy (almost) nothing.
  // The gain test stays meaningful where rho^p nears an integer power and the singular
  // coefficients themselves lose meaning.
  if (est.scale_fraction < opt.smooth_tolerance || est.singular_gain < opt.gain_threshold) {
    est.smooth = true;
    est.order = est.exponent = kMissing;
    return est;
  }
  if (p - opt.p_lo < 1e-3 * width || opt.p_hi - p < 1e-3 * width)
    fail(ErrorKind::Domain,
         "singular exponent " + std::to_string(p) + " on the edge of the bracket: out of regime", p);
  if (std::isfinite(est.tail_order)) est.inconsistent = std::abs(est.tail_order - est.order) > opt.consistency;
  return est;
}

AngularRecovery recover_angular(const FourierBallData& data, double m, int lmax, const OrderOptions& opt) {
  require(m > 3.0, ErrorKind::Validation, "layer order must exceed 3");
  AngularRecovery out;
  out.angular = ShExpansion(lmax);
  BallFit fit = make_fit(data, opt, lmax);
  if (fit.b.norm() == 0.0) return out;
  while (fit.L > 0 && (fit.rho.size() <= 2 * fit.unknowns() || !fit.full_rank(m - 3.0))) {
    fit.L -= 1;
    fit.La = std::min(fit.La, fit.L);
    for (auto& y : fit.Y) y.resize(size_t((fit.L + 1) * (fit.L + 1)));
  }
  out.degree_used = fit.L;
  auto sol = fit.solve(m - 3.0);
  out.fit_residual = std::sqrt(sol.rss) / fit.b.norm();
  for (int l = 0; l <= fit.L; ++l) {
    cplx g;
    bool ok = true;
    try {
      g = hom_ft_multiplier(m, l);
      ok = std::abs(g) >= 1e-8;
    } catch (const Error&) {
      ok = false;
    }
    if (!ok) {
      out.unrecoverable.push_back(l);
      continue;
    }
    for (int mm = -l; mm <= l; ++mm) out.angular.at(l, mm) = fit.singular_coef(sol, l * l + l + mm) / g;
  }
  // real angular part: enforce c_{l,-m} = (-1)^m conj(c_{l,m})
  for (int l = 0; l <= lmax; ++l) {
    out.angular.at(l, 0) = out.angular.at(l, 0).real();
    for (int mm = 1; mm <= l; ++mm) {
      double s = (mm % 2) ? -1.0 : 1.0;
      cplx avg = 0.5 * (out.angular.at(l, mm) + s * std::conj(out.angular.at(l, -mm)));
      out.angular.at(l, mm) = avg;
      out.angular.at(l, -mm) = s * std::conj(avg);
    }
  }
  return out;
}

PolyhomPotential synthesize(const std::vector<LayerEstimate>& layers, double r0, double delta) {
  PolyhomPotential v;
  for (const auto& e : layers) {
    HomLayer L;
    L.order = e.order;
    L.angular = e.angular;
    L.r0 = r0;
    L.delta = delta;
    v.layers.push_back(L);
  }
  return v;
}

StripResult layer_strip(const AmplitudeTable& table, int J, const StripOptions& opt) {
  require(J >= 1, ErrorKind::Validation, "layer_strip needs J >= 1");
  StripResult res;
  AmplitudeConvention conv;
  conv.constant = table.constant;
  conv.arg_sign = table.arg_sign;
  AmplitudeTable cur = table;
  std::vector<double> done;
  double ref = 0.0;
  for (int j = 0; j < J; ++j) {
    FourierBallData data = fourier_from_amplitude(cur, opt.ball);
    OrderOptions oo = opt.order;
    if (j == 0) {
      BallFit probe = make_fit(data, oo, 0);
      ref = probe.rho.empty() ? 0.0 : probe.b.norm() / std::sqrt(double(probe.rho.size()));
      if (ref == 0.0) {
        res.smooth_remainder = true;
        return res;
      }
    } else {
      oo.p_lo = done.back() + 0.5;
      oo.p_hi = done.back() + 1.5;
      oo.nuisance.insert(oo.nuisance.end(), done.begin(), done.end());
    }
    oo.reference_scale = ref;
    OrderEstimate est;
    try {
      est = estimate_order(data, oo);
    } catch (const Error& e) {
      res.diagnostic = "stage " + std::to_string(j) + ": " + e.what();
      return res;
    }
    if (est.smooth) {
      res.smooth_remainder = true;
      return res;
    }
    AngularRecovery rec = recover_angular(data, est.order, opt.lmax, oo);
    LayerEstimate le;
    le.order = est.order;
    le.angular = rec.angular;
    le.fit_residual = est.fit_residual;
    le.tail_order = est.tail_order;
    le.inconsistent = est.inconsistent;
    le.unrecoverable = rec.unrecoverable;
    le.degree_used = rec.degree_used;
    res.layers.push_back(le);
    done.push_back(est.exponent);
    if (j + 1 < J) {
      PolyhomPotential v = synthesize({le}, opt.r0, opt.delta);
      cur = cur - amplitude_table(v, table.lambda, table.inc, table.out, 1, conv);
    }
  }
  return res;
}

SmoothnessVerdict smoothness_test(const AmplitudeTable& a, const AmplitudeTable& b, const SmoothnessOptions& opt) {
  AmplitudeTable d = a - b;
  require(!d.out->is_rotated() && d.out->exact_degree() >= 48, ErrorKind::Precision,
          "smoothness test needs a product outgoing grid of degree >= 48");
  int l_max = opt.l_max > 0 ? std::min(opt.l_max, d.out->exact_degree() / 2) : d.out->exact_degree() / 4;
  int l_min = opt.l_min > 0 ? opt.l_min : l_max / 4;
  SmoothnessVerdict v;
  std::vector<double> orders;
  for (size_t j = 0; j < d.inc->size(); ++j) {
    TailSlope ts = tail_slope(sh_analyze(d.column(j), l_max), l_min, 0.5);
    v.columns.push_back(ts);
    if (!ts.smooth && ts.kappa < opt.kappa_threshold) orders.push_back(ts.kappa + 2.0);
  }
  v.smooth = orders.empty();
  v.order = median(orders);
  return v;
}

}  // namespace relscat
