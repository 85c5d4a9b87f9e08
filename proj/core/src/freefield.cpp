#include "relscat/freefield.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <cmath>
#include <mutex>

#include "relscat/error.hpp"
#include "relscat/special.hpp"

namespace relscat {

VolumeGrid::VolumeGrid(int n_, double L_) : n(n_), L(L_) {
  require(n >= 4 && (n & (n - 1)) == 0, ErrorKind::Validation, "volume grid size must be a power of two");
  require(L > 0.0, ErrorKind::Validation, "volume grid half-width must be positive");
}

Vec3 VolumeGrid::point(size_t idx) const {
  int k = int(idx % n), j = int((idx / n) % n), i = int(idx / (size_t(n) * n));
  return {coord(i), coord(j), coord(k)};
}

Vec3 VolumeGrid::wavevector(size_t idx) const {
  int k = int(idx % n), j = int((idx / n) % n), i = int(idx / (size_t(n) * n));
  return {freq(i), freq(j), freq(k)};
}

namespace {
void same_grid(const VolumeField& a, const VolumeField& b) {
  require(a.grid.n == b.grid.n && a.grid.L == b.grid.L, ErrorKind::Structural, "volume grids differ");
}
}  // namespace

VolumeField operator+(const VolumeField& a, const VolumeField& b) {
  same_grid(a, b);
  VolumeField r = a;
  for (size_t q = 0; q < r.values.size(); ++q) r.values[q] += b.values[q];
  return r;
}

VolumeField operator-(const VolumeField& a, const VolumeField& b) {
  same_grid(a, b);
  VolumeField r = a;
  for (size_t q = 0; q < r.values.size(); ++q) r.values[q] -= b.values[q];
  return r;
}

VolumeField operator*(cplx s, const VolumeField& a) {
  VolumeField r = a;
  for (auto& v : r.values) v *= s;
  return r;
}

VolumeField multiply(const VolumeField& u, const std::function<double(const Vec3&)>& f) {
  VolumeField r = u;
#pragma omp parallel for
  for (long long q = 0; q < (long long)r.values.size(); ++q) r.values[q] *= f(u.grid.point(size_t(q)));
  return r;
}

cplx field_inner(const VolumeField& a, const VolumeField& b, double radius) {
  same_grid(a, b);
  double h3 = std::pow(a.grid.h(), 3), r2 = radius * radius;
  cplx s = 0.0;
  for (size_t q = 0; q < a.values.size(); ++q) {
    if (radius > 0.0 && a.grid.point(q).squaredNorm() > r2) continue;
    s += a.values[q] * std::conj(b.values[q]);
  }
  return s * h3;
}

double field_norm(const VolumeField& u, double radius) {
  return std::sqrt(std::max(0.0, field_inner(u, u, radius).real()));
}

cplx interpolate(const VolumeField& u, const Vec3& x, int order) {
  const VolumeGrid& g = u.grid;
  double h = g.h();
  int n = g.n;
  int idx0[3];
  double wts[3][16];
  require(order >= 2 && order <= 16, ErrorKind::Structural, "interpolation order out of range");
  for (int d = 0; d < 3; ++d) {
    double t = (x[d] + g.L) / h;
    int base = int(std::floor(t)) - (order / 2 - 1);
    idx0[d] = base;
    for (int a = 0; a < order; ++a) {
      double w = 1.0;
      for (int b = 0; b < order; ++b)
        if (b != a) w *= (t - (base + b)) / double(a - b);
      wts[d][a] = w;
    }
  }
  auto wrap = [n](int i) { return ((i % n) + n) % n; };
  cplx s = 0.0;
  for (int a = 0; a < order; ++a) {
    int i = wrap(idx0[0] + a);
    for (int b = 0; b < order; ++b) {
      int j = wrap(idx0[1] + b);
      double wab = wts[0][a] * wts[1][b];
      const cplx* row = u.values.data() + g.index(i, j, 0);
      cplx t = 0.0;
      for (int c = 0; c < order; ++c) t += wts[2][c] * row[wrap(idx0[2] + c)];
      s += wab * t;
    }
  }
  return s;
}

namespace {

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

void fft3(std::vector<cplx>& data, int n, int sign) {
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan = fftw_plan_dft_3d(n, n, n, p, p, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(plan);
  }
}

template <class F>
VolumeField multiplier_impl(const VolumeField& u, F&& sym) {
  VolumeField r = u;
  const VolumeGrid& g = u.grid;
  fft3(r.values, g.n, FFTW_FORWARD);
  double scale = 1.0 / double(g.size());
  bool bad = false;
#pragma omp parallel for reduction(|| : bad)
  for (long long q = 0; q < (long long)g.size(); ++q) {
    cplx s = sym(size_t(q));
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) bad = true;
    r.values[q] *= s * scale;
  }
  if (bad) fail(ErrorKind::Domain, "multiplier symbol is singular on the frequency lattice");
  fft3(r.values, g.n, FFTW_BACKWARD);
  return r;
}

}  // namespace

VolumeField apply_multiplier(const VolumeField& u, const Symbol& symbol) {
  return multiplier_impl(u, [&](size_t q) { return symbol(u.grid.wavevector(q)); });
}

VolumeField apply_radial_multiplier(const VolumeField& u, const RadialSymbol& symbol) {
  return multiplier_impl(u, [&](size_t q) { return symbol(u.grid.wavevector(q).norm()); });
}

namespace symbols {

RadialSymbol abs_xi() {
  return [](double k) { return cplx(k); };
}
RadialSymbol neg_laplacian() {
  return [](double k) { return cplx(k * k); };
}
RadialSymbol shifted_inverse(double lambda) {
  return [lambda](double k) { return cplx(1.0 / (k + lambda)); };
}
RadialSymbol regularized(double lambda, double eps) {
  return [lambda, eps](double k) { return 1.0 / cplx(k - lambda, -eps); };
}
RadialSymbol regularized_inverse(double lambda, double eps) {
  return [lambda, eps](double k) { return cplx(k - lambda, -eps); };
}

// Fourier transform of 1_{r<T} e^{i lambda r}/(4 pi r), written so that the
// removable singularity at k = lambda cancels analytically.
RadialSymbol truncated_helmholtz(double lambda, double T) {
  return [lambda, T](double k) {
    double x = 0.5 * (k - lambda) * T;
    double sinc = std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
    double skt = k > 0.0 ? std::sin(k * T) / k : T;
    cplx a = kI * T * sinc * std::exp(-kI * x);
    cplx b = kI * std::exp(kI * lambda * T) * skt;
    return (a - b) / (k + lambda);
  };
}

RadialSymbol outgoing_resolvent(double lambda, double T) {
  auto g = truncated_helmholtz(lambda, T);
  return [g, lambda](double k) { return 2.0 * lambda * g(k) + 1.0 / (k + lambda); };
}

}  // namespace symbols

std::vector<cplx> herglotz(double lambda, const SphereFn& h, const std::vector<Vec3>& points) {
  double rmax = 0.0;
  for (const auto& p : points) rmax = std::max(rmax, p.norm());
  if (h.grid->exact_degree() < 2.0 * lambda * rmax)
    fail(ErrorKind::Precision, "herglotz: sphere grid too coarse for lambda |x| = " + std::to_string(lambda * rmax));
  std::vector<cplx> out(points.size(), 0.0);
  const SphereGrid& g = *h.grid;
#pragma omp parallel for
  for (long long p = 0; p < (long long)points.size(); ++p) {
    cplx s = 0.0;
    for (size_t i = 0; i < g.size(); ++i)
      s += g.weight(i) * h.values[i] * std::polar(1.0, lambda * points[p].dot(g.node(i)));
    out[p] = s;
  }
  return out;
}

std::vector<cplx> herglotz_sh(double lambda, const ShExpansion& h, const std::vector<Vec3>& points) {
  std::vector<cplx> out(points.size(), 0.0);
#pragma omp parallel for
  for (long long p = 0; p < (long long)points.size(); ++p) {
    std::vector<cplx> y;
    double r = points[p].norm();
    Vec3 d = r > 0.0 ? Vec3(points[p] / r) : Vec3(0, 0, 1);
    sph_harmonics(h.lmax, d, y);
    cplx s = 0.0;
    for (int l = 0; l <= h.lmax; ++l) {
      double jl = sph_j(l, lambda * r);
      if (jl == 0.0) continue;
      cplx a = 0.0;
      for (int m = -l; m <= l; ++m) a += h.at(l, m) * y[ShExpansion::index(l, m)];
      s += 4.0 * kPi * i_pow(l) * jl * a;
    }
    out[p] = s;
  }
  return out;
}

double source_window(double r, double radius) { return smooth_cutoff(r, radius * 5.0 / 6.0, radius); }

ResolventResult free_resolvent_plus(const VolumeField& u, const ResolventParams& p) {
  require(p.lambda > 0.0, ErrorKind::Validation, "resolvent energy must be positive");
  const VolumeGrid& g = u.grid;
  double Rs = p.source_radius > 0.0 ? p.source_radius : 0.6 * g.L;
  require(Rs < g.L, ErrorKind::Validation, "source radius must lie inside the box");
  VolumeField src = multiply(u, [Rs](const Vec3& x) { return source_window(x.norm(), Rs); });
  ResolventResult out;
  if (p.method == ResolventMethod::TruncatedKernel) {
    double T = g.L;
    out.field = apply_radial_multiplier(src, symbols::outgoing_resolvent(p.lambda, T));
    out.valid_radius = T - Rs;
    return out;
  }

  const auto& sc = p.eps_scale;
  int K = int(sc.size());
  require(K >= p.extrapolation_order + 1 && p.extrapolation_order >= 1, ErrorKind::Validation,
          "epsilon schedule too short for the extrapolation order");
  for (int k = 0; k < K; ++k) {
    require(sc[k] > 0.0, ErrorKind::Validation, "epsilons must be positive");
    if (k > 0) require(sc[k] < sc[k - 1], ErrorKind::Validation, "epsilons must be strictly decreasing");
  }
  require(sc.back() >= 0.1 * (1.0 - 1e-12), ErrorKind::Validation,
          "smallest epsilon below the frequency-resolution floor 0.1 * 2 pi / L");
  double unit = 2.0 * kPi / g.L;
  std::vector<VolumeField> f;
  for (int k = 0; k < K; ++k) f.push_back(apply_radial_multiplier(src, symbols::regularized(p.lambda, sc[k] * unit)));

  // Neville tableau in eps toward eps = 0 over the smallest eps values.
  int ord = p.extrapolation_order;
  std::vector<VolumeField> T(f.end() - (ord + 1), f.end());
  std::vector<double> e(sc.end() - (ord + 1), sc.end());
  VolumeField prev = T.back();
  double prev_norm = field_norm(prev, Rs);
  for (int level = 1; level <= ord; ++level) {
    for (int i = 0; i + level <= ord; ++i) {
      double a = e[i], b = e[i + level];
      // value at 0 of the line through (a, T[i]) and (b, T[i+1])
      for (size_t q = 0; q < T[i].values.size(); ++q)
        T[i].values[q] = (b * T[i].values[q] - a * T[i + 1].values[q]) / (b - a);
    }
    const VolumeField& cur = T[ord - level];
    double d = field_norm(cur - prev, Rs) / std::max(prev_norm, 1e-300);
    out.residual_history.push_back(d);
    prev = cur;
    prev_norm = field_norm(prev, Rs);
  }
  for (size_t i = 1; i < out.residual_history.size(); ++i)
    if (out.residual_history[i] >= out.residual_history[i - 1])
      fail(ErrorKind::NonConvergence, "epsilon extrapolation residuals are not decreasing", out.residual_history[i]);
  out.residual = out.residual_history.back();
  out.field = T[0];
  out.valid_radius = g.L - Rs;
  return out;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return v;
}

namespace {

void check_radii(const std::vector<double>& radii, double lambda, FarField& ff) {
  require(radii.size() >= 2, ErrorKind::Structural, "far-field fit needs at least two radii");
  double span = *std::max_element(radii.begin(), radii.end()) - *std::min_element(radii.begin(), radii.end());
  double wl = 2.0 * kPi / lambda;
  if (span < wl) fail(ErrorKind::Conditioning, "far-field radii span less than one wavelength", span / wl);
  ff.short_span = span < 4.0 * wl || radii.size() < 8;
}

}  // namespace

FarField farfield_fit_samples(const std::vector<std::vector<cplx>>& samples, const std::vector<double>& radii,
                              double lambda, GridPtr dirs, const FarFieldOptions& opt) {
  FarField ff;
  check_radii(radii, lambda, ff);
  const size_t nr = radii.size(), nd = dirs->size();
  require(samples.size() == nr, ErrorKind::Structural, "far-field samples do not match radii");
  for (const auto& s : samples) require(s.size() == nd, ErrorKind::Structural, "far-field samples do not match grid");
  ff.g_minus = SphereFn(dirs);
  ff.g_plus = SphereFn(dirs);

  if (opt.model == FarFieldModel::PerDirection) {
    int K = opt.correction_terms + 1;
    Eigen::MatrixXcd A(nr, 2 * K);
    for (size_t r = 0; r < nr; ++r)
      for (int k = 0; k < K; ++k) {
        double pw = std::pow(radii[r], -(1.0 + k));
        A(r, 2 * k) = std::polar(pw, -lambda * radii[r]);
        A(r, 2 * k + 1) = std::polar(pw, lambda * radii[r]);
      }
    Eigen::VectorXd cn = A.colwise().norm();
    Eigen::MatrixXcd An = A * cn.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(An);
    double cond = svd.singularValues()(0) / svd.singularValues().tail(1)(0);
    if (!(cond < 1e10)) fail(ErrorKind::Conditioning, "far-field design matrix is ill-conditioned", cond);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(An);
    Eigen::MatrixXcd B(nr, nd);
    for (size_t r = 0; r < nr; ++r)
      for (size_t i = 0; i < nd; ++i) B(r, i) = samples[r][i];
    Eigen::MatrixXcd X = qr.solve(B);
    Eigen::MatrixXcd Rm = An * X - B;
    double maxnorm = B.colwise().norm().maxCoeff();
    for (size_t i = 0; i < nd; ++i) {
      ff.g_minus.values[i] = X(0, i) / cn(0);
      ff.g_plus.values[i] = X(1, i) / cn(1);
      double den = std::max(B.col(i).norm(), 1e-3 * maxnorm);
      if (den > 0.0) ff.residual = std::max(ff.residual, Rm.col(i).norm() / den);
    }
    return ff;
  }

  // Hankel model: per-harmonic a h1_l + b h2_l
  int L = opt.lmax;
  require(dirs->exact_degree() >= 2 * L, ErrorKind::Precision, "far-field grid too coarse for the Hankel degree");
  std::vector<ShExpansion> ex(nr);
  for (size_t r = 0; r < nr; ++r) ex[r] = sh_analyze(SphereFn(dirs, samples[r]), L);
  ShExpansion a(L), b(L);
  Eigen::MatrixXcd fitted(nr, ex[0].c.size());
  for (int l = 0; l <= L; ++l) {
    Eigen::MatrixXcd A(nr, 2);
    for (size_t r = 0; r < nr; ++r) {
      A(r, 0) = sph_h1(l, lambda * radii[r]);
      A(r, 1) = sph_h2(l, lambda * radii[r]);
    }
    Eigen::VectorXd cn = A.colwise().norm();
    Eigen::MatrixXcd An = A * cn.cwiseInverse().asDiagonal();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(An);
    for (int m = -l; m <= l; ++m) {
      Eigen::VectorXcd y(nr);
      for (size_t r = 0; r < nr; ++r) y(r) = ex[r].at(l, m);
      Eigen::VectorXcd x = qr.solve(y);
      a.at(l, m) = x(0) / cn(0);
      b.at(l, m) = x(1) / cn(1);
      Eigen::VectorXcd yf = An * x;
      for (size_t r = 0; r < nr; ++r) fitted(r, ShExpansion::index(l, m)) = yf(r);
    }
  }
  ShExpansion gp(L), gm(L);
  for (int l = 0; l <= L; ++l)
    for (int m = -l; m <= l; ++m) {
      gp.at(l, m) = a.at(l, m) * minus_i_pow(l + 1) / lambda;
      gm.at(l, m) = b.at(l, m) * i_pow(l + 1) / lambda;
    }
  ff.g_plus = sh_synthesize(gp, dirs);
  ff.g_minus = sh_synthesize(gm, dirs);
  // residual per direction: synthesized model vs samples
  double maxnorm = 0.0;
  std::vector<double> num(nd, 0.0), den(nd, 0.0);
  for (size_t r = 0; r < nr; ++r) {
    ShExpansion e(L);
    for (size_t q = 0; q < e.c.size(); ++q) e.c[q] = fitted(r, q);
    SphereFn model = sh_synthesize(e, dirs);
    for (size_t i = 0; i < nd; ++i) {
      num[i] += std::norm(model.values[i] - samples[r][i]);
      den[i] += std::norm(samples[r][i]);
    }
  }
  for (size_t i = 0; i < nd; ++i) maxnorm = std::max(maxnorm, std::sqrt(den[i]));
  for (size_t i = 0; i < nd; ++i) {
    double d = std::max(std::sqrt(den[i]), 1e-3 * maxnorm);
    if (d > 0.0) ff.residual = std::max(ff.residual, std::sqrt(num[i]) / d);
  }
  return ff;
}

FarField farfield_fit(const VolumeField& u, double lambda, const std::vector<double>& radii, GridPtr dirs,
                      const FarFieldOptions& opt) {
  for (double r : radii)
    require(r > 0.0 && r < u.grid.L, ErrorKind::Structural, "far-field radius outside the grid");
  GridPtr sgrid = dirs;
  if (opt.model == FarFieldModel::Hankel && dirs->exact_degree() < 2 * opt.lmax)
    sgrid = SphereGrid::product(opt.lmax + 1, 2 * opt.lmax + 2);
  std::vector<std::vector<cplx>> s(radii.size(), std::vector<cplx>(sgrid->size()));
#pragma omp parallel for collapse(2)
  for (long long r = 0; r < (long long)radii.size(); ++r)
    for (long long i = 0; i < (long long)sgrid->size(); ++i)
      s[r][i] = interpolate(u, radii[r] * sgrid->node(size_t(i)), opt.interp_order);
  FarField ff = farfield_fit_samples(s, radii, lambda, sgrid, opt);
  if (sgrid != dirs) {
    int L = opt.lmax;
    ff.g_plus = sh_synthesize(sh_analyze(ff.g_plus, L), dirs);
    ff.g_minus = sh_synthesize(sh_analyze(ff.g_minus, L), dirs);
  }
  return ff;
}

ShiftedResolventResult shifted_resolvent_asymp(const ShExpansion& h_plus, const ShExpansion& h_minus, double lambda,
                                               const ShiftedResolventOptions& opt) {
  ShiftedResolventResult res;
  if (h_plus.norm() == 0.0 && h_minus.norm() == 0.0) return res;
  VolumeGrid g(opt.n, opt.L);
  require(opt.fall_end < opt.L, ErrorKind::Validation, "shifted-resolvent window exceeds the box");
  auto chi = [&](double r) {
    return smooth_step((r - opt.rise_start) / (opt.rise_end - opt.rise_start)) *
           smooth_cutoff(r, opt.fall_start, opt.fall_end);
  };
  VolumeField v = VolumeField::sample(g, [&](const Vec3& x) -> cplx {
    double r = x.norm(), c = chi(r);
    if (c == 0.0) return 0.0;
    Vec3 d = x / r;
    return c * (std::polar(1.0 / r, lambda * r) * h_plus.evaluate(d) +
                std::polar(1.0 / r, -lambda * r) * h_minus.evaluate(d));
  });
  VolumeField out = apply_radial_multiplier(v, symbols::shifted_inverse(lambda));

  GridPtr dirs = opt.fit_grid ? opt.fit_grid : SphereGrid::product(10, 20);
  double a = opt.rise_end + 1.0, b = opt.fall_start - 1.0;
  auto radii = linspace(a, b, std::max(12, int(std::ceil(8.0 * (b - a) * lambda / (2 * kPi)))));
  FarFieldOptions fo;
  fo.correction_terms = 2;
  FarField fin = farfield_fit(v, lambda, radii, dirs, fo);
  FarField fout = farfield_fit(out, lambda, radii, dirs, fo);
  res.fit_residual = std::max(fin.residual, fout.residual);
  double votes = 0.0;
  int nv = 0;
  auto ratio = [&](const SphereFn& o, const SphereFn& i, cplx& r) {
    double n2 = inner(i, i).real();
    if (n2 <= 0.0) return;
    r = inner(o, i) / n2;
    votes += 2.0 * lambda * r.real();
    ++nv;
  };
  ratio(fout.g_plus, fin.g_plus, res.ratio_plus);
  ratio(fout.g_minus, fin.g_minus, res.ratio_minus);
  double mean = nv ? votes / nv : 0.0;
  if (std::abs(mean - 1.0) < 0.25)
    res.sign = 1;
  else if (std::abs(mean + 1.0) < 0.25)
    res.sign = -1;
  res.inconclusive = res.fit_residual > opt.fit_tolerance || res.sign == 0;
  return res;
}

ShiftedResolventResult shifted_resolvent_asymp(const SphereFn& h_plus, const SphereFn& h_minus, double lambda,
                                               const ShiftedResolventOptions& opt) {
  int L = h_plus.grid->exact_degree() / 2;
  return shifted_resolvent_asymp(sh_analyze(h_plus, L), sh_analyze(h_minus, L), lambda, opt);
}

}  // namespace relscat
