#include "relscat/sphere.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "relscat/error.hpp"
#include "relscat/special.hpp"

namespace relscat {

std::shared_ptr<const SphereGrid> SphereGrid::product(int n_polar, int n_azimuth) {
  require(n_polar >= 1 && n_azimuth >= 1, ErrorKind::Structural, "sphere grid needs positive node counts");
  auto g = std::shared_ptr<SphereGrid>(new SphereGrid());
  g->n_polar_ = n_polar;
  g->n_azimuth_ = n_azimuth;
  g->degree_ = std::min(2 * n_polar - 1, n_azimuth - 1);
  GaussRule gl = gauss_legendre(n_polar);
  g->cos_ = gl.x;
  double dphi = 2.0 * kPi / n_azimuth;
  g->nodes_.reserve(size_t(n_polar) * n_azimuth);
  for (int k = 0; k < n_polar; ++k) {
    double z = gl.x[k], s = std::sqrt(std::max(0.0, 1.0 - z * z));
    for (int j = 0; j < n_azimuth; ++j) {
      double phi = dphi * j;
      g->nodes_.emplace_back(s * std::cos(phi), s * std::sin(phi), z);
      g->weights_.push_back(gl.w[k] * dphi);
    }
  }
  return g;
}

std::shared_ptr<const SphereGrid> SphereGrid::for_degree(int degree) {
  require(degree >= 0, ErrorKind::Structural, "negative exactness degree");
  return product(degree / 2 + 1, degree + 1);
}

std::shared_ptr<const SphereGrid> SphereGrid::points(std::vector<Vec3> dirs) {
  auto g = std::shared_ptr<SphereGrid>(new SphereGrid());
  for (auto& d : dirs) d.normalize();
  g->weights_.assign(dirs.size(), 4.0 * kPi / double(std::max<size_t>(dirs.size(), 1)));
  g->nodes_ = std::move(dirs);
  g->degree_ = -1;
  g->rotated_ = true;  // forces the direct (non-ring) transforms
  return g;
}

std::shared_ptr<const SphereGrid> SphereGrid::rotated(const Mat3& rot) const {
  require((rot * rot.transpose() - Mat3::Identity()).norm() < 1e-10 && rot.determinant() > 0,
          ErrorKind::Structural, "rotation matrix is not orthogonal");
  auto g = std::shared_ptr<SphereGrid>(new SphereGrid(*this));
  g->rot_ = rot * rot_;
  g->rotated_ = !g->rot_.isIdentity(1e-15);
  for (auto& n : g->nodes_) n = (rot * n).normalized();
  return g;
}

std::optional<size_t> SphereGrid::antipode(size_t i) const {
  if (n_azimuth_ % 2 != 0) return std::nullopt;
  size_t k = i / n_azimuth_, j = i % n_azimuth_;
  return (n_polar_ - 1 - k) * n_azimuth_ + (j + n_azimuth_ / 2) % n_azimuth_;
}

size_t SphereGrid::nearest(const Vec3& dir) const {
  size_t best = 0;
  double bd = -2.0;
  for (size_t i = 0; i < nodes_.size(); ++i) {
    double d = nodes_[i].dot(dir);
    if (d > bd) bd = d, best = i;
  }
  return best;
}

SphereFn::SphereFn(GridPtr g, std::vector<cplx> v) : grid(std::move(g)), values(std::move(v)) {
  require(grid && values.size() == grid->size(), ErrorKind::Structural,
          "sphere function length does not match its grid");
}

void sph_harmonics(int lmax, const Vec3& dir, std::vector<cplx>& out) {
  thread_local std::vector<double> plm;
  double z = std::clamp(dir.z(), -1.0, 1.0);
  normalized_legendre(lmax, z, plm);
  double phi = std::atan2(dir.y(), dir.x());
  out.assign(size_t((lmax + 1) * (lmax + 1)), 0.0);
  for (int m = 0; m <= lmax; ++m) {
    cplx e = std::polar(1.0, m * phi);
    double sgn = (m % 2) ? -1.0 : 1.0;
    for (int l = m; l <= lmax; ++l) {
      cplx y = plm[plm_index(l, m)] * e;
      out[ShExpansion::index(l, m)] = y;
      if (m > 0) out[ShExpansion::index(l, -m)] = sgn * std::conj(y);
    }
  }
}

cplx sph_harmonic(int l, int m, const Vec3& dir) {
  std::vector<cplx> y;
  sph_harmonics(l, dir, y);
  return y[ShExpansion::index(l, m)];
}

cplx ShExpansion::evaluate(const Vec3& dir) const {
  thread_local std::vector<cplx> y;
  sph_harmonics(lmax, dir, y);
  cplx s = 0.0;
  for (size_t i = 0; i < c.size(); ++i) s += c[i] * y[i];
  return s;
}

double ShExpansion::degree_power(int l) const {
  if (l > lmax) return 0.0;
  double s = 0.0;
  for (int m = -l; m <= l; ++m) s += std::norm(at(l, m));
  return s;
}

double ShExpansion::norm() const {
  double s = 0.0;
  for (auto& v : c) s += std::norm(v);
  return std::sqrt(s);
}

ShExpansion ShExpansion::truncated(int new_lmax) const {
  ShExpansion e(new_lmax);
  for (int l = 0; l <= std::min(lmax, new_lmax); ++l)
    for (int m = -l; m <= l; ++m) e.at(l, m) = at(l, m);
  return e;
}

double ShExpansion::reality_defect() const {
  double d = 0.0;
  for (int l = 0; l <= lmax; ++l)
    for (int m = 0; m <= l; ++m) {
      double sgn = (m % 2) ? -1.0 : 1.0;
      d = std::max(d, std::abs(at(l, -m) - sgn * std::conj(at(l, m))));
    }
  return d;
}

ShExpansion operator+(const ShExpansion& a, const ShExpansion& b) {
  ShExpansion r(std::max(a.lmax, b.lmax));
  for (int l = 0; l <= r.lmax; ++l)
    for (int m = -l; m <= l; ++m) r.at(l, m) = a.get(l, m) + b.get(l, m);
  return r;
}

ShExpansion operator-(const ShExpansion& a, const ShExpansion& b) { return a + (-1.0) * b; }

ShExpansion operator*(double s, const ShExpansion& a) {
  ShExpansion r = a;
  for (auto& v : r.c) v *= s;
  return r;
}

cplx integrate(const SphereFn& f) {
  require(f.grid && f.values.size() == f.grid->size(), ErrorKind::Structural,
          "integrate: grid and value lengths differ");
  cplx s = 0.0;
  for (size_t i = 0; i < f.values.size(); ++i) s += f.grid->weight(i) * f.values[i];
  return s;
}

cplx inner(const SphereFn& a, const SphereFn& b) {
  require(a.grid && b.grid && a.grid->size() == b.grid->size() && a.values.size() == b.values.size(),
          ErrorKind::Structural, "inner: grid mismatch");
  cplx s = 0.0;
  for (size_t i = 0; i < a.values.size(); ++i) s += a.grid->weight(i) * a.values[i] * std::conj(b.values[i]);
  return s;
}

double l2_norm(const SphereFn& f) { return std::sqrt(std::max(0.0, inner(f, f).real())); }

SphereFn operator+(const SphereFn& a, const SphereFn& b) {
  require(a.grid == b.grid || (a.grid && b.grid && a.grid->size() == b.grid->size()), ErrorKind::Structural,
          "sphere function grid mismatch");
  SphereFn r = a;
  for (size_t i = 0; i < r.values.size(); ++i) r.values[i] += b.values[i];
  return r;
}

SphereFn operator-(const SphereFn& a, const SphereFn& b) { return a + cplx(-1.0) * b; }

SphereFn operator*(cplx s, const SphereFn& a) {
  SphereFn r = a;
  for (auto& v : r.values) v *= s;
  return r;
}

SphereFn antipodal(const SphereFn& f) {
  SphereFn r(f.grid);
  for (size_t i = 0; i < f.size(); ++i) {
    auto j = f.grid->antipode(i);
    require(j.has_value(), ErrorKind::Structural, "grid is not antipodally closed");
    r.values[i] = f.values[*j];
  }
  return r;
}

namespace {

// Ring-wise transforms are valid in the grid's own frame; rotated grids
// get the direct per-node path.
ShExpansion analyze_rings(const SphereFn& f, int lmax) {
  const SphereGrid& g = *f.grid;
  int np = g.n_polar(), na = g.n_azimuth();
  ShExpansion e(lmax);
  std::vector<double> plm;
  for (int k = 0; k < np; ++k) {
    normalized_legendre(lmax, g.polar_cos()[k], plm);
    double w = g.weight(size_t(k) * na);
    const cplx* row = f.values.data() + size_t(k) * na;
    for (int m = 0; m <= lmax; ++m) {
      // sums against e^{-im phi} and e^{+im phi}
      cplx sp = 0.0, sm = 0.0;
      for (int j = 0; j < na; ++j) {
        cplx tw = std::polar(1.0, -2.0 * kPi * double((long(m) * j) % na) / na);
        sp += row[j] * tw;
        sm += row[j] * std::conj(tw);
      }
      double sgn = (m % 2) ? -1.0 : 1.0;
      for (int l = m; l <= lmax; ++l) {
        double p = plm[plm_index(l, m)] * w;
        e.at(l, m) += p * sp;
        if (m > 0) e.at(l, -m) += sgn * p * sm;
      }
    }
  }
  return e;
}

}  // namespace

ShExpansion sh_analyze(const SphereFn& f, int lmax) {
  require(f.grid && f.values.size() == f.grid->size(), ErrorKind::Structural, "sh_analyze: bad sphere function");
  require(lmax >= 0, ErrorKind::Structural, "sh_analyze: negative degree");
  if (2 * lmax > f.grid->exact_degree())
    fail(ErrorKind::Precision, "sh_analyze: degree " + std::to_string(lmax) + " exceeds half the grid exactness " +
                                   std::to_string(f.grid->exact_degree()));
  if (!f.grid->is_rotated()) return analyze_rings(f, lmax);
  ShExpansion e(lmax);
  std::vector<cplx> y;
  for (size_t i = 0; i < f.size(); ++i) {
    sph_harmonics(lmax, f.grid->node(i), y);
    cplx fw = f.values[i] * f.grid->weight(i);
    for (size_t q = 0; q < y.size(); ++q) e.c[q] += fw * std::conj(y[q]);
  }
  return e;
}

SphereFn sh_synthesize(const ShExpansion& e, GridPtr grid) {
  SphereFn out(grid);
  const SphereGrid& g = *grid;
  if (!g.is_rotated()) {
    int np = g.n_polar(), na = g.n_azimuth(), L = e.lmax;
    std::vector<double> plm;
    std::vector<cplx> am(size_t(2 * L + 1));
    for (int k = 0; k < np; ++k) {
      normalized_legendre(L, g.polar_cos()[k], plm);
      for (int m = -L; m <= L; ++m) {
        int am_ = std::abs(m);
        double sgn = (m < 0 && (am_ % 2)) ? -1.0 : 1.0;
        cplx s = 0.0;
        for (int l = am_; l <= L; ++l) s += e.at(l, m) * plm[plm_index(l, am_)];
        am[m + L] = sgn * s;
      }
      for (int j = 0; j < na; ++j) {
        cplx v = 0.0;
        for (int m = -L; m <= L; ++m)
          v += am[m + L] * std::polar(1.0, 2.0 * kPi * double(((long(m) * j) % na + na) % na) / na);
        out.values[size_t(k) * na + j] = v;
      }
    }
    return out;
  }
  for (size_t i = 0; i < g.size(); ++i) out.values[i] = e.evaluate(g.node(i));
  return out;
}

TailSlope tail_slope(const ShExpansion& e, int l_min, double shift) {
  require(l_min >= 0 && e.lmax >= l_min + 8, ErrorKind::Structural,
          "tail_slope: need at least 8 degrees above l_min");
  TailSlope t;
  t.l_min = l_min;
  t.l_max = e.lmax;
  double scale = std::max(1.0, e.norm());
  double floor = 1e-14 * scale;
  std::vector<double> xs, ys;
  bool any = false;
  for (int l = l_min; l <= e.lmax; ++l) {
    double p = e.degree_power(l);
    for (int m = -l; m <= l; ++m)
      if (std::abs(e.at(l, m)) >= floor) any = true;
    if (p > floor * floor) {
      xs.push_back(std::log(shift + l));
      ys.push_back(std::log(p));
    }
  }
  if (!any || xs.size() < 3) {
    t.smooth = true;
    return t;
  }
  Eigen::MatrixXd A(xs.size(), 2);
  Eigen::VectorXd b(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) A(i, 0) = 1.0, A(i, 1) = xs[i], b(i) = ys[i];
  Eigen::VectorXd sol = A.colPivHouseholderQr().solve(b);
  t.slope = sol(1);
  t.kappa = (-t.slope - 1.0) / 2.0;
  t.residual = std::sqrt((A * sol - b).squaredNorm() / double(xs.size()));
  return t;
}

}  // namespace relscat
