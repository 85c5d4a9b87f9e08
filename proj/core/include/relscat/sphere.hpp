#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "relscat/types.hpp"

namespace relscat {

// Product Gauss-Legendre (in cos of the polar angle) x uniform azimuth grid,
// optionally rigidly rotated. Immutable; shared by reference.
class SphereGrid {
 public:
  static std::shared_ptr<const SphereGrid> product(int n_polar, int n_azimuth);
  // Smallest product grid integrating harmonics of degree <= D exactly.
  static std::shared_ptr<const SphereGrid> for_degree(int degree);

  // Bare direction list (no quadrature exactness); for evaluating at chosen nodes.
  static std::shared_ptr<const SphereGrid> points(std::vector<Vec3> dirs);

  std::shared_ptr<const SphereGrid> rotated(const Mat3& rot) const;

  size_t size() const { return nodes_.size(); }
  const Vec3& node(size_t i) const { return nodes_[i]; }
  double weight(size_t i) const { return weights_[i]; }
  const std::vector<Vec3>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  int exact_degree() const { return degree_; }
  int n_polar() const { return n_polar_; }
  int n_azimuth() const { return n_azimuth_; }
  bool is_rotated() const { return rotated_; }
  const Mat3& rotation() const { return rot_; }
  const std::vector<double>& polar_cos() const { return cos_; }

  // Index of the node equal to -node(i), if the grid is antipodally closed.
  std::optional<size_t> antipode(size_t i) const;
  // Nearest node to a unit vector.
  size_t nearest(const Vec3& dir) const;

 private:
  SphereGrid() = default;
  std::vector<Vec3> nodes_;
  std::vector<double> weights_;
  std::vector<double> cos_;
  int n_polar_ = 0, n_azimuth_ = 0, degree_ = 0;
  bool rotated_ = false;
  Mat3 rot_ = Mat3::Identity();
};

using GridPtr = std::shared_ptr<const SphereGrid>;

struct SphereFn {
  GridPtr grid;
  std::vector<cplx> values;

  SphereFn() = default;
  SphereFn(GridPtr g, std::vector<cplx> v);
  explicit SphereFn(GridPtr g) : grid(g), values(g->size(), 0.0) {}

  template <class F>
  static SphereFn sample(GridPtr g, F&& f) {
    SphereFn out(g);
    for (size_t i = 0; i < g->size(); ++i) out.values[i] = f(g->node(i));
    return out;
  }
  size_t size() const { return values.size(); }
};

// Coefficients of sum c_lm Y_lm, orthonormal complex harmonics with the
// Condon-Shortley phase. Index l*l + l + m.
struct ShExpansion {
  int lmax = 0;
  std::vector<cplx> c;

  ShExpansion() : c(1, 0.0) {}
  explicit ShExpansion(int lmax_) : lmax(lmax_), c(size_t((lmax_ + 1) * (lmax_ + 1)), 0.0) {}
  static size_t index(int l, int m) { return size_t(l * l + l + m); }
  cplx& at(int l, int m) { return c[index(l, m)]; }
  cplx at(int l, int m) const { return c[index(l, m)]; }
  // Zero beyond this expansion's degree.
  cplx get(int l, int m) const { return l <= lmax ? c[index(l, m)] : cplx(0.0); }

  cplx evaluate(const Vec3& dir) const;
  double degree_power(int l) const;  // sum_m |c_lm|^2
  double norm() const;
  ShExpansion truncated(int new_lmax) const;
  // max |c_{l,-m} - (-1)^m conj(c_lm)|
  double reality_defect() const;
};

ShExpansion operator+(const ShExpansion& a, const ShExpansion& b);
ShExpansion operator-(const ShExpansion& a, const ShExpansion& b);
ShExpansion operator*(double s, const ShExpansion& a);

// Y_lm at a unit vector; all degrees up to lmax into out (ShExpansion indexing).
void sph_harmonics(int lmax, const Vec3& dir, std::vector<cplx>& out);
cplx sph_harmonic(int l, int m, const Vec3& dir);

cplx integrate(const SphereFn& f);
// int a conj(b)
cplx inner(const SphereFn& a, const SphereFn& b);
double l2_norm(const SphereFn& f);

SphereFn operator+(const SphereFn& a, const SphereFn& b);
SphereFn operator-(const SphereFn& a, const SphereFn& b);
SphereFn operator*(cplx s, const SphereFn& a);
// f(-x), for antipodally closed grids.
SphereFn antipodal(const SphereFn& f);

ShExpansion sh_analyze(const SphereFn& f, int lmax);
SphereFn sh_synthesize(const ShExpansion& e, GridPtr grid);

struct TailSlope {
  bool smooth = false;    // every tail coefficient negligible
  double slope = 0.0;     // d log P_l / d log(1+l)
  double kappa = 0.0;     // implied Sobolev order of a point-singular amplitude
  double residual = 0.0;  // rms residual of the log-log fit
  int l_min = 0, l_max = 0;
};

// Regresses log P_l on log(l + shift). shift = 1/2 matches Legendre-type asymptotics
// of point singularities; 1 suits sequences defined in (1 + l).
TailSlope tail_slope(const ShExpansion& e, int l_min, double shift = 1.0);

}  // namespace relscat
