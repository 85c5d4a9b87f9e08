#pragma once

#include <functional>
#include <vector>

#include "relscat/sphere.hpp"
#include "relscat/types.hpp"

namespace relscat {

// Uniform periodic grid on [-L, L)^3 with n points per side.
struct VolumeGrid {
  int n = 64;
  double L = 24.0;

  VolumeGrid() = default;
  VolumeGrid(int n_, double L_);
  double h() const { return 2.0 * L / n; }
  double coord(int i) const { return -L + h() * i; }
  double freq(int i) const { return (i < n / 2 ? i : i - n) * (kPi / L); }
  size_t size() const { return size_t(n) * n * n; }
  size_t index(int i, int j, int k) const { return (size_t(i) * n + j) * n + k; }
  Vec3 point(size_t idx) const;
  Vec3 wavevector(size_t idx) const;
};

struct VolumeField {
  VolumeGrid grid;
  std::vector<cplx> values;

  VolumeField() = default;
  explicit VolumeField(const VolumeGrid& g) : grid(g), values(g.size(), 0.0) {}

  template <class F>
  static VolumeField sample(const VolumeGrid& g, F&& f) {
    VolumeField u(g);
#pragma omp parallel for
    for (long long q = 0; q < (long long)g.size(); ++q) u.values[q] = f(g.point(size_t(q)));
    return u;
  }
};

VolumeField operator+(const VolumeField& a, const VolumeField& b);
VolumeField operator-(const VolumeField& a, const VolumeField& b);
VolumeField operator*(cplx s, const VolumeField& a);
// Pointwise product with a real function of position.
VolumeField multiply(const VolumeField& u, const std::function<double(const Vec3&)>& f);

// L2 norm over |x| <= radius (whole box when radius <= 0).
double field_norm(const VolumeField& u, double radius = 0.0);
// sum over |x| <= radius of a conj(b) h^3
cplx field_inner(const VolumeField& a, const VolumeField& b, double radius = 0.0);

// Periodic tensor Lagrange interpolation with `order` points per axis.
cplx interpolate(const VolumeField& u, const Vec3& x, int order = 6);

using Symbol = std::function<cplx(const Vec3& k)>;
using RadialSymbol = std::function<cplx(double k)>;

VolumeField apply_multiplier(const VolumeField& u, const Symbol& symbol);
VolumeField apply_radial_multiplier(const VolumeField& u, const RadialSymbol& symbol);

namespace symbols {
RadialSymbol abs_xi();
RadialSymbol neg_laplacian();
RadialSymbol shifted_inverse(double lambda);                   // (|k| + lambda)^{-1}
RadialSymbol regularized(double lambda, double eps);           // (|k| - lambda - i eps)^{-1}
RadialSymbol regularized_inverse(double lambda, double eps);   // |k| - lambda - i eps
RadialSymbol truncated_helmholtz(double lambda, double T);     // outgoing e^{i lambda r}/(4 pi r), r < T
RadialSymbol outgoing_resolvent(double lambda, double T);      // (|k| - lambda - i0)^{-1}
}  // namespace symbols

// Phi_0 h(x) = int e^{i lambda x.w} h(w) dw by quadrature on h's grid.
std::vector<cplx> herglotz(double lambda, const SphereFn& h, const std::vector<Vec3>& points);
// Same for band-limited h given by coefficients; exact via 4 pi i^l j_l Y_lm.
std::vector<cplx> herglotz_sh(double lambda, const ShExpansion& h, const std::vector<Vec3>& points);

enum class ResolventMethod { TruncatedKernel, EpsilonRichardson };

struct ResolventParams {
  double lambda = 1.0;
  ResolventMethod method = ResolventMethod::TruncatedKernel;
  // EpsilonRichardson: multiples of 2 pi / L, strictly decreasing
  std::vector<double> eps_scale{0.4, 0.2, 0.1};
  int extrapolation_order = 2;
  // Inputs are cut off smoothly to |x| <= source_radius (<= 0 means 0.6 L).
  double source_radius = 0.0;
};

struct ResolventResult {
  VolumeField field;
  double residual = 0.0;               // relative extrapolation residual estimate
  std::vector<double> residual_history;
  double valid_radius = 0.0;           // output exact (up to discretization) inside
};

ResolventResult free_resolvent_plus(const VolumeField& u, const ResolventParams& p);

// Smooth cutoff used for resolvent inputs: 1 up to 5/6 of the radius, 0 beyond it.
double source_window(double r, double radius);

enum class FarFieldModel { PerDirection, Hankel };

struct FarFieldOptions {
  FarFieldModel model = FarFieldModel::PerDirection;
  int correction_terms = 2;  // extra r^{-2}, r^{-3}, ... columns per direction
  int lmax = 16;             // Hankel model degree
  int interp_order = 8;
};

struct FarField {
  SphereFn g_minus;  // coefficient of e^{-i lambda r}/r
  SphereFn g_plus;   // coefficient of e^{+i lambda r}/r
  double residual = 0.0;
  bool short_span = false;  // radii cover fewer than 4 wavelengths
};

// samples[r][i]: field at radii[r] * grid node i.
FarField farfield_fit_samples(const std::vector<std::vector<cplx>>& samples, const std::vector<double>& radii,
                              double lambda, GridPtr dirs, const FarFieldOptions& opt = {});
// Samples u on spheres of the given radii (Hankel model analyzes on an internal
// grid and synthesizes on `dirs`).
FarField farfield_fit(const VolumeField& u, double lambda, const std::vector<double>& radii, GridPtr dirs,
                      const FarFieldOptions& opt = {});

std::vector<double> linspace(double a, double b, int n);

struct ShiftedResolventOptions {
  int n = 128;
  double L = 16.0;
  double rise_start = 2.0, rise_end = 5.0;  // inner window
  double fall_start = 12.0, fall_end = 15.0;  // outer window
  double fit_tolerance = 0.05;
  GridPtr fit_grid;  // defaults to a 10 x 20 product grid
};

struct ShiftedResolventResult {
  cplx ratio_plus = 0.0;   // out/in coefficient of e^{+i lambda r}/r
  cplx ratio_minus = 0.0;  // out/in coefficient of e^{-i lambda r}/r
  double fit_residual = 0.0;
  bool inconclusive = false;
  // +1 if the measured ratios match +1/(2 lambda), -1 if -1/(2 lambda), 0 undecided
  int sign = 0;
};

ShiftedResolventResult shifted_resolvent_asymp(const ShExpansion& h_plus, const ShExpansion& h_minus, double lambda,
                                               const ShiftedResolventOptions& opt = {});
// Band-limited sphere samples; analyzed to half the grid's exactness degree.
ShiftedResolventResult shifted_resolvent_asymp(const SphereFn& h_plus, const SphereFn& h_minus, double lambda,
                                               const ShiftedResolventOptions& opt = {});

}  // namespace relscat
