#pragma once

#include <string>
#include <vector>

#include "relscat/freefield.hpp"
#include "relscat/potential.hpp"

namespace relscat {

// f(theta, w) = constant * lambda * V^(arg_sign * lambda (theta - w)) at Born level.
struct AmplitudeConvention {
  cplx constant{-1.0 / (2.0 * kPi), 0.0};
  std::string label = "minus_one_over_two_pi";
  int arg_sign = 1;       // argument lambda(theta - w) or lambda(w - theta)
  int exponent_sign = -1; // volume-integral phase e^{exponent_sign i lambda theta.y}
  cplx fitted{0.0, 0.0};  // raw least-squares constant before snapping
  double fit_rel_error = 0.0;
  bool measured = false;
};

struct BornOptions {
  VolumeGrid grid{128, 16.0};
  int order = 3;
  double source_radius = 0.0;  // <= 0: potential's core radius, capped at L/2
  double contraction_gate = 0.5;
  ResolventMethod method = ResolventMethod::TruncatedKernel;
};

struct BornReport {
  std::vector<double> term_norms;  // ||(R0+ V)^{j-1} R0+(V Phi0)|| on |x| <= source radius, j = 1..N+1
  double contraction_ratio = 0.0;
  int order = 0;
};

struct BornResult {
  VolumeField w;  // scattered correction; Phi_V = incident - w
  BornReport report;
  double source_radius = 0.0;
  double valid_radius = 0.0;
};

double born_source_radius(const PolyhomPotential& v, const BornOptions& opt);
BornResult born_field(const PolyhomPotential& v, double lambda, const Vec3& w_dir, const BornOptions& opt);
BornResult born_field_incident(const PolyhomPotential& v, double lambda, const VolumeField& incident,
                               const BornOptions& opt);

struct IntegralOptions {
  int exponent_sign = -1;
  double radius = 0.0;           // integration radius; <= 0: whole box
  double tail_tolerance = 1e-3;  // relative to the largest amplitude
};

// -(lambda / 2 pi) int e^{s i lambda theta.y} V(y) Phi(y) dy for each theta node.
SphereFn amplitude_integral(const PolyhomPotential& v, const VolumeField& phi, double lambda, GridPtr out,
                            const IntegralOptions& opt = {}, double* tail_bound = nullptr);

struct FarFieldAmplitudeOptions {
  BornOptions born;
  double fit_tolerance = 0.05;
  int lmax = 0;  // Hankel degree; <= 0 picks from lambda * source radius
};

struct FarFieldAmplitude {
  SphereFn f;
  double residual = 0.0;
  BornReport report;
};

FarFieldAmplitude amplitude_farfield(const PolyhomPotential& v, double lambda, const Vec3& w_dir, GridPtr out,
                                     const FarFieldAmplitudeOptions& opt);

struct ConventionOptions {
  double lambda = 3.0;
  VolumeGrid grid{128, 16.0};
  double width = 0.7;
  Vec3 center{0.3, -0.2, 0.4};
  double snap_tolerance = 0.1;
};

// Route-equivalence measurement of the Born prefactor, argument sign and
// volume-integral phase.
AmplitudeConvention measure_convention(const ConventionOptions& opt = {});
const std::vector<std::pair<std::string, cplx>>& convention_candidates();

struct AmplitudeTable {
  double lambda = 1.0;
  GridPtr out, inc;
  Eigen::MatrixXcd values;  // rows: outgoing nodes, cols: incident nodes
  std::string provenance = "born-1";
  std::vector<std::string> column_errors;  // empty string: column fine
  cplx constant{-1.0 / (2.0 * kPi), 0.0};
  int arg_sign = 1;  // f = constant * lambda * V^(arg_sign * lambda (theta - w))

  SphereFn column(size_t j) const;
};

enum class TableRoute { Auto, ClosedForm, FarField };

struct TableOptions {
  TableRoute route = TableRoute::Auto;
  FarFieldAmplitudeOptions farfield;
};

AmplitudeTable amplitude_table(const PolyhomPotential& v, double lambda, GridPtr inc, GridPtr out, int order,
                               const AmplitudeConvention& conv, const TableOptions& opt = {});
AmplitudeTable operator-(const AmplitudeTable& a, const AmplitudeTable& b);

// h'(theta) = -h(-theta) + int f(theta, w) h(-w) dw
SphereFn apply_smatrix(const AmplitudeTable& table, const SphereFn& h);

struct PairingOptions {
  VolumeGrid grid{128, 16.0};
  double window_start = 11.0, window_end = 14.5;  // outer cutoff of the fields
  double cesaro_start = 7.0;                      // ball radii averaged over one wavelength from here
  double fit_start = 5.5, fit_end = 10.5;         // far-field shell
  int fit_lmax = 10;
  int born_order = 2;
  double shifted_ratio = 0.0;  // measured (|D|+lambda)^{-1} far-field ratio; 0 means +1/(2 lambda)
  double consistency_tolerance = 0.05;
  bool outgoing_pair = false;  // u = windowed e^{i lambda r}/r h instead of Herglotz solutions
};

struct PairingResult {
  double residual = 0.0;
  cplx lhs = 0.0, rhs = 0.0;
  double scale = 0.0;         // natural magnitude of the pairing
  double radial_spread = 0.0; // disagreement of two Cesaro windows relative to scale
  bool inconclusive = false;
};

PairingResult boundary_pairing_residual(const ShExpansion& h_plus, const ShExpansion& h_minus,
                                        const PolyhomPotential& v, double lambda, const PairingOptions& opt = {});

}  // namespace relscat
