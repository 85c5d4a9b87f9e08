#pragma once

#include <limits>
#include <string>
#include <vector>

#include "relscat/potential.hpp"
#include "relscat/scatter.hpp"
#include "relscat/sphere.hpp"

namespace relscat {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

struct BallOptions {
  double bin_factor = 0.5;  // binning radius in units of the coarsest lambda(theta - w) spacing
  int n_rho = 40;           // radial profile points on (0, 2 lambda]
  int dir_polar = 8;        // profile directions: product grid
  int dir_azimuth = 16;
};

// V^ samples on |xi| <= 2 lambda recovered from an amplitude table.
struct FourierBallData {
  double lambda = 1.0;
  std::vector<Vec3> xi;     // raw sample points, one per (theta, w) pair
  std::vector<cplx> value;  // V^(xi)
  double bin_radius = 0.0;
  GridPtr dirs;             // binned profiles V^(rho eta); NaN where a bin is empty
  std::vector<double> rho;
  Eigen::MatrixXcd profile;  // rows rho, cols dirs
  double tail_order = kMissing;  // kappa + 2 from the near-diagonal columns; NaN if the grid is too coarse
  double max_conjugate_defect = 0.0;
};

FourierBallData fourier_from_amplitude(const AmplitudeTable& table, const BallOptions& opt = {});

// Raw samples without a table (synthetic fixtures, tests).
FourierBallData fourier_from_samples(double lambda, std::vector<Vec3> xi, std::vector<cplx> value,
                                     const BallOptions& opt = {});

struct OrderOptions {
  double rho_lo = 0.02, rho_hi = 0.3;  // fit window in units of lambda
  int lfit = 4;                        // harmonic degree of the order fit (and of the analytic terms)
  int analytic_terms = 3;              // rho^l, rho^{l+2}, rho^{l+4}
  double p_lo = 0.0, p_hi = 1.0;       // singular exponent bracket (m - 3)
  std::vector<double> nuisance;        // extra fixed exponents (leftovers of stripped layers)
  bool next_order_nuisance = true;     // include rho^{p+1}
  double reference_scale = 0.0;        // rms used for the smoothness decision; 0: the data's own
  double smooth_tolerance = 1e-4;  // data rms below this fraction of the reference: smooth
  double gain_threshold = 100.0;   // analytic-only / full residual below this: smooth
  double consistency = 0.2;
};

struct OrderEstimate {
  bool smooth = false;
  double order = kMissing;
  double exponent = kMissing;
  double fit_residual = 0.0;     // relative rms of the full model
  double analytic_residual = 0.0;  // relative rms with the singular columns dropped
  double scale_fraction = 0.0;  // data rms / reference scale
  double singular_gain = 0.0;   // analytic-only residual / full-model residual
  double tail_order = kMissing;
  bool inconsistent = false;
  size_t n_samples = 0;
};

// Throws Domain when the exponent sits on the bracket edge (out of regime).
OrderEstimate estimate_order(const FourierBallData& data, const OrderOptions& opt = {});

struct AngularRecovery {
  ShExpansion angular;
  std::vector<int> unrecoverable;  // degrees with |gamma| < 1e-8
  double fit_residual = 0.0;
  int degree_used = 0;  // highest degree the sample directions resolve (<= requested)
};

AngularRecovery recover_angular(const FourierBallData& data, double m, int lmax, const OrderOptions& opt = {});

struct LayerEstimate {
  double order = 0.0;
  ShExpansion angular;
  double fit_residual = 0.0;
  double tail_order = kMissing;
  bool inconsistent = false;
  std::vector<int> unrecoverable;
  int degree_used = 0;
};

struct StripOptions {
  BallOptions ball;
  OrderOptions order;
  int lmax = 8;
  double r0 = 1.0, delta = 0.25;  // window given to synthesized layers
};

struct StripResult {
  std::vector<LayerEstimate> layers;
  bool smooth_remainder = false;
  std::string diagnostic;
};

StripResult layer_strip(const AmplitudeTable& table, int J, const StripOptions& opt = {});

PolyhomPotential synthesize(const std::vector<LayerEstimate>& layers, double r0 = 1.0, double delta = 0.25);

struct SmoothnessOptions {
  double kappa_threshold = 6.0;
  // Analysis degree defaults to a quarter of the grid's exactness: point singularities
  // alias heavily into degrees near the quadrature limit.
  int l_max = 0;
  int l_min = 0;  // 0: l_max / 4
};

struct SmoothnessVerdict {
  bool smooth = true;
  double order = kMissing;
  std::vector<TailSlope> columns;
};

SmoothnessVerdict smoothness_test(const AmplitudeTable& a, const AmplitudeTable& b, const SmoothnessOptions& opt = {});

}  // namespace relscat
