#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relscat/potential.hpp"

namespace relscat {

struct GridSpec {
  int N = 256;  // volume grid points per axis (power of two)
  double L = 24.0;
  int sphere_polar = 26, sphere_azimuth = 26;
  int L_max = 8;
};

struct XraySpec {
  double plane_distance = 2.0;
  int resolution = 256;
  int angles = 180;
  std::vector<double> radii{2.0, 4.0, 8.0};
  int pairs = 20;
};

struct RunSpec {
  int born_order = 1;
  double bin_factor = 0.5;
  std::vector<double> eps_schedule{0.4, 0.2, 0.1};
  double source_radius = 0.0;  // 0: chosen from the potential
  int strip_stages = 2;
  std::string table;  // forward artifact consumed by invert; empty: build a Born table
  bool measure_convention = true;
  XraySpec xray;
  ShExpansion smatrix_h;  // default: constant 1
  int verify_grid_n = 128;
  double verify_grid_L = 16.0;
};

struct ConfigDoc {
  double energy = 1.0;
  PolyhomPotential potential;
  GridSpec grid;
  RunSpec run;
  std::string canonical;  // defaults filled, keys sorted
  uint64_t hash = 0;      // FNV-1a of canonical
};

// Validates and fills defaults. Violations throw Validation errors whose message
// starts with the JSON pointer of the offending field.
ConfigDoc parse_config(const std::string& text);
ConfigDoc load_config(const std::string& path);

uint64_t fnv1a(const std::string& s);
std::string hex_hash(uint64_t h);

}  // namespace relscat
