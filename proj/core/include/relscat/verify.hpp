#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relscat/scatter.hpp"

namespace relscat {

enum class CheckStatus { Pass, Fail, Inconclusive };
const char* to_string(CheckStatus s);

struct CheckResult {
  std::string name;
  std::string statement;  // what is being checked
  CheckStatus status = CheckStatus::Fail;
  double value = 0.0;     // achieved error or measured quantity
  double tolerance = 0.0;
  std::string detail;
};

struct VerifyOptions {
  VolumeGrid grid{128, 16.0};  // volume grid for the scattering checks
  uint64_t seed = 1;
  AmplitudeConvention convention;
  bool quick = false;  // skip the volume-grid scattering checks
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  AmplitudeConvention convention;
  cplx shifted_ratio = 0.0;  // measured (|D|+lambda)^{-1} outgoing far-field ratio
  int shifted_sign = 0;
  // 0 all pass, 3 some check failed, 4 none failed but some inconclusive
  int exit_code() const;
  std::string summary() const;
};

VerifyReport run_verify(const VerifyOptions& opt);

// Far-field fit of the Herglotz wave of h*(theta) = h(-theta) on lambda r in [40, 80];
// returns max relative L2 error of g_- = (2 pi i/lambda) h and g_+ = (-2 pi i/lambda) h(-theta).
double free_matrix_farfield_error(double lambda, const ShExpansion& h);

}  // namespace relscat
