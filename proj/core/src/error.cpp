#include "relscat/error.hpp"

namespace relscat {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Structural: return "structural";
    case ErrorKind::Precision: return "precision";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::Conditioning: return "conditioning";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

void fail(ErrorKind kind, const std::string& what, double residual) {
  throw Error(kind, what, residual);
}

}  // namespace relscat
