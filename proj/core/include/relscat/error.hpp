#pragma once

#include <stdexcept>
#include <string>

namespace relscat {

enum class ErrorKind {
  Structural,      // malformed input: shapes, ranges, missing fields
  Precision,       // a numerical tolerance could not be met
  Domain,          // argument outside the mathematical domain
  Divergence,      // an iteration or series blew up
  Conditioning,    // a linear system is too ill-conditioned to trust
  NonConvergence,  // an iteration stalled
  Degenerate,      // a pole or degenerate configuration was hit
  Validation,      // user configuration rejected
  Inconclusive,    // a measurement could not decide
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, double residual = 0.0)
      : std::runtime_error(what), kind_(kind), residual_(residual) {}
  ErrorKind kind() const { return kind_; }
  // Achieved residual or offending value, when one exists.
  double residual() const { return residual_; }

 private:
  ErrorKind kind_;
  double residual_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what, double residual = 0.0);

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace relscat
