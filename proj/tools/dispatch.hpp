#pragma once

#include <cstdint>
#include <string>

#include "relscat/config.hpp"
#include "relscat/error.hpp"

namespace relscat::cli {

struct RunContext {
  std::string out_dir;
  uint64_t seed = 1;
};

// Runs one command and writes its artifacts into ctx.out_dir. Returns the
// process exit status; module errors are written to error.json.
int dispatch(const std::string& command, const ConfigDoc& cfg, const RunContext& ctx);

int exit_code(ErrorKind k);

}  // namespace relscat::cli
