#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <omp.h>

#include "dispatch.hpp"
#include "relscat/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"relscat: scattering amplitudes and layer recovery for polyhomogeneous potentials"};
  app.require_subcommand(1, 1);
  std::string config, out;
  uint64_t seed = 1;
  int threads = 0;
  for (const char* name : {"forward", "invert", "xray", "smatrix", "verify"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON config document")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "artifact directory")->required();
    sub->add_option("--seed", seed, "seed for sampled directions and random test data");
    sub->add_option("--threads", threads, "OpenMP threads (overrides RELSCAT_THREADS)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (threads <= 0)
    if (const char* env = std::getenv("RELSCAT_THREADS")) threads = std::atoi(env);
  if (threads > 0) omp_set_num_threads(threads);

  relscat::ConfigDoc cfg;
  try {
    cfg = relscat::load_config(config);
  } catch (const relscat::Error& e) {
    std::cerr << "relscat: invalid config: " << e.what() << "\n";
    return relscat::cli::exit_code(e.kind());
  }
  return relscat::cli::dispatch(app.get_subcommands().front()->get_name(), cfg, {out, seed});
}
