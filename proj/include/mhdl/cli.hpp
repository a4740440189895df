#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mhdl/config.hpp"

namespace mhdl {

// exit codes
constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);  // args[0] is the program name

// worker threads for concurrent runs: MHDL_THREADS if set, else the hardware concurrency
int worker_count();

// compressible runs from compatible data at increasing kappa against one incompressible reference run
struct LimitOptions {
  int dim = 2;
  int nx = 48;
  double lambda = 0.0;
  double t_final = 0.1;
  std::vector<double> kappas{1e2, 1e3, 1e4};
  std::string builtin = "solenoidal-random";
  std::uint64_t seed = 1;
  int order = 2;
  std::string out;  // per-kappa subdirectories when non-empty
};
struct LimitRow {
  double kappa = 0.0;
  double t = 0.0;
  double u_l2 = 0.0, u_max = 0.0;  // u_kappa(T) - v(T)
  double rho_max = 0.0;            // max |rho - 1|
  double rho_bound = 0.0;          // 2 max |p| / kappa
  double enthalpy_l2 = 0.0;        // h(rho) - q
  double data_l2 = 0.0;            // u0 - v0 at t = 0
  int steps = 0;
};
std::vector<LimitRow> limit_sweep(const LimitOptions& opt);

}  // namespace mhdl
