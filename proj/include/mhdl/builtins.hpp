#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mhdl/state.hpp"

namespace mhdl {

// Initial data on the reference ball: velocity, magnetic field (zero on the boundary)
// and a pressure guess that vanishes on the boundary.
struct BuiltinData {
  std::string name;
  VectorField v, B;
  ScalarField p;
};

const std::vector<std::string>& builtin_names();

struct BuiltinOptions {
  std::uint64_t seed = 1;
  double omega = 1.0;        // rotation rate
  double strain = 1.0;       // straining rate of the solenoidal benchmark
  double perturbation = 0.1;
  double field = 0.1;        // magnetic amplitude
  double mode_amplitude = 1e-3;
};

BuiltinData make_builtin(const std::string& name, const Grid& grid, const BuiltinOptions& opt = {});
SimState state_from(GridPtr grid, const BuiltinData& data);

// first zero of J0
double bessel_j0_first_zero();

}  // namespace mhdl
