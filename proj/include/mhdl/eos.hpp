#pragma once

#include <cmath>
#include <functional>

#include "mhdl/types.hpp"

namespace mhdl {

// Linear liquid equation of state p = kappa (rho - 1).
struct EosParams {
  double kappa = 100.0;
  double lambda = 0.0;  // magnetic diffusivity
  double c0 = 1.0;      // bound constant for the derivative bounds of rho(p)

  template <class T>
  T rho(const T& p) const { return T(1.0) + p * (1.0 / kappa); }
  double drho() const { return 1.0 / kappa; }
  double d2rho() const { return 0.0; }
  double sound_speed() const { return std::sqrt(kappa); }
};

struct EosReport {
  double rho = 1.0, drho = 0.0, d2rho = 0.0, c = 0.0;
  bool upper_bounds_hold = true;  // |rho'| <= c0 and |rho''| <= c0
};

constexpr double kRhoFloor = 1e-6;

EosReport eos_eval(const EosParams& params, double p);

// Q(rho) = int_1^rho p(R)/R^2 dR in closed form for the linear law
double internal_energy_density(const EosParams& params, double rho);
// enthalpy h(rho) = int_1^rho p'(r)/r dr = kappa ln rho
double enthalpy(const EosParams& params, double rho);

// General pressure laws go through adaptive Gauss-Kronrod quadrature.
using PressureLaw = std::function<double(double)>;
double internal_energy_density(const PressureLaw& p, double rho);
double enthalpy(const PressureLaw& dp, double rho);

}  // namespace mhdl
