#include "mhdl/eos.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <string>

namespace mhdl {

EosReport eos_eval(const EosParams& params, double p) {
  if (!(params.kappa > 0)) throw Error(ErrorKind::Config, "eos: kappa must be positive");
  EosReport r;
  r.rho = params.rho(p);
  if (!(r.rho > 0)) throw Error(ErrorKind::Vacuum, "eos: non-positive density " + std::to_string(r.rho) + " at p=" + std::to_string(p));
  r.drho = params.drho();
  r.d2rho = params.d2rho();
  r.c = params.sound_speed();
  r.upper_bounds_hold = std::abs(r.drho) <= params.c0 && std::abs(r.d2rho) <= params.c0;
  return r;
}

double internal_energy_density(const EosParams& params, double rho) {
  if (!(rho > 0)) throw Error(ErrorKind::Vacuum, "eos: non-positive density");
  return params.kappa * (std::log(rho) + 1.0 / rho - 1.0);
}

double enthalpy(const EosParams& params, double rho) {
  if (!(rho > 0)) throw Error(ErrorKind::Vacuum, "eos: non-positive density");
  return params.kappa * std::log(rho);
}

namespace {
template <class F>
double integrate_from_one(F f, double b) {
  using boost::math::quadrature::gauss_kronrod;
  if (b == 1.0) return 0.0;
  double err = 0;
  return gauss_kronrod<double, 31>::integrate(f, 1.0, b, 20, 1e-14, &err);
}
}  // namespace

double internal_energy_density(const PressureLaw& p, double rho) {
  if (!(rho > 0)) throw Error(ErrorKind::Vacuum, "eos: non-positive density");
  return integrate_from_one([&](double r) { return p(r) / (r * r); }, rho);
}

double enthalpy(const PressureLaw& dp, double rho) {
  if (!(rho > 0)) throw Error(ErrorKind::Vacuum, "eos: non-positive density");
  return integrate_from_one([&](double r) { return dp(r) / r; }, rho);
}

}  // namespace mhdl
