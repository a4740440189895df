#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mhdl/dynamics.hpp"
#include "mhdl/geometry.hpp"

namespace mhdl {

constexpr double kMarginFloor = 1e-6;  // nu is capped at 1/kMarginFloor below this margin

double physical_energy(const SimState& s, const EosParams& eos);
// lambda * integral |grad B|^2 (zero when lambda = 0)
double magnetic_dissipation(const SimState& s, const EosParams& eos);

// |dE/dt + lambda int |dB|^2| at snapshot time t, dE/dt by a fourth-order time difference
double dissipation_residual(const History& h, double t);
// E(t1) - E(t0) + int_{t0}^{t1} lambda int |dB|^2, time integral by the trapezoid rule over snapshots
double integrated_dissipation_residual(const History& h);

enum class Quantity { Position, Velocity, Magnetic, Pressure, Density };

// snapshots needed for the k-th time derivative
int stencil_points(int k);
// Fornberg weights for derivative order k at point z from nodes t
std::vector<double> fd_weights(const std::vector<double>& t, double z, int k);

// k-th derivative in time at fixed label, from a window of snapshots around t (shifted at the ends)
VectorField material_derivative(const History& h, Quantity q, int k, double t);
// same window for any quantity evaluated per snapshot
VectorField material_derivative(const History& h, const std::function<VectorField(const SimState&)>& f, int k,
                                double t);

enum class DerivativeSource { TimeDifference, Taylor };

// D_t^k of (u, B, p) for k = 0..K at one snapshot
struct TimeJet {
  std::vector<VectorField> u, B;
  std::vector<ScalarField> p;
};
TimeJet time_jet(const History& h, std::size_t index, int K, DerivativeSource src);
TimeJet time_jet(const SimState& s, const EosParams& eos, int K);  // Taylor at one state

struct RtMargin {
  double eps0 = 0.0;     // min over the boundary of -grad_N P
  ScalarField nu;        // per boundary slot, 1/max(-grad_N P, floor)
  bool degenerate = false;
};
RtMargin rt_margin(const SimState& s, const GeometryCache& geo);
RtMargin rt_margin(const SimState& s);

struct Apriori {
  double K = 0.0, M = 0.0, eps0 = 0.0;
  double curvature = 0.0, iota0 = 0.0, rho_max = 0.0, field_sup = 0.0;
};
Apriori apriori_report(const SimState& s, const EosParams& eos);

struct EnergyReport {
  double t = 0.0;
  double E_phys = 0.0;
  int r = 0;
  std::map<std::pair<int, int>, double> Esk;  // (s, k) -> E_{s,k}, s + k <= r
  std::vector<double> K;                      // K_{r'} for r' = 0..r (K_0 = 0)
  std::vector<double> W;                      // W_{r'+1}
  std::vector<double> H2_integral, H2_instant, H2;  // H_{r'+1}^2 = integral + instant
  std::vector<double> E;                      // E_{r'}
  double rt_margin = 0.0;
  double nu_min = 0.0, nu_max = 0.0;
  bool nu_degenerate = false;
  Apriori apriori;

  // flattened (name, value) pairs in a fixed order, used for CSV rows
  std::vector<std::pair<std::string, double>> columns() const;
};

struct EnergyOptions {
  int r = 2;
  DerivativeSource source = DerivativeSource::TimeDifference;
  bool with_apriori = true;
};

EnergyReport higher_energy(const History& h, double t, const EnergyOptions& opt = {});

// Pieces of the higher energies, exposed for oracles and tests.
// Q(dd^s X, dd^s X) summed over the vector index, integrated with weight w (nullptr = 1)
double q_energy_density_integral(const Frame& frame, const GeometryCache& geo, const VectorField& X, int s,
                                 const ScalarField* weight);
// int |d^m curl X|^2 (full antisymmetric curl), weight optional
double curl_norm2(const Frame& frame, const VectorField& X, int m, const ScalarField* weight);

}  // namespace mhdl
