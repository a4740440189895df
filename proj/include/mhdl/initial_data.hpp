#pragma once

#include <optional>
#include <vector>

#include "mhdl/dynamics.hpp"
#include "mhdl/incompressible.hpp"

namespace mhdl {

// Compressible data built from incompressible (v0, B0): u0 = v0 + grad_cons(phi) and the ladder
// p_k, B_k (k-th time derivatives at t = 0), all vanishing on the boundary.
struct CompatibleData {
  GridPtr grid;
  double kappa = 0.0, lambda = 0.0;
  int order = 2;
  VectorField v0, u0;
  ScalarField phi;
  std::vector<ScalarField> p;  // p[0..order]
  std::vector<VectorField> B;  // B[0..order]
  double neumann_flux = 0.0;   // constant normal derivative of phi on the boundary
  int iterations = 0;  // sweeps (fixed point) or Newton steps
  int sweeps = 0;      // evaluations of the sweep map
  std::vector<double> update_norms;
  std::vector<double> trace_p, trace_B;             // max boundary |p_k|, |B_k|
  std::vector<double> natural_p, natural_B;         // max boundary |D^j of the unconstrained p, B rates|, j = 0..order
  double heat_defect0 = 0.0;                        // interior max |B_1 - (lambda Lap B0 + B0.grad u0 - B0 div u0)|
  std::vector<double> ladder_mismatch_p;            // interior max |p_k - D_t^k p| of the actual semi-discrete flow

  SimState state() const;  // (x = y, u0, B0, p0)
};

enum class LadderSolver {
  FixedPoint,    // repeated sweeps, damping 1 then 0.5 once the update norm grows
  NewtonKrylov,  // Jacobian-free Newton-GMRES on the same sweep map (small lambda, where sweeps diverge)
};

struct ConstructOptions {
  int order = 2;
  double tol = 1e-10;
  int max_iter = 200;
  double damping = 1.0;
  LadderSolver solver = LadderSolver::FixedPoint;
};

CompatibleData construct_compatible(GridPtr grid, const VectorField& v0, const VectorField& B0, const EosParams& eos,
                                    const ConstructOptions& opt = {});

struct CompatibilityRow {
  int j = 0;
  double p = 0.0, B = 0.0;                   // from the traces of the ladder
  std::optional<double> p_run, B_run;        // from the unconstrained boundary rates of an actual run
};
std::vector<CompatibilityRow> compatibility_residual(const CompatibleData& data, const History* history = nullptr);

}  // namespace mhdl
