#pragma once

#include <memory>

#include "mhdl/eos.hpp"
#include "mhdl/numerics.hpp"
#include "mhdl/state.hpp"

namespace mhdl {

// Incompressible reference system
//   x' = v,  v' = div_cons(B (x) B) - grad_cons(Pi),  B' = lambda Lap B + (B.grad) v - B div v,
// with the total pressure Pi = q + |B|^2/2 chosen so that div v stays zero, Pi = 0 on the boundary.
struct IncompressibleState {
  GridPtr grid;
  double t = 0.0;
  VectorField x, v, B;
  ScalarField q;  // hydrodynamic pressure at the last evaluation
};

struct PressureResult {
  ScalarField q;          // q0
  double rt_margin = 0;   // min over the boundary of -grad_N (q0 + |B0|^2/2)
  double max_divergence = 0;
};

// q0 from Lap(q0 + |B0|^2/2) = -(d_i v^k d_k v^i) + (d_i B^k d_k B^i), q0 + |B0|^2/2 = 0 on the boundary.
PressureResult incompressible_pressure(GridPtr grid, const VectorField& x, const VectorField& v0, const VectorField& B0,
                                       double div_tol = 1e-2);

class IncompressibleStepper {
 public:
  IncompressibleStepper(GridPtr grid, double lambda);

  // remove the discrete divergence (interior nodes) with a Dirichlet projection
  void project(IncompressibleState& s);
  IncompressibleState step(const IncompressibleState& s, double dt);
  double cfl_dt(const IncompressibleState& s) const;
  // max |div v| over interior nodes
  double divergence(const IncompressibleState& s) const;
  int solves() const { return solves_; }

 private:
  struct Rates {
    VectorField x, v, B;
    ScalarField q;
  };
  Rates rates(const VectorField& x, const VectorField& v, const VectorField& B);
  const PoissonSolver& solver_for(const Frame& F);

  GridPtr grid_;
  double lambda_;
  std::unique_ptr<PoissonSolver> last_;
  int solves_ = 0;
};

IncompressibleState incompressible_from(GridPtr grid, const VectorField& v, const VectorField& B);

}  // namespace mhdl
