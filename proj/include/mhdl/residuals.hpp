#pragma once

#include "mhdl/dynamics.hpp"
#include "mhdl/frame.hpp"

namespace mhdl {

// Residuals of equations derived from the system, evaluated on a run history with time
// derivatives by finite differences at fixed label. Fields are zero on boundary nodes, where
// the derived equations are not imposed.

struct DivBResidual {
  double norm = 0.0;      // ||div B(t)||_L2
  double residual = 0.0;  // ||D_t div B - lambda Lap div B + div B div u||_L2 over interior nodes
};
DivBResidual residual_divB(const History& h, double t);

// rho'(p) D_t^2 p - Lap p - B.Lap B - w with
//   w = (rho'^2/rho - rho'')(D_t p)^2 + |dB|^2 - d_i B^k d_k B^i - B.grad(div B)
//       + rho d_i u^k d_k u^i + rho'/rho grad p.(B.grad B - grad P)
// (the index placement of the quadratic field terms is the one for which the residual converges)
ScalarField residual_wave(const History& h, double t);

// D_t^2 B - lambda Lap D_t B - h2 - h2~ - lambda [D_t, Lap] B, where
//   h2  = (B.grad) D_t u + B rho'/rho D_t^2 p
//   h2~ = (D_t B.grad) u - B^i d_i u^k d_k u + D_t B rho'/rho D_t p - B (rho'/rho)^2 (D_t p)^2 (linear law)
VectorField residual_heat_k1(const History& h, double t);

// [D_t, Lap] f = -2 d_i u^k d_k d_i f - (Lap u^k) d_k f, all derivatives in the current frame
ScalarField laplacian_commutator(const Frame& F, const VectorField& u, const ScalarField& f);

// L2 norm over interior nodes with the frame weights
double interior_l2(const Frame& F, const ScalarField& f);

}  // namespace mhdl
