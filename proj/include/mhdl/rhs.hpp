#pragma once

#include "mhdl/eos.hpp"
#include "mhdl/frame.hpp"
#include "mhdl/state.hpp"

namespace mhdl {

// Boundary values the unconstrained equations would produce for p and B
// (they are replaced by zero in the actual rates). Indexed by boundary slot.
template <class T>
struct NaturalRates {
  std::vector<T> p;
  std::vector<std::vector<T>> B;
};

// Semi-discrete Lagrangian MHD:
//   x' = u
//   rho u' = div_cons(B (x) B) - grad_cons(p + |B|^2/2)
//   p' = -(kappa + p) div u                         (interior; 0 on the boundary)
//   B' = lambda div_cons(grad B) + (B.grad) u - B div u   (interior; 0 on the boundary)
// On the boundary the density is frozen at 1 by p = 0, so the momentum gets -u div u / 2
// there to keep the kinetic energy balance; with these choices the discrete energy obeys
// dE/dt = -lambda sum W |grad B|^2 exactly in two dimensions.
template <class T>
void mhd_rates(const Grid& g, const EosParams& eos, const FieldSet<T>& s, FieldSet<T>& r,
               NaturalRates<T>* natural = nullptr) {
  const int d = g.dim();
  const std::size_t n = g.size();
  FrameT<T> F(g, s.x);

  const auto divu = F.div(s.u);
  std::vector<T> pm(n);
  for (std::size_t i = 0; i < n; ++i) {
    T b2(0.0);
    for (int k = 0; k < d; ++k) b2 = b2 + s.B[k][i] * s.B[k][i];
    pm[i] = s.p[i] + b2 * 0.5;
  }
  const auto gpm = F.grad_cons(pm);

  r.x = s.u;
  r.u.assign(d, std::vector<T>(n));
  r.B.assign(d, std::vector<T>(n));
  r.p.assign(n, T(0.0));

  std::vector<std::vector<T>> flux(d, std::vector<T>(n));
  for (int k = 0; k < d; ++k) {
    for (int l = 0; l < d; ++l)
      for (std::size_t i = 0; i < n; ++i) flux[l][i] = s.B[l][i] * s.B[k][i];
    const auto tension = F.div_cons(flux);
    for (std::size_t i = 0; i < n; ++i) {
      const T rho = eos.rho(s.p[i]);
      r.u[k][i] = (tension[i] - gpm[k][i]) / rho;
    }
  }
  for (int bn : g.boundary_nodes())
    for (int k = 0; k < d; ++k) r.u[k][bn] = r.u[k][bn] - s.u[k][bn] * divu[bn] * 0.5;

  for (std::size_t i = 0; i < n; ++i) r.p[i] = -(s.p[i] + eos.kappa) * divu[i];

  for (int k = 0; k < d; ++k) {
    const auto gu = F.grad(s.u[k]);
    std::vector<T> lap;
    if (eos.lambda != 0.0) lap = F.laplacian(s.B[k]);
    for (std::size_t i = 0; i < n; ++i) {
      T acc = -s.B[k][i] * divu[i];
      for (int l = 0; l < d; ++l) acc = acc + s.B[l][i] * gu[l][i];
      if (eos.lambda != 0.0) acc = acc + lap[i] * eos.lambda;
      r.B[k][i] = acc;
    }
  }

  const auto& bnd = g.boundary_nodes();
  if (natural) {
    natural->p.resize(bnd.size());
    natural->B.assign(d, std::vector<T>(bnd.size()));
    for (std::size_t sl = 0; sl < bnd.size(); ++sl) {
      natural->p[sl] = r.p[bnd[sl]];
      for (int k = 0; k < d; ++k) natural->B[k][sl] = r.B[k][bnd[sl]];
    }
  }
  for (int bn : bnd) {
    r.p[bn] = T(0.0);
    for (int k = 0; k < d; ++k) r.B[k][bn] = T(0.0);
  }
}

}  // namespace mhdl
