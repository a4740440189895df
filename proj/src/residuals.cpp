#include "mhdl/residuals.hpp"

#include <cmath>

#include "mhdl/energies.hpp"

namespace mhdl {

namespace {

std::vector<VectorField> gradients(const Frame& F, const VectorField& X) {
  std::vector<VectorField> g;
  for (const auto& c : X) g.push_back(F.grad(c));  // g[k][i] = d_i X^k
  return g;
}

}  // namespace

double interior_l2(const Frame& F, const ScalarField& f) {
  double s = 0;
  for (int m : F.grid().interior_nodes()) s += F.weights()[m] * f[m] * f[m];
  return std::sqrt(s);
}

ScalarField laplacian_commutator(const Frame& F, const VectorField& u, const ScalarField& f) {
  const int d = F.dim();
  const std::size_t n = F.size();
  const auto gu = gradients(F, u);
  const auto gf = F.grad(f);
  std::vector<VectorField> hf;
  for (int i = 0; i < d; ++i) hf.push_back(F.grad(gf[i]));  // hf[i][k] = d_k d_i f
  ScalarField out(n, 0.0);
  for (int k = 0; k < d; ++k) {
    const auto lu = F.laplacian(u[k]);
    for (std::size_t m = 0; m < n; ++m) {
      double acc = -lu[m] * gf[k][m];
      for (int i = 0; i < d; ++i) acc -= 2.0 * gu[k][i][m] * hf[i][k][m];
      out[m] += acc;
    }
  }
  return out;
}

DivBResidual residual_divB(const History& h, double t) {
  const SimState& s = h.snapshots[h.index_of(t)];
  const Frame F(*s.grid, s.x);
  const ScalarField divB = F.div(s.B);
  DivBResidual r;
  r.norm = std::sqrt(F.integrate([&] {
    ScalarField q(divB.size());
    for (std::size_t m = 0; m < q.size(); ++m) q[m] = divB[m] * divB[m];
    return q;
  }()));
  const auto dt_div = material_derivative(
      h, [](const SimState& z) { return VectorField{Frame(*z.grid, z.x).div(z.B)}; }, 1, t)[0];
  const ScalarField lap = F.laplacian(divB);
  const ScalarField divu = F.div(s.u);
  ScalarField res(divB.size(), 0.0);
  for (int m : s.grid->interior_nodes()) res[m] = dt_div[m] - h.eos.lambda * lap[m] + divB[m] * divu[m];
  r.residual = interior_l2(F, res);
  return r;
}

ScalarField residual_wave(const History& h, double t) {
  const SimState& s = h.snapshots[h.index_of(t)];
  const int d = s.dim();
  const std::size_t n = s.size();
  const EosParams& eos = h.eos;
  const Frame F(*s.grid, s.x);
  const ScalarField pt = material_derivative(h, Quantity::Pressure, 1, t)[0];
  const ScalarField ptt = material_derivative(h, Quantity::Pressure, 2, t)[0];

  const ScalarField lap_p = F.laplacian(s.p);
  const auto gp = F.grad(s.p);
  const auto gB = gradients(F, s.B);
  const auto gu = gradients(F, s.u);
  VectorField lapB;
  for (int k = 0; k < d; ++k) lapB.push_back(F.laplacian(s.B[k]));
  ScalarField P(n);
  for (std::size_t m = 0; m < n; ++m) {
    double b2 = 0;
    for (int k = 0; k < d; ++k) b2 += s.B[k][m] * s.B[k][m];
    P[m] = s.p[m] + 0.5 * b2;
  }
  const auto gP = F.grad(P);
  const auto gdivB = F.grad(F.div(s.B));

  ScalarField res(n, 0.0);
  const double r1 = eos.drho(), r2 = eos.d2rho();
  for (int m : s.grid->interior_nodes()) {
    const double rho = eos.rho(s.p[m]);
    double w = (r1 * r1 / rho - r2) * pt[m] * pt[m];
    double BlapB = 0, dB2 = 0, cross = 0, uu = 0, Bgdiv = 0, force = 0;
    for (int k = 0; k < d; ++k) {
      BlapB += s.B[k][m] * lapB[k][m];
      Bgdiv += s.B[k][m] * gdivB[k][m];
      double tension = 0;  // (B.grad B)^k
      for (int i = 0; i < d; ++i) {
        dB2 += gB[k][i][m] * gB[k][i][m];
        cross += gB[k][i][m] * gB[i][k][m];  // d_i B^k d_k B^i
        uu += gu[k][i][m] * gu[i][k][m];
        tension += s.B[i][m] * gB[k][i][m];
      }
      force += gp[k][m] * (tension - gP[k][m]);
    }
    w += dB2 - cross - Bgdiv + rho * uu + r1 / rho * force;
    res[m] = r1 * ptt[m] - lap_p[m] - BlapB - w;
  }
  return res;
}

VectorField residual_heat_k1(const History& h, double t) {
  const SimState& s = h.snapshots[h.index_of(t)];
  const int d = s.dim();
  const std::size_t n = s.size();
  const EosParams& eos = h.eos;
  const Frame F(*s.grid, s.x);
  const ScalarField pt = material_derivative(h, Quantity::Pressure, 1, t)[0];
  const ScalarField ptt = material_derivative(h, Quantity::Pressure, 2, t)[0];
  const VectorField ut = material_derivative(h, Quantity::Velocity, 1, t);
  const VectorField Bt = material_derivative(h, Quantity::Magnetic, 1, t);
  const VectorField Btt = material_derivative(h, Quantity::Magnetic, 2, t);
  const auto gu = gradients(F, s.u);
  const auto gut = gradients(F, ut);

  VectorField res(d, ScalarField(n, 0.0));
  for (int k = 0; k < d; ++k) {
    const ScalarField lapBt = eos.lambda != 0.0 ? F.laplacian(Bt[k]) : ScalarField(n, 0.0);
    const ScalarField comm = eos.lambda != 0.0 ? laplacian_commutator(F, s.u, s.B[k]) : ScalarField(n, 0.0);
    for (int m : s.grid->interior_nodes()) {
      const double a = eos.drho() / eos.rho(s.p[m]);
      double h2 = s.B[k][m] * a * ptt[m];
      double h2t = Bt[k][m] * a * pt[m] - s.B[k][m] * a * a * pt[m] * pt[m];
      for (int i = 0; i < d; ++i) {
        h2 += s.B[i][m] * gut[k][i][m];
        h2t += Bt[i][m] * gu[k][i][m];
        for (int l = 0; l < d; ++l) h2t -= s.B[i][m] * gu[l][i][m] * gu[k][l][m];
      }
      res[k][m] = Btt[k][m] - eos.lambda * lapBt[m] - h2 - h2t - eos.lambda * comm[m];
    }
  }
  return res;
}

}  // namespace mhdl
