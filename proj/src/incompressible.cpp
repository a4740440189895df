#include "mhdl/incompressible.hpp"

#include <algorithm>
#include <cmath>

#include "mhdl/dynamics.hpp"
#include "mhdl/geometry.hpp"

namespace mhdl {

namespace {

// sum_{i,k} d_i X^k d_k X^i
ScalarField grad_trace_square(const Frame& F, const VectorField& X) {
  const int d = F.dim();
  std::vector<VectorField> g;
  for (int k = 0; k < d; ++k) g.push_back(F.grad(X[k]));
  ScalarField out(F.size(), 0.0);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k)
      for (std::size_t n = 0; n < F.size(); ++n) out[n] += g[k][i][n] * g[i][k][n];
  return out;
}

double max_abs_interior(const Grid& g, const ScalarField& f) {
  double m = 0;
  for (int i : g.interior_nodes()) m = std::max(m, std::abs(f[i]));
  return m;
}

}  // namespace

PressureResult incompressible_pressure(GridPtr grid, const VectorField& x, const VectorField& v0, const VectorField& B0,
                                       double div_tol) {
  Frame F(*grid, x);
  PressureResult r;
  r.max_divergence = std::max(max_abs_interior(*grid, F.div(v0)), max_abs_interior(*grid, F.div(B0)));
  if (r.max_divergence > div_tol)
    throw Error(ErrorKind::Precondition,
                "incompressible_pressure: input not solenoidal, max divergence " + std::to_string(r.max_divergence));
  const std::size_t n = grid->size();
  const auto tv = grad_trace_square(F, v0), tb = grad_trace_square(F, B0);
  EllipticProblem pb;
  pb.rhs.resize(n);
  for (std::size_t i = 0; i < n; ++i) pb.rhs[i] = -tv[i] + tb[i];
  PoissonSolver S(F);
  const auto sol = S.solve(pb);
  r.q.resize(n);
  ScalarField P = sol.solution;
  for (std::size_t i = 0; i < n; ++i) {
    double b2 = 0;
    for (const auto& c : B0) b2 += c[i] * c[i];
    r.q[i] = P[i] - 0.5 * b2;
  }
  const auto geo = compute_geometry(grid, x);
  const auto gP = geo.calculus->gradient(geo.chart, P);
  r.rt_margin = 1e300;
  const auto& bnd = grid->boundary_nodes();
  for (int b : bnd) {
    double dn = 0;
    for (int k = 0; k < grid->dim(); ++k) dn += geo.normal[k][b] * gP[k][b];
    r.rt_margin = std::min(r.rt_margin, -dn);
  }
  return r;
}

IncompressibleState incompressible_from(GridPtr grid, const VectorField& v, const VectorField& B) {
  IncompressibleState s;
  s.grid = grid;
  s.x = grid->reference();
  s.v = v;
  s.B = B;
  s.q.assign(grid->size(), 0.0);
  return s;
}

IncompressibleStepper::IncompressibleStepper(GridPtr grid, double lambda) : grid_(std::move(grid)), lambda_(lambda) {}

const PoissonSolver& IncompressibleStepper::solver_for(const Frame& F) {
  // factorization from the previous configuration serves as preconditioner; refactored when it stalls
  if (last_)
    last_ = std::make_unique<PoissonSolver>(F, LaplacianForm::Projection, *last_);
  else
    last_ = std::make_unique<PoissonSolver>(F, LaplacianForm::Projection);
  return *last_;
}

double IncompressibleStepper::divergence(const IncompressibleState& s) const {
  Frame F(*grid_, s.x);
  return max_abs_interior(*grid_, F.div(s.v));
}

void IncompressibleStepper::project(IncompressibleState& s) {
  Frame F(*grid_, s.x);
  const auto& S = solver_for(F);
  EllipticProblem pb;
  pb.rhs = F.div(s.v);
  const auto psi = S.solve(pb);
  ++solves_;
  const auto g = F.grad_cons(psi.solution);
  for (int k = 0; k < grid_->dim(); ++k)
    for (std::size_t i = 0; i < grid_->size(); ++i) s.v[k][i] -= g[k][i];
}

IncompressibleStepper::Rates IncompressibleStepper::rates(const VectorField& x, const VectorField& v,
                                                          const VectorField& B) {
  const Grid& g = *grid_;
  const int d = g.dim();
  const std::size_t n = g.size();
  Frame F(g, x);
  const auto divv = F.div(v);
  VectorField force(d, ScalarField(n));
  VectorField flux(d, ScalarField(n));
  for (int k = 0; k < d; ++k) {
    for (int l = 0; l < d; ++l)
      for (std::size_t i = 0; i < n; ++i) flux[l][i] = B[l][i] * B[k][i];
    force[k] = F.div_cons(flux);
  }
  // keep div v at zero: Lproj Pi = div(force) - d_i v^k d_k v^i
  EllipticProblem pb;
  pb.rhs = F.div(force);
  const auto tv = grad_trace_square(F, v);
  for (std::size_t i = 0; i < n; ++i) pb.rhs[i] -= tv[i];
  const auto& S = solver_for(F);
  const auto Pi = S.solve(pb).solution;
  ++solves_;
  const auto gPi = F.grad_cons(Pi);

  Rates r;
  r.x = v;
  r.v.assign(d, ScalarField(n));
  for (int k = 0; k < d; ++k)
    for (std::size_t i = 0; i < n; ++i) r.v[k][i] = force[k][i] - gPi[k][i];
  for (int b : g.boundary_nodes())
    for (int k = 0; k < d; ++k) r.v[k][b] -= 0.5 * v[k][b] * divv[b];
  r.B.assign(d, ScalarField(n));
  for (int k = 0; k < d; ++k) {
    const auto gv = F.grad(v[k]);
    ScalarField lap;
    if (lambda_ != 0.0) lap = F.laplacian(B[k]);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = -B[k][i] * divv[i];
      for (int l = 0; l < d; ++l) acc += B[l][i] * gv[l][i];
      if (lambda_ != 0.0) acc += lambda_ * lap[i];
      r.B[k][i] = acc;
    }
  }
  for (int b : g.boundary_nodes())
    for (int k = 0; k < d; ++k) r.B[k][b] = 0.0;
  r.q.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double b2 = 0;
    for (int k = 0; k < d; ++k) b2 += B[k][i] * B[k][i];
    r.q[i] = Pi[i] - 0.5 * b2;
  }
  return r;
}

IncompressibleState IncompressibleStepper::step(const IncompressibleState& s, double dt) {
  if (dt == 0.0) return s;
  const int d = grid_->dim();
  const std::size_t n = grid_->size();
  auto combine = [&](const VectorField& a, double c, const VectorField& b) {
    VectorField o = a;
    for (int k = 0; k < d; ++k)
      for (std::size_t i = 0; i < n; ++i) o[k][i] += c * b[k][i];
    return o;
  };
  const Rates k1 = rates(s.x, s.v, s.B);
  const Rates k2 = rates(combine(s.x, dt / 2, k1.x), combine(s.v, dt / 2, k1.v), combine(s.B, dt / 2, k1.B));
  const Rates k3 = rates(combine(s.x, dt / 2, k2.x), combine(s.v, dt / 2, k2.v), combine(s.B, dt / 2, k2.B));
  const Rates k4 = rates(combine(s.x, dt, k3.x), combine(s.v, dt, k3.v), combine(s.B, dt, k3.B));
  IncompressibleState o;
  o.grid = grid_;
  o.t = s.t + dt;
  auto rk = [&](const VectorField& y, const VectorField& a, const VectorField& b, const VectorField& c,
                const VectorField& e) {
    VectorField r = y;
    for (int k = 0; k < d; ++k)
      for (std::size_t i = 0; i < n; ++i) r[k][i] += dt / 6 * (a[k][i] + 2 * b[k][i] + 2 * c[k][i] + e[k][i]);
    return r;
  };
  o.x = rk(s.x, k1.x, k2.x, k3.x, k4.x);
  o.v = rk(s.v, k1.v, k2.v, k3.v, k4.v);
  o.B = rk(s.B, k1.B, k2.B, k3.B, k4.B);
  o.q = k4.q;
  project(o);
  for (int k = 0; k < d; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (!std::isfinite(o.v[k][i]) || !std::isfinite(o.B[k][i]))
        throw Error(ErrorKind::Instability, "incompressible step: non-finite values at t=" + std::to_string(o.t));
  return o;
}

double IncompressibleStepper::cfl_dt(const IncompressibleState& s) const {
  const double h = min_spacing(*grid_, s.x);
  double vm = 0, bm = 0;
  for (std::size_t i = 0; i < grid_->size(); ++i) {
    double v2 = 0, b2 = 0;
    for (int k = 0; k < grid_->dim(); ++k) {
      v2 += s.v[k][i] * s.v[k][i];
      b2 += s.B[k][i] * s.B[k][i];
    }
    vm = std::max(vm, v2);
    bm = std::max(bm, b2);
  }
  double dt = kCflWave * h / (std::sqrt(vm) + std::sqrt(bm) + 1e-12);
  if (lambda_ > 0) dt = std::min(dt, kCflDiffusion * h * h / lambda_);
  return dt;
}

}  // namespace mhdl
