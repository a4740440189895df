#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "mhdl/builtins.hpp"
#include "mhdl/dynamics.hpp"
#include "mhdl/incompressible.hpp"
#include "mhdl/numerics.hpp"
#include "mhdl/residuals.hpp"

using namespace mhdl;
using testing::max_abs;
using testing::max_abs_diff;
using testing::sample;

TEST_CASE("linear equation of state") {
  EosParams eos;
  eos.kappa = 100;
  auto r = eos_eval(eos, 0.0);
  CHECK(r.rho == 1.0);
  CHECK(r.drho == doctest::Approx(0.01));
  CHECK(r.c == doctest::Approx(10.0));
  CHECK(eos_eval(eos, 5.0).rho == doctest::Approx(1.05));
  eos.kappa = 1;
  r = eos_eval(eos, 0.3);
  CHECK(r.d2rho == 0.0);
  CHECK(r.upper_bounds_hold);
  CHECK_THROWS_AS(eos_eval(eos, -2.0), Error);
}

TEST_CASE("internal energy and enthalpy against quadrature") {
  EosParams eos;
  eos.kappa = 3.0;
  const PressureLaw p = [&](double rho) { return eos.kappa * (rho - 1.0); };
  const PressureLaw dp = [&](double) { return eos.kappa; };
  for (double rho : {0.5, 1.0, 1.7, 2.0}) {
    CHECK(internal_energy_density(eos, rho) == doctest::Approx(internal_energy_density(p, rho)).epsilon(1e-12));
    CHECK(enthalpy(eos, rho) == doctest::Approx(enthalpy(dp, rho)).epsilon(1e-12));
  }
  EosParams unit;
  unit.kappa = 1;
  CHECK(enthalpy(unit, 1.0) == 0.0);
  CHECK(enthalpy(unit, std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("rest state is a fixed point") {
  auto g = make_grid(2, 28);
  const auto s = rest_state(g);
  EosParams eos;
  const auto r = mhd_rhs(s, eos);
  for (int i = 0; i < 2; ++i) {
    CHECK(max_abs(r.x[i]) == 0.0);
    CHECK(max_abs(r.u[i]) == 0.0);
    CHECK(max_abs(r.B[i]) == 0.0);
  }
  CHECK(max_abs(r.p) == 0.0);
  const auto s1 = step(s, eos, cfl_dt(s, eos));
  CHECK(s1.u == s.u);
  CHECK(s1.x == s.x);
  CHECK(s1.p == s.p);
}

TEST_CASE("zero time step leaves the state unchanged") {
  auto g = make_grid(2, 28);
  const auto s = state_from(g, make_builtin("solenoidal-random", *g));
  const auto s1 = step(s, EosParams{}, 0.0);
  CHECK(s1.x == s.x);
  CHECK(s1.u == s.u);
  CHECK(s1.B == s.B);
  CHECK(s1.p == s.p);
}

TEST_CASE("radial pressure accelerates down its gradient") {
  const double c = 2.0;
  EosParams eos;
  eos.kappa = 50;
  auto err = [&](int nx) {
    auto g = make_grid(2, nx);
    SimState s = rest_state(g);
    s.p = sample(*g, [&](const double* y) { return c * (1.0 - y[0] * y[0] - y[1] * y[1]); });
    const auto r = mhd_rhs(s, eos);
    CHECK(max_abs(r.p) == 0.0);  // u = 0
    double e = 0;
    for (int k : g->interior_nodes())
      for (int i = 0; i < 2; ++i) e = std::max(e, std::abs(r.u[i][k] - 2.0 * c * g->reference()[i][k] / eos.rho(s.p[k])));
    return e;
  };
  const double a = err(32), b = err(64);
  CHECK(a < 2e-2);
  CHECK(a / b > 3.5);
}

TEST_CASE("boundary values of p and B stay zero") {
  auto g = make_grid(2, 28);
  auto s = state_from(g, make_builtin("solenoidal-random", *g));
  EosParams eos;
  for (int i = 0; i < 3; ++i) s = step(s, eos, cfl_dt(s, eos));
  for (int b : g->boundary_nodes()) {
    CHECK(s.p[b] == 0.0);
    CHECK(s.B[0][b] == 0.0);
    CHECK(s.B[1][b] == 0.0);
  }
}

TEST_CASE("first zero of J0") {
  CHECK(bessel_j0_first_zero() == doctest::Approx(2.404825557695773).epsilon(1e-12));
}

TEST_CASE("magnetic Bessel mode decays at the Dirichlet rate") {
  auto g = make_grid(2, 32);
  const auto data = make_builtin("bessel-mode", *g);
  const auto s0 = state_from(g, data);
  EosParams eos;
  eos.lambda = 0.1;
  RunOptions opt;
  opt.t_final = 0.1;
  opt.snapshot_every = 1000000;
  const auto h = run(s0, eos, opt);
  Frame F(*g, g->reference());
  ScalarField a(g->size()), b(g->size());
  for (std::size_t k = 0; k < g->size(); ++k) {
    a[k] = h.final_state.B[0][k] * s0.B[0][k];
    b[k] = s0.B[0][k] * s0.B[0][k];
  }
  const double j = bessel_j0_first_zero();
  const double expected = std::exp(-eos.lambda * j * j * h.final_state.t);
  CHECK(h.final_state.t == doctest::Approx(0.1));
  CHECK(integrate(F, a) / integrate(F, b) == doctest::Approx(expected).epsilon(2e-4));
}

TEST_CASE("Runge-Kutta time convergence is fourth order") {
  auto g = make_grid(2, 28);
  const auto s0 = state_from(g, make_builtin("solenoidal-random", *g));
  EosParams eos;
  eos.kappa = 50;
  const double T = 0.02;
  auto final_u = [&](double dt) {
    RunOptions o;
    o.t_final = T;
    o.dt = dt;
    o.snapshot_every = 1000000;
    return run(s0, eos, o).final_state.u[0];
  };
  const double dt = 0.8 * cfl_dt(s0, eos);
  const auto u1 = final_u(dt), u2 = final_u(dt / 2), u3 = final_u(dt / 4);
  const double order = std::log2(max_abs_diff(u1, u2) / max_abs_diff(u2, u3));
  CHECK(order > 3.5);
}

TEST_CASE("fluid at rest stays at rest") {
  auto g = make_grid(2, 28);
  RunOptions o;
  o.t_final = 0.01;
  const auto h = run(rest_state(g), EosParams{}, o);
  CHECK(h.snapshots.size() >= 2);
  for (const auto& s : h.snapshots) CHECK(max_abs(s.u[0]) == 0.0);
  CHECK(h.final_state.t == doctest::Approx(0.01));
}

TEST_CASE("snapshot lookup") {
  auto g = make_grid(2, 28);
  RunOptions o;
  o.t_final = 0.01;
  o.dt = 0.001;
  o.snapshot_every = 2;
  const auto h = run(rest_state(g), EosParams{}, o);
  CHECK(h.snapshots.size() == 6);
  CHECK(h.index_of(0.004) == 2);
  CHECK_THROWS_AS(h.index_of(0.003), Error);
  CHECK_THROWS_AS(h.index_of(0.5), Error);
}

TEST_CASE("incompressible pressure of rigid rotation") {
  auto g = make_grid(2, 32);
  const auto data = make_builtin("rotation", *g);
  const auto pr = incompressible_pressure(g, g->reference(), data.v, data.B);
  const auto exact = sample(*g, [](const double* y) { return 0.5 * (y[0] * y[0] + y[1] * y[1] - 1.0); });
  CHECK(max_abs_diff(pr.q, exact) < 1e-3);
  CHECK(pr.rt_margin == doctest::Approx(-1.0).epsilon(1e-2));

  const auto zero = incompressible_pressure(g, g->reference(), zero_vector(2, g->size()), zero_vector(2, g->size()));
  CHECK(max_abs(zero.q) < 1e-14);

  VectorField bad = zero_vector(2, g->size());
  bad[0] = g->reference()[0];
  CHECK_THROWS_AS(incompressible_pressure(g, g->reference(), bad, zero_vector(2, g->size())), Error);
}

TEST_CASE("incompressible rotation keeps its velocity") {
  auto g = make_grid(2, 28);
  const auto data = make_builtin("rotation", *g);
  IncompressibleStepper st(g, 0.0);
  auto s = incompressible_from(g, data.v, data.B);
  st.project(s);
  const double dt = st.cfl_dt(s);
  const double div0 = std::max(st.divergence(s), 1e-12);
  double speed0 = 0;
  for (std::size_t k = 0; k < g->size(); ++k) speed0 = std::max(speed0, std::hypot(s.v[0][k], s.v[1][k]));
  for (int i = 0; i < 20; ++i) s = st.step(s, dt);
  double speed = 0;
  for (std::size_t k = 0; k < g->size(); ++k) speed = std::max(speed, std::hypot(s.v[0][k], s.v[1][k]));
  CHECK(speed == doctest::Approx(speed0).epsilon(1e-3));
  CHECK(st.divergence(s) <= 10 * std::max(div0, 1e-10));
}

TEST_CASE("residual monitors vanish at rest") {
  auto g = make_grid(2, 28);
  RunOptions o;
  o.t_final = 0.01;
  o.dt = 0.001;
  const auto h = run(rest_state(g), EosParams{}, o);
  const auto db = residual_divB(h, 0.005);
  CHECK(db.norm == 0.0);
  CHECK(db.residual == 0.0);
  CHECK(max_abs(residual_wave(h, 0.005)) == 0.0);
  for (const auto& c : residual_heat_k1(h, 0.005)) CHECK(max_abs(c) == 0.0);
}
