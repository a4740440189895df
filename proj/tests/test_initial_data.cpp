#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "mhdl/builtins.hpp"
#include "mhdl/initial_data.hpp"
#include "mhdl/numerics.hpp"

using namespace mhdl;
using testing::max_abs;

namespace {

double l2_diff(const Frame& F, const VectorField& a, const VectorField& b) {
  ScalarField d(F.size(), 0.0);
  for (std::size_t c = 0; c < a.size(); ++c)
    for (std::size_t i = 0; i < F.size(); ++i) d[i] += (a[c][i] - b[c][i]) * (a[c][i] - b[c][i]);
  return std::sqrt(F.integrate(d));
}

}  // namespace

TEST_CASE("zero data is already compatible") {
  auto g = make_grid(2, 28);
  const auto z = zero_vector(2, g->size());
  EosParams eos;
  const auto D = construct_compatible(g, z, z, eos);
  CHECK(D.iterations == 1);
  for (const auto& c : D.u0) CHECK(max_abs(c) == 0.0);
  for (int k = 0; k <= D.order; ++k) {
    CHECK(max_abs(D.p[k]) == 0.0);
    for (const auto& c : D.B[k]) CHECK(max_abs(c) == 0.0);
  }
}

TEST_CASE("compatible data from a smooth solenoidal pair") {
  auto g = make_grid(2, 32);
  const auto bd = make_builtin("solenoidal-random", *g);
  Frame F(*g, g->reference());
  double diff[2];
  int idx = 0;
  for (double kappa : {1e2, 1e3}) {
    EosParams eos;
    eos.kappa = kappa;
    const auto D = construct_compatible(g, bd.v, bd.B, eos);
    CHECK(D.iterations < 200);
    CHECK(D.update_norms.back() < 1e-10);
    for (int k = 0; k <= D.order; ++k) {
      CHECK(D.trace_p[k] <= 1e-8);
      CHECK(D.trace_B[k] <= 1e-8);
    }
    const auto rows = compatibility_residual(D);
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) {
      CHECK(r.p <= 1e-8);
      CHECK(r.B <= 1e-8);
      CHECK_FALSE(r.p_run.has_value());
    }
    for (const auto& c : D.state().u) CHECK(c.size() == g->size());
    for (double rho : D.p[0]) CHECK(eos.rho(rho) > kRhoFloor);
    diff[idx++] = l2_diff(F, D.u0, bd.v);
  }
  const double ratio = diff[0] / diff[1];
  CHECK(ratio > 8.0);
  CHECK(ratio < 12.5);
}

TEST_CASE("velocity correction is a gradient to scheme order") {
  auto curl_of_correction = [](int nx) {
    auto g = make_grid(2, nx);
    const auto bd = make_builtin("solenoidal-random", *g);
    EosParams eos;
    eos.kappa = 1e3;
    const auto D = construct_compatible(g, bd.v, bd.B, eos);
    Frame F(*g, g->reference());
    VectorField w = D.u0;
    for (int c = 0; c < 2; ++c)
      for (std::size_t i = 0; i < g->size(); ++i) w[c][i] -= bd.v[c][i];
    return max_abs(vector_calculus(F, w).curl[0]);
  };
  const double a = curl_of_correction(32), b = curl_of_correction(64);
  CHECK(a < 1e-3);
  CHECK(a / b > 8.0);
}

TEST_CASE("trace table of hand-made data") {
  auto g = make_grid(2, 28);
  CompatibleData D;
  D.grid = g;
  D.order = 1;
  D.p.assign(2, ScalarField(g->size(), 0.0));
  D.B.assign(2, zero_vector(2, g->size()));
  for (int b : g->boundary_nodes()) D.p[0][b] = 0.3;
  D.p[0][g->boundary_nodes().front()] = -0.3;
  D.B[1][1][g->boundary_nodes().back()] = 0.25;
  const auto rows = compatibility_residual(D);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].p == 0.3);
  CHECK(rows[0].B == 0.0);
  CHECK(rows[1].p == 0.0);
  CHECK(rows[1].B == 0.25);
}

TEST_CASE("startup from compatible data keeps boundary rates small") {
  auto g = make_grid(2, 28);
  const auto bd = make_builtin("solenoidal-random", *g);
  EosParams eos;
  eos.kappa = 100;
  const auto D = construct_compatible(g, bd.v, bd.B, eos);
  RunOptions o;
  o.t_final = 10 * 5e-4;
  o.dt = 5e-4;
  const auto h = run(D.state(), eos, o);
  const auto rows = compatibility_residual(D, &h);
  REQUIRE(rows[0].p_run.has_value());
  CHECK(*rows[0].p_run == 0.0);
  // raw data without the correction
  const auto raw = run(state_from(g, bd), eos, o);
  CompatibleData R = D;
  R.u0 = bd.v;
  const auto raw_rows = compatibility_residual(R, &raw);
  REQUIRE(rows[1].p_run.has_value());
  REQUIRE(raw_rows[1].p_run.has_value());
  CHECK(*rows[1].p_run < *raw_rows[1].p_run);
}

TEST_CASE("constructor preconditions") {
  auto g = make_grid(2, 28);
  auto B = zero_vector(2, g->size());
  for (int b : g->boundary_nodes()) B[0][b] = 1.0;
  CHECK_THROWS_AS(construct_compatible(g, zero_vector(2, g->size()), B, EosParams{}), Error);
  ConstructOptions o;
  o.order = 5;
  CHECK_THROWS_AS(construct_compatible(g, zero_vector(2, g->size()), zero_vector(2, g->size()), EosParams{}, o), Error);
}
