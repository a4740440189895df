#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "mhdl/numerics.hpp"
#include "mhdl/reference_calculus.hpp"

using namespace mhdl;
using testing::max_abs;
using testing::max_abs_diff;
using testing::sample;

TEST_CASE("gradient of a coordinate is a unit vector") {
  auto g = make_grid(2, 32);
  Frame F(*g, g->reference());
  const auto gr = F.grad(g->reference()[0]);
  for (std::size_t k = 0; k < g->size(); ++k) {
    CHECK(gr[0][k] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(gr[1][k]) < 1e-12);
  }
}

TEST_CASE("gradient of a coordinate on a moved configuration") {
  auto g = make_grid(2, 32);
  VectorField x = g->reference();
  for (std::size_t k = 0; k < g->size(); ++k) {
    const double a = x[0][k], b = x[1][k];
    x[0][k] = a + 0.1 * a * b;
    x[1][k] = b + 0.05 * a * a;
  }
  Frame F(*g, x);
  const auto gr = F.grad(x[0]);
  CHECK(max_abs_diff(gr[0], ScalarField(g->size(), 1.0)) < 1e-11);
  CHECK(max_abs(gr[1]) < 1e-11);
}

TEST_CASE("identity map derivatives match the reference derivatives") {
  auto g = make_grid(2, 32);
  Frame F(*g, g->reference());
  ReferenceCalculus rc(*g);
  const auto f = sample(*g, [](const double* y) { return std::sin(y[0]) * std::exp(y[1]); });
  const auto a = F.grad(f);
  const auto b = rc.label_gradient(f);
  for (int i = 0; i < 2; ++i) CHECK(max_abs_diff(a[i], b[i]) < 1e-10);
  const auto e = eulerian_derivative(F, f, {1});
  CHECK(max_abs_diff(e, a[1]) == 0.0);
}

TEST_CASE("rotation field has zero divergence and curl two") {
  auto g = make_grid(2, 32);
  Frame F(*g, g->reference());
  const auto& y = g->reference();
  VectorField X{y[1], y[0]};
  for (auto& v : X[0]) v = -v;
  const auto vc = vector_calculus(F, X);
  CHECK(max_abs(vc.div) < 1e-11);
  REQUIRE(vc.curl.size() == 1);
  CHECK(max_abs_diff(vc.curl[0], ScalarField(g->size(), 2.0)) < 1e-11);
}

TEST_CASE("curl of a gradient vanishes to scheme order") {
  auto curl_err = [](int nx) {
    auto g = make_grid(2, nx);
    Frame F(*g, g->reference());
    const auto f = sample(*g, [](const double* y) { return std::sin(2 * y[0]) * std::cos(y[1]); });
    return max_abs(vector_calculus(F, F.grad(f)).curl[0]);
  };
  const double a = curl_err(32), b = curl_err(64);
  CHECK(a < 2e-2);
  CHECK(a / b > 6.0);
}

TEST_CASE("laplacian of quadratic and harmonic functions") {
  auto g = make_grid(2, 32);
  Frame F(*g, g->reference());
  const auto r2 = sample(*g, [](const double* y) { return y[0] * y[0] + y[1] * y[1]; });
  // pointwise error is dominated by the nodes next to block edges
  CHECK(max_abs_diff(laplacian(F, r2), ScalarField(g->size(), 4.0)) < 2e-2);
  // Re (y1 + i y2)^3
  const auto h = sample(*g, [](const double* y) { return y[0] * y[0] * y[0] - 3 * y[0] * y[1] * y[1]; });
  const auto lh = laplacian(F, h);
  ScalarField sq(lh);
  for (auto& v : sq) v *= v;
  CHECK(std::sqrt(integrate(F, sq)) < 0.1);

  auto g3 = make_grid(3, 28);
  Frame F3(*g3, g3->reference());
  const auto r3 = sample(*g3, [](const double* y) { return y[0] * y[0] + y[1] * y[1] + y[2] * y[2]; });
  CHECK(max_abs_diff(laplacian(F3, r3), ScalarField(g3->size(), 6.0)) < 0.3);
}

TEST_CASE("laplacian converges on harmonic data") {
  auto err = [](int nx) {
    auto g = make_grid(2, nx);
    Frame F(*g, g->reference());
    const auto h = sample(*g, [](const double* y) { return std::exp(y[0]) * std::cos(y[1]); });
    return max_abs(laplacian(F, h));
  };
  const double a = err(32), b = err(64);
  CHECK(a / b > 3.0);
}

TEST_CASE("Dirichlet Poisson problems") {
  auto g = make_grid(2, 32);
  Frame F(*g, g->reference());
  PoissonSolver solver(F);
  EllipticProblem pb;
  pb.rhs.assign(g->size(), 4.0);
  const auto res = solver.solve(pb);
  CHECK(res.relative_residual < 1e-9);
  const auto exact = sample(*g, [](const double* y) { return y[0] * y[0] + y[1] * y[1] - 1.0; });
  CHECK(max_abs_diff(res.solution, exact) < 1e-4);

  EllipticProblem zero;
  zero.rhs.assign(g->size(), 0.0);
  CHECK(max_abs(solver.solve(zero).solution) < 1e-14);
}

TEST_CASE("Poisson solution converges under refinement") {
  auto err = [](int nx) {
    auto g = make_grid(2, nx);
    Frame F(*g, g->reference());
    PoissonSolver solver(F);
    EllipticProblem pb;
    // f = (1 - |y|^2) e^{y1}
    pb.rhs = sample(*g, [](const double* y) {
      const double r2 = y[0] * y[0] + y[1] * y[1];
      return std::exp(y[0]) * (-4.0 - 4.0 * y[0] + 1.0 - r2);
    });
    const auto exact = sample(*g, [](const double* y) { return (1.0 - y[0] * y[0] - y[1] * y[1]) * std::exp(y[0]); });
    return max_abs_diff(solver.solve(pb).solution, exact);
  };
  const double a = err(32), b = err(64);
  CHECK(a < 1e-3);
  CHECK(a / b > 3.5);
}

TEST_CASE("integrals of one") {
  auto g = make_grid(2, 32);
  Frame F(*g, g->reference());
  const ScalarField one(g->size(), 1.0);
  CHECK(integrate(F, one) == doctest::Approx(M_PI).epsilon(1e-7));
  CHECK(integrate(F, one, Region::Boundary) == doctest::Approx(2 * M_PI).epsilon(1e-7));
  VectorField x = g->reference();
  for (auto& c : x)
    for (auto& v : c) v *= 2;
  Frame F2(*g, x);
  CHECK(integrate(F2, one) == doctest::Approx(4 * M_PI).epsilon(1e-7));

  auto g3 = make_grid(3, 28);
  Frame F3(*g3, g3->reference());
  CHECK(integrate(F3, ScalarField(g3->size(), 1.0)) == doctest::Approx(4 * M_PI / 3).epsilon(1e-5));
}

TEST_CASE("integration by parts holds to scheme order") {
  auto defect = [](int nx) {
    auto g = make_grid(2, nx);
    Frame F(*g, g->reference());
    const auto f = sample(*g, [](const double* y) { return std::cos(y[0] + 0.5 * y[1]); });
    VectorField X{sample(*g, [](const double* y) { return y[0] * y[1] + 1.0; }),
                  sample(*g, [](const double* y) { return std::sin(y[0]); })};
    const auto div = F.div(X);
    const auto gf = F.grad(f);
    ScalarField a(g->size()), b(g->size());
    for (std::size_t k = 0; k < g->size(); ++k) {
      a[k] = f[k] * div[k] + gf[0][k] * X[0][k] + gf[1][k] * X[1][k];
      b[k] = 0;
    }
    const auto N = boundary_normals(F);
    const auto& bnd = g->boundary_nodes();
    for (std::size_t s = 0; s < bnd.size(); ++s) b[bnd[s]] = f[bnd[s]] * (X[0][bnd[s]] * N[0][s] + X[1][bnd[s]] * N[1][s]);
    return std::abs(integrate(F, a) - integrate(F, b, Region::Boundary));
  };
  const double a = defect(32), b = defect(64);
  CHECK(a < 1e-4);
  CHECK(a / b > 6.0);
}

TEST_CASE("derivative operators are linear") {
  auto g = make_grid(2, 28);
  Frame F(*g, g->reference());
  const auto f = sample(*g, [](const double* y) { return std::sin(3 * y[0]); });
  const auto h = sample(*g, [](const double* y) { return y[1] * y[1] * y[0]; });
  ScalarField comb(g->size());
  for (std::size_t k = 0; k < g->size(); ++k) comb[k] = 2.0 * f[k] - 0.5 * h[k];
  const auto lf = laplacian(F, f), lh = laplacian(F, h), lc = laplacian(F, comb);
  for (std::size_t k = 0; k < g->size(); ++k) CHECK(lc[k] == doctest::Approx(2.0 * lf[k] - 0.5 * lh[k]).scale(1).epsilon(1e-10));
}
