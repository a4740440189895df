#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "mhdl/builtins.hpp"
#include "mhdl/verification.hpp"

using namespace mhdl;
using testing::sample;

namespace {

const std::vector<double> kPoint{0.3, 0.2, -0.4};  // (t, y1, y2)

std::vector<IdentityCase> all_cases(int dim) {
  std::vector<IdentityCase> out;
  for (auto id : {CommutatorId::DtGradR, CommutatorId::GradDtK, CommutatorId::DtkBdot, CommutatorId::DtkLaplace}) {
    const auto [lo, hi] = supported_orders(id);
    for (int k = lo; k <= hi; ++k) {
      IdentityCase c;
      c.id = id;
      c.order = k;
      const int nf = id == CommutatorId::DtGradR ? k : free_indices(id);
      for (int i = 0; i < nf; ++i) c.indices.push_back(i % dim);
      out.push_back(c);
    }
  }
  return out;
}

// x = y for all t
PolynomialFlow frozen_flow(std::uint64_t seed) {
  auto f = random_polynomial_flow(2, seed);
  for (int i = 0; i < 2; ++i) {
    std::vector<int> e(3, 0);
    e[1 + i] = 1;
    f.x[i].terms = {{e, 1.0}};
  }
  return f;
}

History short_run(int nx, double shift = 0.0) {
  auto g = make_grid(2, nx);
  auto s = state_from(g, make_builtin("solenoidal-random", *g));
  for (auto& v : s.p) v += shift;
  EosParams eos;
  RunOptions o;
  o.t_final = 0.008;
  o.dt = 1e-3;
  return run(s, eos, o);
}

}  // namespace

TEST_CASE("identity names round trip") {
  for (auto id : {CommutatorId::DtGradR, CommutatorId::GradDtK, CommutatorId::DtkBdot, CommutatorId::DtkLaplace})
    CHECK(commutator_from_name(commutator_name(id)) == id);
  for (auto id : {InequalityId::Hodge, InequalityId::EllipticI, InequalityId::EllipticII, InequalityId::Tensor,
                  InequalityId::Theta})
    CHECK(inequality_from_name(inequality_name(id)) == id);
  CHECK_THROWS_AS(commutator_from_name("nope"), Error);
}

TEST_CASE("first-order commutator expansion") {
  const auto e = commutator_expansion(CommutatorId::DtGradR, 1);
  REQUIRE(e.terms.size() == 1);
  CHECK(e.terms[0].coeff == -1.0);
  CHECK(e.terms[0].factors.size() == 2);
  CHECK(e.free == 1);
  const auto s = simplify(e);
  CHECK(describe(s) == describe(simplify(s)));
  CHECK_FALSE(describe(e).empty());
}

TEST_CASE("expansions are stable under simplification") {
  for (auto c : all_cases(2)) {
    const auto e = commutator_expansion(c.id, c.order);
    const auto s = simplify(e);
    CHECK(s.terms.size() <= e.terms.size());
    CHECK(describe(simplify(s)) == describe(s));
  }
}

TEST_CASE("polynomial flows satisfy every identity to round-off") {
  for (int dim : {2, 3}) {
    const auto flow = random_polynomial_flow(dim, 7);
    std::vector<double> pt(kPoint.begin(), kPoint.begin() + 1 + dim);
    for (auto c : all_cases(dim)) {
      INFO(commutator_name(c.id), " order ", c.order, " dim ", dim);
      const auto r = commutator_residual(c, flow, pt);
      CHECK(r.scale > 0);
      CHECK(r.relative <= 1e-10);
      c.test_component = dim - 1;
      CHECK(commutator_residual(c, flow, pt).relative <= 1e-10);
    }
  }
}

TEST_CASE("frozen flow map makes both sides vanish") {
  const auto flow = frozen_flow(3);
  for (auto c : all_cases(2)) {
    const auto r = commutator_residual(c, flow, kPoint);
    CHECK(r.residual <= 1e-12 * std::max(1.0, r.scale));
  }
}

TEST_CASE("linear velocity and quadratic field") {
  const auto flow = random_polynomial_flow(2, 11, 1, 2);
  for (int i = 0; i < 2; ++i) {
    IdentityCase c;
    c.id = CommutatorId::DtGradR;
    c.order = 1;
    c.indices = {i};
    const auto r = commutator_residual(c, flow, kPoint);
    CHECK(r.residual <= 1e-10);
    CHECK(r.scale > 0);
  }
}

TEST_CASE("every expansion term is needed") {
  const auto flow = random_polynomial_flow(2, 5);
  for (auto c : all_cases(2)) {
    const auto full = commutator_expansion(c.id, c.order);
    for (std::size_t k = 0; k < full.terms.size(); ++k) {
      INFO(commutator_name(c.id), " order ", c.order, " term ", k);
      auto e = full;
      e.terms.erase(e.terms.begin() + static_cast<long>(k));
      CHECK(commutator_residual(c, e, flow, kPoint).relative > 1e-8);
    }
    auto scaled = full;
    scaled.terms.front().coeff *= 1.5;
    CHECK(commutator_residual(c, scaled, flow, kPoint).relative > 1e-8);
  }
}

TEST_CASE("unsupported orders and indices") {
  IdentityCase c;
  c.id = CommutatorId::DtkLaplace;
  c.order = 1;
  const auto flow = random_polynomial_flow(2, 1);
  CHECK_THROWS_AS(commutator_residual(c, flow, kPoint), Error);
  CHECK_THROWS_AS(commutator_expansion(CommutatorId::GradDtK, 4), Error);
  c.id = CommutatorId::GradDtK;
  c.order = 2;
  c.indices = {};
  CHECK_THROWS_AS(commutator_residual(c, flow, kPoint), Error);
  c.indices = {2};
  CHECK_THROWS_AS(commutator_residual(c, flow, kPoint), Error);
  try {
    commutator_expansion(CommutatorId::DtGradR, 0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Range);
  }
}

TEST_CASE("discrete residual ignores a constant shift of the test field") {
  const auto a = short_run(28), b = short_run(28, 3.0);
  IdentityCase c;
  c.id = CommutatorId::DtkLaplace;
  c.order = 2;
  const auto ra = commutator_residual(c, a, 0.004), rb = commutator_residual(c, b, 0.004);
  CHECK(rb.residual == doctest::Approx(ra.residual).epsilon(1e-3));
  c.id = CommutatorId::DtGradR;
  c.order = 2;
  c.indices = {0, 1};
  CHECK(commutator_residual(c, b, 0.004).residual ==
        doctest::Approx(commutator_residual(c, a, 0.004).residual).epsilon(1e-3));
}

TEST_CASE("zero sample is a vacuous pass") {
  auto g = make_grid(2, 28);
  const auto s = rest_state(g);
  for (auto id : {InequalityId::EllipticI, InequalityId::EllipticII, InequalityId::Tensor}) {
    InequalityCase c;
    c.id = id;
    c.q.assign(g->size(), 0.0);
    const auto r = inequality_ratio(c, s);
    CHECK(r.vacuous);
    CHECK(r.lhs == 0.0);
    CHECK(r.rhs == 0.0);
  }
  InequalityCase h;
  h.id = InequalityId::Hodge;
  h.r = 0;
  h.w = zero_vector(2, g->size());
  CHECK(inequality_ratio(h, s).vacuous);
}

TEST_CASE("Hodge estimate on a gradient field") {
  auto g = make_grid(2, 32);
  const auto s = rest_state(g);
  Frame F(*g, g->reference());
  const auto f = sample(*g, [](const double* y) { return std::sin(y[0]) * y[1] + y[0] * y[0]; });
  for (int r : {0, 1}) {
    InequalityCase c;
    c.id = InequalityId::Hodge;
    c.r = r;
    c.w = F.grad(f);
    const auto res = inequality_ratio(c, s);
    CHECK(std::isfinite(res.lhs));
    CHECK(res.lhs > 0);
    CHECK(res.rhs > 0);
    CHECK(std::isfinite(res.ratio));
  }
}

TEST_CASE("violated hypotheses raise precondition errors") {
  auto g = make_grid(2, 28);
  const auto s = rest_state(g);
  InequalityCase c;
  c.id = InequalityId::Tensor;
  c.q = sample(*g, [](const double* y) { return 1.0 + y[0]; });
  auto kind_of = [&](const InequalityCase& k) {
    try {
      inequality_ratio(k, s);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Io;
  };
  CHECK(kind_of(c) == ErrorKind::Precondition);
  c.id = InequalityId::Theta;
  c.q = sample(*g, [](const double* y) { return y[0] * y[0] + y[1] * y[1] - 1.0; });  // wrong sign
  for (int b : g->boundary_nodes()) c.q[b] = 0.0;
  CHECK(kind_of(c) == ErrorKind::Precondition);
  c.id = InequalityId::EllipticII;
  c.delta = 0.0;
  CHECK(kind_of(c) == ErrorKind::Precondition);
  c.id = InequalityId::EllipticI;
  c.r = 5;
  CHECK(kind_of(c) == ErrorKind::Range);
}

TEST_CASE("theta estimate on a pressure with a margin") {
  auto g = make_grid(2, 32);
  const auto s = rest_state(g);
  InequalityCase c;
  c.id = InequalityId::Theta;
  c.q = sample(*g, [](const double* y) { return 1.0 - y[0] * y[0] - y[1] * y[1]; });
  for (int b : g->boundary_nodes()) c.q[b] = 0.0;
  const auto r = inequality_ratio(c, s);
  // |theta| = |gamma| = 1 per boundary point and |grad P| = 2, |Pi grad^2 P| = 2
  CHECK(r.ratio > 0.1);
  CHECK(r.ratio < 1.0);
}

TEST_CASE("elliptic estimate constant is stable under refinement") {
  std::vector<double> m;
  for (int nx : {32, 64, 128}) {
    auto g = make_grid(2, nx);
    const auto sw = inequality_sweep(InequalityId::EllipticI, 2, 100, 1, rest_state(g));
    CHECK(sw.samples == 100);
    for (double r : sw.ratios) CHECK(std::isfinite(r));
    m.push_back(sw.max_ratio);
  }
  CHECK(m[1] == doctest::Approx(m[0]).epsilon(0.2));
  CHECK(m[2] == doctest::Approx(m[1]).epsilon(0.2));
}
