#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "mhdl/frame.hpp"
#include "mhdl/geometry.hpp"
#include "mhdl/numerics.hpp"
#include "mhdl/verification.hpp"

namespace mhdl {

namespace {

// all components of d^r f, multi-index (i_1..i_r) stored at sum i_k d^{r-k}
std::vector<ScalarField> derivative_tensor(const Frame& F, const ScalarField& f, int r) {
  std::vector<ScalarField> cur{f};
  for (int s = 0; s < r; ++s) {
    std::vector<ScalarField> nxt;
    nxt.reserve(cur.size() * F.dim());
    for (const ScalarField& c : cur) {
      auto g = F.grad(c);
      for (auto& gi : g) nxt.push_back(std::move(gi));
    }
    cur = std::move(nxt);
  }
  return cur;
}

double domain_norm(const Frame& F, const std::vector<ScalarField>& T) {
  ScalarField s(F.size(), 0.0);
  for (const auto& c : T)
    for (std::size_t n = 0; n < s.size(); ++n) s[n] += c[n] * c[n];
  return std::sqrt(std::max(0.0, F.integrate(s)));
}

struct BoundaryNorm {
  const Grid* grid;
  ScalarField weight;
  double operator()(const std::vector<ScalarField>& T) const {
    const auto& bnd = grid->boundary_nodes();
    ScalarField s(bnd.size(), 0.0);
    for (std::size_t k = 0; k < bnd.size(); ++k) {
      double v = 0;
      for (const auto& c : T) v += c[bnd[k]] * c[bnd[k]];
      s[k] = weight[k] * v;
    }
    return std::sqrt(pairwise_sum(s));
  }
  // tensor already given on boundary slots
  double slots(const std::vector<ScalarField>& T) const {
    ScalarField s(weight.size(), 0.0);
    for (std::size_t k = 0; k < s.size(); ++k) {
      double v = 0;
      for (const auto& c : T) v += c[k] * c[k];
      s[k] = weight[k] * v;
    }
    return std::sqrt(pairwise_sum(s));
  }
};

std::vector<ScalarField> on_slots(const Grid& g, const std::vector<ScalarField>& T) {
  const auto& bnd = g.boundary_nodes();
  std::vector<ScalarField> out(T.size(), ScalarField(bnd.size()));
  for (std::size_t c = 0; c < T.size(); ++c)
    for (std::size_t k = 0; k < bnd.size(); ++k) out[c][k] = T[c][bnd[k]];
  return out;
}

double projected_norm(const GeometryCache& G, const BoundaryNorm& bn, const std::vector<ScalarField>& T, int rank) {
  BoundaryTensor t;
  t.rank = rank;
  t.comp = on_slots(*G.grid, T);
  return bn.slots(project(G, t).comp);
}

ScalarField laplace(const Frame& F, const ScalarField& f) {
  const auto g = F.grad(f);
  ScalarField out(F.size(), 0.0);
  for (int l = 0; l < F.dim(); ++l) {
    const auto gg = F.grad(g[l]);
    for (std::size_t n = 0; n < out.size(); ++n) out[n] += gg[l][n];
  }
  return out;
}

double max_abs(const ScalarField& f) {
  double m = 0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

void require_trace_zero(const Grid& g, const ScalarField& q, double tol, const char* who) {
  const double scale = max_abs(q);
  double tr = 0;
  for (int n : g.boundary_nodes()) tr = std::max(tr, std::abs(q[n]));
  if (tr > tol * std::max(scale, 1e-300) && tr > 0)
    throw Error(ErrorKind::Precondition, std::string(who) + ": hypothesis q = 0 on the boundary fails (max trace " +
                                             std::to_string(tr) + ")");
}

InequalityResult finish(double lhs, double rhs) {
  InequalityResult r;
  r.lhs = lhs;
  r.rhs = rhs;
  if (lhs == 0.0 && rhs == 0.0) {
    r.vacuous = true;
    r.ratio = 0.0;
  } else {
    r.ratio = rhs > 0 ? lhs / rhs : std::numeric_limits<double>::infinity();
  }
  return r;
}

InequalityResult hodge(const InequalityCase& c, const SimState& s, const Frame& F, const GeometryCache& G) {
  const int d = s.dim();
  if (c.r < 0 || c.r > 1) throw Error(ErrorKind::Range, "hodge: r must be 0 or 1");
  if (static_cast<int>(c.w.size()) != d) throw Error(ErrorKind::Precondition, "hodge: sample must be a vector field");
  const double K = std::max(G.curvature_bound, G.iota0 > 0 ? 1.0 / G.iota0 : 0.0);
  const std::size_t n = s.size();
  // beta[I][i]: I runs over the r leading indices
  const int nI = c.r == 0 ? 1 : d;
  std::vector<VectorField> beta(nI, VectorField(d));
  for (int i = 0; i < d; ++i) {
    if (c.r == 0) {
      beta[0][i] = c.w[i];
    } else {
      auto g = F.grad(c.w[i]);
      for (int I = 0; I < d; ++I) beta[I][i] = std::move(g[I]);
    }
  }
  ScalarField lhs(n, 0.0), rhs(n, 0.0);
  const auto& N = G.normal;
  // dbeta[I][i][k] = d_k beta_{Ii}
  std::vector<std::vector<VectorField>> db(nI, std::vector<VectorField>(d));
  for (int I = 0; I < nI; ++I)
    for (int i = 0; i < d; ++i) db[I][i] = F.grad(beta[I][i]);
  for (std::size_t p = 0; p < n; ++p) {
    auto gam = [&](int I, int J) { return (I == J ? 1.0 : 0.0) - N[I][p] * N[J][p]; };
    double l = 0, normal_part = 0, dv = 0, cu = 0, b2 = 0;
    for (int I = 0; I < nI; ++I) {
      for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) l += db[I][i][k][p] * db[I][i][k][p];
      double div = 0;
      for (int i = 0; i < d; ++i) div += db[I][i][i][p];
      dv += div * div;
      for (int i = 0; i < d; ++i)
        for (int k = i + 1; k < d; ++k) {
          const double w = db[I][k][i][p] - db[I][i][k][p];
          cu += w * w;
        }
      for (int i = 0; i < d; ++i) b2 += beta[I][i][p] * beta[I][i][p];
    }
    // N^i N^j gamma^{IJ} d_k beta_{Ii} d_k beta_{Jj}
    for (int I = 0; I < nI; ++I)
      for (int J = 0; J < nI; ++J) {
        const double gIJ = c.r == 0 ? 1.0 : gam(I, J);
        if (gIJ == 0.0) continue;
        for (int k = 0; k < d; ++k) {
          double a = 0, b = 0;
          for (int i = 0; i < d; ++i) {
            a += N[i][p] * db[I][i][k][p];
            b += N[i][p] * db[J][i][k][p];
          }
          normal_part += gIJ * a * b;
        }
      }
    lhs[p] = l;
    rhs[p] = normal_part + dv + cu + K * K * b2;
  }
  return finish(std::sqrt(std::max(0.0, F.integrate(lhs))), std::sqrt(std::max(0.0, F.integrate(rhs))));
}

}  // namespace

const char* inequality_name(InequalityId id) {
  switch (id) {
    case InequalityId::Hodge:
      return "hodge";
    case InequalityId::EllipticI:
      return "elliptic_I";
    case InequalityId::EllipticII:
      return "elliptic_II";
    case InequalityId::Tensor:
      return "tensor";
    case InequalityId::Theta:
      return "theta";
  }
  return "?";
}

InequalityId inequality_from_name(const std::string& name) {
  for (InequalityId id : {InequalityId::Hodge, InequalityId::EllipticI, InequalityId::EllipticII, InequalityId::Tensor,
                          InequalityId::Theta})
    if (name == inequality_name(id)) return id;
  throw Error(ErrorKind::Config, "unknown inequality '" + name + "'");
}

InequalityResult inequality_ratio(const InequalityCase& c, const SimState& s) {
  const Frame F(*s.grid, s.x);
  const GeometryCache G = compute_geometry(s.grid, s.x);
  const BoundaryNorm bn{s.grid.get(), boundary_weights(F)};
  if (c.id == InequalityId::Hodge) return hodge(c, s, F, G);
  if (c.q.size() != s.size()) throw Error(ErrorKind::Precondition, "inequality: scalar sample has the wrong size");

  switch (c.id) {
    case InequalityId::EllipticI:
    case InequalityId::EllipticII: {
      const bool two = c.id == InequalityId::EllipticII;
      if (c.r < (two ? 2 : 1) || c.r > 3)
        throw Error(ErrorKind::Range, std::string(inequality_name(c.id)) + ": r out of range");
      if (two && !(c.delta > 0)) throw Error(ErrorKind::Precondition, "elliptic_II: delta must be positive");
      std::vector<std::vector<ScalarField>> D;
      for (int s2 = 0; s2 <= c.r; ++s2) D.push_back(derivative_tensor(F, c.q, s2));
      const ScalarField lap = laplace(F, c.q);
      double proj = 0, interior = 0;
      for (int s2 = 0; s2 <= c.r; ++s2) proj += projected_norm(G, bn, D[s2], s2);
      for (int s2 = 0; s2 <= c.r - (two ? 2 : 1); ++s2) interior += domain_norm(F, derivative_tensor(F, lap, s2));
      const double lhs = domain_norm(F, D[c.r]) + bn(D[two ? c.r - 1 : c.r]);
      const double rhs = two ? c.delta * proj + interior / c.delta : proj + interior;
      return finish(lhs, rhs);
    }
    case InequalityId::Tensor: {
      if (c.r != 2) throw Error(ErrorKind::Range, "tensor: only r = 2 is supported");
      require_trace_zero(*s.grid, c.q, c.trace_tol, "tensor");
      const auto D1 = derivative_tensor(F, c.q, 1);
      const auto D2 = derivative_tensor(F, c.q, 2);
      const int d = s.dim();
      const auto g1 = on_slots(*s.grid, D1);
      std::vector<ScalarField> tn(d * d, ScalarField(G.theta[0].size()));
      for (std::size_t k = 0; k < tn[0].size(); ++k) {
        double dn = 0;
        for (int i = 0; i < d; ++i) dn += G.normal[i][s.grid->boundary_nodes()[k]] * g1[i][k];
        for (int ij = 0; ij < d * d; ++ij) tn[ij][k] = G.theta[ij][k] * dn;
      }
      return finish(projected_norm(G, bn, D2, 2), bn.slots(tn) + bn(D1));
    }
    case InequalityId::Theta: {
      if (c.r != 2) throw Error(ErrorKind::Range, "theta: only r = 2 is supported");
      require_trace_zero(*s.grid, c.q, c.trace_tol, "theta");
      const auto D1 = derivative_tensor(F, c.q, 1);
      const auto& bnd = s.grid->boundary_nodes();
      double margin = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < bnd.size(); ++k) {
        double dn = 0;
        for (int i = 0; i < s.dim(); ++i) dn += G.normal[i][bnd[k]] * D1[i][bnd[k]];
        margin = std::min(margin, -dn);
      }
      if (!(margin > 0))
        throw Error(ErrorKind::Precondition,
                    "theta: hypothesis -grad_N P > 0 on the boundary fails (margin " + std::to_string(margin) + ")");
      const auto D2 = derivative_tensor(F, c.q, 2);
      return finish(bn.slots(G.theta), projected_norm(G, bn, D2, 2) + bn(D1));
    }
    case InequalityId::Hodge:
      break;
  }
  return {};
}

InequalitySweep inequality_sweep(InequalityId id, int r, int n, std::uint64_t seed, const SimState& s, double delta) {
  if (n < 1) throw Error(ErrorKind::Range, "inequality_sweep: need at least one sample");
  const Frame F(*s.grid, s.x);
  const int d = s.dim();
  // positive field vanishing on the boundary: -Lap phi = 1, phi = 0
  ScalarField phi;
  if (id != InequalityId::Hodge) {
    PoissonSolver solver(F);
    EllipticProblem pb;
    pb.rhs.assign(s.size(), -1.0);
    phi = solver.solve(pb).solution;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  // random cubic in the current positions
  auto poly = [&]() {
    std::vector<std::array<int, 3>> exps;
    for (int a = 0; a <= 3; ++a)
      for (int b = 0; a + b <= 3; ++b)
        for (int c = 0; a + b + c <= 3; ++c)
          if (d == 3 || c == 0) exps.push_back({a, b, c});
    std::vector<double> coef(exps.size());
    for (double& v : coef) v = U(rng);
    ScalarField f(s.size(), 0.0);
    for (std::size_t p = 0; p < s.size(); ++p)
      for (std::size_t m = 0; m < exps.size(); ++m) {
        double v = coef[m];
        for (int i = 0; i < d; ++i) v *= std::pow(s.x[i][p], exps[m][i]);
        f[p] += v;
      }
    return f;
  };
  InequalitySweep out;
  for (int k = 0; k < n; ++k) {
    InequalityCase c;
    c.id = id;
    c.r = r;
    c.delta = delta;
    c.trace_tol = 1e-8;
    if (id == InequalityId::Hodge) {
      for (int i = 0; i < d; ++i) c.w.push_back(poly());
    } else {
      const ScalarField P = poly();
      c.q.resize(s.size());
      if (id == InequalityId::Theta) {
        // keep the factor positive so that the normal derivative has a sign
        const double m = max_abs(P);
        for (std::size_t p = 0; p < s.size(); ++p) c.q[p] = phi[p] * (1.0 + 0.5 * P[p] / std::max(m, 1e-300));
      } else {
        for (std::size_t p = 0; p < s.size(); ++p) c.q[p] = phi[p] * P[p];
      }
    }
    const auto res = inequality_ratio(c, s);
    out.ratios.push_back(res.ratio);
    out.max_ratio = std::max(out.max_ratio, res.ratio);
    ++out.samples;
  }
  return out;
}

}  // namespace mhdl
