#include "mhdl/initial_data.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <string>
#include <cmath>
#include <cstdio>

#include "mhdl/energies.hpp"
#include "mhdl/numerics.hpp"

namespace mhdl {

namespace {

double factorial(int k) {
  double f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

struct Jets {
  FieldSet<Jet> state, rate;  // rate.p and rate.B carry the unconstrained boundary values
};

// Taylor jets of the semi-discrete flow with p and B prescribed by the ladder; x and u follow
// from the momentum equation order by order.
Jets build_jets(const Grid& g, const EosParams& eos, const VectorField& u0, const std::vector<ScalarField>& p,
                const std::vector<VectorField>& B) {
  const int d = g.dim();
  const std::size_t n = g.size();
  const int N = static_cast<int>(p.size()) - 1;
  Jets J;
  auto& s = J.state;
  s.x.assign(d, std::vector<Jet>(n));
  s.u.assign(d, std::vector<Jet>(n));
  s.B.assign(d, std::vector<Jet>(n));
  s.p.assign(n, Jet());
  for (int i = 0; i < d; ++i)
    for (std::size_t m = 0; m < n; ++m) {
      s.x[i][m] = Jet(g.reference()[i][m]);
      s.u[i][m] = Jet(u0[i][m]);
    }
  for (int k = 0; k <= N; ++k) {
    const double f = 1.0 / factorial(k);
    for (std::size_t m = 0; m < n; ++m) s.p[m].c[k] = p[k][m] * f;
    for (int i = 0; i < d; ++i)
      for (std::size_t m = 0; m < n; ++m) s.B[i][m].c[k] = B[k][i][m] * f;
  }
  FieldSet<Jet> r;
  for (int k = 0; k <= N; ++k) {
    mhd_rates(g, eos, s, r);
    for (int i = 0; i < d; ++i)
      for (std::size_t m = 0; m < n; ++m) {
        s.x[i][m].c[k + 1] = s.u[i][m].c[k] / (k + 1);
        s.u[i][m].c[k + 1] = r.u[i][m].c[k] / (k + 1);
      }
  }
  NaturalRates<Jet> nat;
  mhd_rates(g, eos, s, J.rate, &nat);
  const auto& bnd = g.boundary_nodes();
  for (std::size_t sl = 0; sl < bnd.size(); ++sl) {
    J.rate.p[bnd[sl]] = nat.p[sl];
    for (int i = 0; i < d; ++i) J.rate.B[i][bnd[sl]] = nat.B[i][sl];
  }
  return J;
}

double boundary_max(const Grid& g, const ScalarField& f) {
  double m = 0;
  for (int b : g.boundary_nodes()) m = std::max(m, std::abs(f[b]));
  return m;
}

struct Ladder {
  ScalarField phi;
  double flux = 0.0;
  std::vector<ScalarField> p;
  std::vector<VectorField> B;  // B[0] is data and never changes
};

// One pass over the elliptic system: magnetic ladder top-down, pressure ladder top-down
// (each level sees the fresh level above it), then the potential.
class Sweeper {
 public:
  Sweeper(const Grid& g, const EosParams& eos, const VectorField& v0, int order)
      : g_(g), eos_(eos), v0_(v0), N_(order), F_(g, g.reference()), P_(F_, LaplacianForm::Projection) {
    const int d = g.dim();
    const auto& inner = g.interior_nodes();
    const std::size_t nI = inner.size();
    divv0_ = F_.div(v0);
    for (double w : boundary_weights(F_)) perimeter_ += w;
    sqrtW_.resize(g.size());
    for (std::size_t m = 0; m < g.size(); ++m) sqrtW_[m] = std::sqrt(F_.weights()[m]);
    if (N_ >= 1 && eos.lambda > 0.0) {
      // lambda Lap + (. grad) v0 - (.) div v0 on interior dofs
      const PoissonSolver S(F_, LaplacianForm::Standard);
      const SpMat Ls = S.interior_laplacian();
      std::vector<VectorField> gu(d);
      for (int k = 0; k < d; ++k) gu[k] = F_.grad(v0[k]);
      std::vector<Eigen::Triplet<double>> t;
      for (int k = 0; k < d; ++k) {
        for (int r = 0; r < Ls.outerSize(); ++r)
          for (SpMat::InnerIterator it(Ls, r); it; ++it)
            t.emplace_back(k * nI + r, k * nI + it.col(), eos.lambda * it.value());
        for (std::size_t a = 0; a < nI; ++a) {
          const int m = inner[a];
          for (int l = 0; l < d; ++l) {
            double c = gu[k][l][m];
            if (l == k) c -= divv0_[m];
            if (c != 0.0) t.emplace_back(k * nI + a, l * nI + a, c);
          }
        }
      }
      Eigen::SparseMatrix<double> M(d * nI, d * nI);
      M.setFromTriplets(t.begin(), t.end());
      Bsolver_.compute(M);
      if (Bsolver_.info() != Eigen::Success)
        throw Error(ErrorKind::Solver, "construct_compatible: magnetic ladder operator is singular");
    }
  }

  const Frame& frame() const { return F_; }
  int evaluations() const { return evals_; }

  VectorField velocity(const Ladder& X) const {
    VectorField u = v0_;
    const auto gphi = F_.grad_cons(X.phi);
    for (std::size_t i = 0; i < u.size(); ++i)
      for (std::size_t m = 0; m < u[i].size(); ++m) u[i][m] += gphi[i][m];
    return u;
  }

  Jets jets(const Ladder& X) const { return build_jets(g_, eos_, velocity(X), X.p, X.B); }

  Ladder operator()(const Ladder& X) {
    ++evals_;
    const int d = g_.dim();
    const std::size_t n = g_.size();
    const auto& inner = g_.interior_nodes();
    const std::size_t nI = inner.size();
    const Jets J = jets(X);
    Ladder Y = X;

    if (eos_.lambda > 0.0) {
      for (int k = N_; k >= 1; --k) {
        Eigen::VectorXd rhs(d * nI);
        const double fac = factorial(k);
        for (int i = 0; i < d; ++i)
          for (std::size_t a = 0; a < nI; ++a) {
            const int m = inner[a];
            const double target = k + 1 <= N_ ? Y.B[k + 1][i][m] : 0.0;
            rhs[i * nI + a] = target - J.rate.B[i][m].c[k] * fac;
          }
        const Eigen::VectorXd sol = Bsolver_.solve(rhs);
        for (int i = 0; i < d; ++i)
          for (std::size_t a = 0; a < nI; ++a) Y.B[k][i][inner[a]] += sol[i * nI + a];
      }
    } else {
      // without diffusion the induction equation gives B_k = D^{k-1} B' outright; its boundary
      // values vanish together with those of the lower levels
      for (int k = 1; k <= N_; ++k) {
        const double fac = factorial(k - 1);
        for (int i = 0; i < d; ++i)
          for (int m : inner) Y.B[k][i][m] = J.rate.B[i][m].c[k - 1] * fac;
      }
    }

    auto level = [&](int k) -> const ScalarField* { return k <= N_ ? &Y.p[k] : nullptr; };
    for (int k = N_; k >= 0; --k) {
      // p_{k+2} = D^{k+1} p', principal part kappa Lap p_k
      ScalarField f(n, 0.0);
      const double fac = factorial(k + 1);
      for (std::size_t m = 0; m < n; ++m) {
        const double target = level(k + 2) ? (*level(k + 2))[m] : 0.0;
        f[m] = (target - J.rate.p[m].c[k + 1] * fac) / eos_.kappa;
      }
      EllipticProblem pb;
      pb.rhs = f;
      const auto dp = P_.solve(pb).solution;
      for (std::size_t m = 0; m < n; ++m) Y.p[k][m] += dp[m];
    }

    // div u0 = -p_1 / (kappa + p0); the Neumann flux is the constant that makes it solvable
    ScalarField f(n);
    for (std::size_t m = 0; m < n; ++m) {
      const double p1 = level(1) ? (*level(1))[m] : 0.0;
      f[m] = -p1 / (eos_.kappa + Y.p[0][m]) - divv0_[m];
    }
    double sf = 0;
    for (std::size_t m = 0; m < n; ++m) sf += F_.weights()[m] * f[m];
    Y.flux = sf / perimeter_;
    EllipticProblem pb;
    pb.rhs = f;
    pb.bc = BoundaryKind::Neumann;
    pb.boundary.assign(g_.boundary_nodes().size(), Y.flux);
    Y.phi = P_.solve(pb).solution;
    return Y;
  }

  // unknowns scaled by sqrt(W) so that the Euclidean norm is the discrete L2 norm
  Eigen::VectorXd pack(const Ladder& X) const {
    const std::size_t n = g_.size();
    const int d = g_.dim();
    Eigen::VectorXd v((1 + (N_ + 1) + N_ * d) * n);
    std::size_t o = 0;
    auto put = [&](const ScalarField& f) {
      for (std::size_t m = 0; m < n; ++m) v[o++] = sqrtW_[m] * f[m];
    };
    put(X.phi);
    for (int k = 0; k <= N_; ++k) put(X.p[k]);
    for (int k = 1; k <= N_; ++k)
      for (int i = 0; i < d; ++i) put(X.B[k][i]);
    return v;
  }

  Ladder unpack(const Eigen::VectorXd& v, const Ladder& like) const {
    const std::size_t n = g_.size();
    const int d = g_.dim();
    Ladder X = like;
    std::size_t o = 0;
    auto get = [&](ScalarField& f) {
      for (std::size_t m = 0; m < n; ++m) f[m] = v[o++] / sqrtW_[m];
    };
    get(X.phi);
    for (int k = 0; k <= N_; ++k) get(X.p[k]);
    for (int k = 1; k <= N_; ++k)
      for (int i = 0; i < d; ++i) get(X.B[k][i]);
    return X;
  }

 private:
  const Grid& g_;
  EosParams eos_;
  VectorField v0_;
  int N_;
  Frame F_;
  PoissonSolver P_;
  ScalarField divv0_, sqrtW_;
  double perimeter_ = 0.0;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> Bsolver_;
  int evals_ = 0;
};

// restarted GMRES for a matrix-free operator
template <class Op>
Eigen::VectorXd gmres(const Op& A, const Eigen::VectorXd& b, double rtol, int restart, int max_iter) {
  const Eigen::Index n = b.size();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) return x;
  int total = 0;
  while (total < max_iter) {
    Eigen::VectorXd r = b - (x.isZero() ? Eigen::VectorXd::Zero(n) : A(x));
    double beta = r.norm();
    if (beta <= rtol * bnorm) break;
    Eigen::MatrixXd V(n, restart + 1), H = Eigen::MatrixXd::Zero(restart + 1, restart);
    Eigen::VectorXd cs = Eigen::VectorXd::Zero(restart), sn = Eigen::VectorXd::Zero(restart);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(restart + 1);
    e[0] = beta;
    V.col(0) = r / beta;
    int j = 0;
    for (; j < restart && total < max_iter; ++j, ++total) {
      Eigen::VectorXd w = A(V.col(j));
      for (int i = 0; i <= j; ++i) {
        H(i, j) = V.col(i).dot(w);
        w -= H(i, j) * V.col(i);
      }
      H(j + 1, j) = w.norm();
      if (H(j + 1, j) > 0) V.col(j + 1) = w / H(j + 1, j);
      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
        H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = t;
      }
      const double den = std::hypot(H(j, j), H(j + 1, j));
      cs[j] = H(j, j) / den;
      sn[j] = H(j + 1, j) / den;
      H(j, j) = den;
      H(j + 1, j) = 0;
      e[j + 1] = -sn[j] * e[j];
      e[j] = cs[j] * e[j];
      if (std::abs(e[j + 1]) <= rtol * bnorm) {
        ++j;
        break;
      }
    }
    const Eigen::VectorXd y =
        H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(e.head(j));
    x += V.leftCols(j) * y;
    if (std::abs(e[j]) <= rtol * bnorm) break;
  }
  return x;
}

std::string tail_of(const std::vector<double>& h) {
  std::string s;
  for (std::size_t i = h.size() > 5 ? h.size() - 5 : 0; i < h.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, " %.3e", h[i]);
    s += buf;
  }
  return s;
}

}  // namespace

SimState CompatibleData::state() const {
  SimState s;
  s.grid = grid;
  s.x = grid->reference();
  s.u = u0;
  s.B = B[0];
  s.p = p[0];
  return s;
}

CompatibleData construct_compatible(GridPtr grid, const VectorField& v0, const VectorField& B0, const EosParams& eos,
                                    const ConstructOptions& opt) {
  const Grid& g = *grid;
  const int d = g.dim();
  const std::size_t n = g.size();
  const int N = opt.order;
  if (N < 0 || N + 2 > Jet::N - 1) throw Error(ErrorKind::Range, "construct_compatible: order must lie in [0, 3]");
  if (eos.kappa <= 0) throw Error(ErrorKind::Config, "construct_compatible: kappa must be positive");

  Ladder X;
  X.phi.assign(n, 0.0);
  X.p.assign(N + 1, ScalarField(n, 0.0));
  X.B.assign(N + 1, zero_vector(d, n));
  X.B[0] = B0;
  double trace = 0;
  for (int i = 0; i < d; ++i) trace = std::max(trace, boundary_max(g, B0[i]));
  if (trace > 1e-10)
    throw Error(ErrorKind::Precondition, "construct_compatible: B0 does not vanish on the boundary (max " +
                                             std::to_string(trace) + ")");
  {
    // also checks that v0 and B0 are solenoidal
    const auto pr = incompressible_pressure(grid, g.reference(), v0, X.B[0]);
    X.p[0] = pr.q;
    for (int b : g.boundary_nodes()) X.p[0][b] = 0.0;
  }

  Sweeper S(g, eos, v0, N);
  CompatibleData D;
  D.grid = grid;
  D.kappa = eos.kappa;
  D.lambda = eos.lambda;
  D.order = N;
  D.v0 = v0;

  auto relative = [](const Eigen::VectorXd& delta, const Eigen::VectorXd& ref) {
    const double r = ref.norm();
    return r > 0 ? delta.norm() / r : delta.norm();
  };
  auto fail = [&](const std::string& why) {
    throw Error(ErrorKind::Divergence,
                "construct_compatible: " + why + " after " + std::to_string(D.iterations) + " iterations; last updates" +
                    tail_of(D.update_norms));
  };

  if (opt.solver == LadderSolver::FixedPoint) {
    double damping = opt.damping;
    bool switched = false;
    int growth = 0;
    for (;;) {
      const Ladder Y = S(X);
      const Eigen::VectorXd x = S.pack(X), y = S.pack(Y);
      const Eigen::VectorXd step = damping * (y - x);
      const double rel = relative(step, x + step);
      X = S.unpack(x + step, Y);
      X.flux = X.flux * damping + (1 - damping) * D.neumann_flux;
      D.neumann_flux = X.flux;
      D.update_norms.push_back(rel);
      ++D.iterations;
      if (!std::isfinite(rel)) fail("non-finite update");
      if (rel <= opt.tol) break;
      const auto& h = D.update_norms;
      if (h.size() >= 2 && rel > h[h.size() - 2]) {
        ++growth;
        if (!switched) {
          damping = 0.5;
          switched = true;
        } else if (growth > 5) {
          fail("fixed point diverges");
        }
      } else {
        growth = 0;
      }
      if (D.iterations >= opt.max_iter) fail("no convergence");
    }
  } else {
    Eigen::VectorXd x = S.pack(X);
    Ladder Y = S(X);
    Eigen::VectorXd gx = S.pack(Y) - x;
    for (;;) {
      const double rel = relative(gx, x + gx);
      D.update_norms.push_back(rel);
      if (!std::isfinite(rel)) fail("non-finite update");
      if (rel <= opt.tol) {
        X = S.unpack(x + gx, Y);
        break;
      }
      if (D.iterations >= opt.max_iter) fail("no convergence");
      ++D.iterations;
      // the sweep residual G(x) = S(x) - x is close to affine, so a difference quotient is accurate
      auto J = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        const double eps = 1e-6 * std::max(1.0, x.norm()) / v.norm();
        const Eigen::VectorXd xe = x + eps * v;
        return (S.pack(S(S.unpack(xe, X))) - xe - gx) / eps;
      };
      const Eigen::VectorXd delta = gmres(J, -gx, 1e-6, 40, 200);
      double t = 1.0;
      Eigen::VectorXd xn, gn;
      Ladder Yn;
      for (int ls = 0; ls < 6; ++ls, t *= 0.5) {
        xn = x + t * delta;
        X = S.unpack(xn, X);
        Yn = S(X);
        gn = S.pack(Yn) - xn;
        if (gn.norm() < gx.norm()) break;
      }
      x = xn;
      gx = gn;
      Y = Yn;
    }
    D.neumann_flux = Y.flux;
  }
  D.sweeps = S.evaluations();
  D.phi = X.phi;
  D.p = X.p;
  D.B = X.B;
  D.u0 = S.velocity(X);

  // diagnostics at the converged ladder
  const Jets J = S.jets(X);
  const auto& inner = g.interior_nodes();
  for (int k = 0; k <= N; ++k) {
    D.trace_p.push_back(boundary_max(g, D.p[k]));
    double tb = 0;
    for (int i = 0; i < d; ++i) tb = std::max(tb, boundary_max(g, D.B[k][i]));
    D.trace_B.push_back(tb);
    double np = 0, nb = 0;
    for (int b : g.boundary_nodes()) {
      np = std::max(np, std::abs(J.rate.p[b].derivative(k)));
      for (int i = 0; i < d; ++i) nb = std::max(nb, std::abs(J.rate.B[i][b].derivative(k)));
    }
    D.natural_p.push_back(np);
    D.natural_B.push_back(nb);
  }
  if (N >= 1) {
    double h = 0;
    for (int m : inner)
      for (int i = 0; i < d; ++i) h = std::max(h, std::abs(D.B[1][i][m] - J.rate.B[i][m].c[0]));
    D.heat_defect0 = h;
  }
  const auto tay = taylor_expansion(D.state(), eos, std::min(N, Jet::N - 1));
  for (int k = 0; k <= N; ++k) {
    double mm = 0;
    for (int m : inner) mm = std::max(mm, std::abs(D.p[k][m] - tay.p[m].derivative(k)));
    D.ladder_mismatch_p.push_back(mm);
  }
  return D;
}

std::vector<CompatibilityRow> compatibility_residual(const CompatibleData& data, const History* history) {
  std::vector<CompatibilityRow> rows;
  for (int j = 0; j <= data.order; ++j) {
    CompatibilityRow r;
    r.j = j;
    // the ladder entries are the time derivatives at t = 0
    r.p = boundary_max(*data.grid, data.p.at(j));
    for (const auto& c : data.B.at(j)) r.B = std::max(r.B, boundary_max(*data.grid, c));
    rows.push_back(r);
  }
  if (!history || history->snapshots.empty()) return rows;
  // D^j of p and B on the boundary in a run, where the unconstrained rates stand for the first derivative
  const auto& H = *history;
  const std::size_t m = std::min<std::size_t>(H.snapshots.size(), 7);
  if (m < 2) return rows;
  const auto& bnd = data.grid->boundary_nodes();
  const int d = data.grid->dim();
  std::vector<NaturalRates<double>> nat(m);
  std::vector<double> t(m);
  for (std::size_t i = 0; i < m; ++i) {
    mhd_rhs(H.snapshots[i], H.eos, &nat[i]);
    t[i] = H.snapshots[i].t;
  }
  for (auto& r : rows) {
    if (r.j == 0) {
      r.p_run = boundary_max(*data.grid, H.snapshots[0].p);
      double b = 0;
      for (int i = 0; i < d; ++i) b = std::max(b, boundary_max(*data.grid, H.snapshots[0].B[i]));
      r.B_run = b;
      continue;
    }
    const int k = r.j - 1;
    if (static_cast<std::size_t>(k) + 1 > m) continue;
    std::vector<double> tt(t.begin(), t.begin() + std::min<std::size_t>(m, k + 5));
    if (static_cast<int>(tt.size()) < k + 2) tt.assign(t.begin(), t.begin() + m);
    const auto w = fd_weights(tt, t[0], k);
    double pm = 0, bm = 0;
    for (std::size_t s = 0; s < bnd.size(); ++s) {
      double vp = 0;
      std::vector<double> vb(d, 0.0);
      for (std::size_t i = 0; i < w.size(); ++i) {
        vp += w[i] * nat[i].p[s];
        for (int q = 0; q < d; ++q) vb[q] += w[i] * nat[i].B[q][s];
      }
      pm = std::max(pm, std::abs(vp));
      for (int q = 0; q < d; ++q) bm = std::max(bm, std::abs(vb[q]));
    }
    r.p_run = pm;
    r.B_run = bm;
  }
  return rows;
}

}  // namespace mhdl
