#include "mhdl/numerics.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>

namespace mhdl {

std::vector<SpMat> derivative_matrices(const Frame& frame, bool conservative) {
  const Grid& g = frame.grid();
  const int d = g.dim();
  const std::size_t n = g.size();
  std::vector<std::vector<Eigen::Triplet<double>>> trip(d);
  const auto& W = frame.weights();
  for (std::size_t b = 0; b < g.blocks().size(); ++b) {
    const Block& bl = g.blocks()[b];
    const auto& C = frame.block_cofactors(static_cast<int>(b));
    for (int a = 0; a < d; ++a) {
      const int s = bl.stride[a], m = bl.n[a];
      for (int l = 0; l < bl.nloc; ++l) {
        const int idx = (l / s) % m;
        const int row = bl.node[l];
        const double scale = bl.hw[l] / W[row];
        for (const auto& [j, c] : g.sbp().row(idx, m)) {
          const int lj = l + (j - idx) * s;
          const int col = bl.node[lj];
          for (int i = 0; i < d; ++i) {
            const double cof = conservative ? C[(lj * d + a) * d + i] : C[(l * d + a) * d + i];
            trip[i].emplace_back(row, col, scale * c * cof);
          }
        }
      }
    }
  }
  std::vector<SpMat> out(d, SpMat(n, n));
  for (int i = 0; i < d; ++i) out[i].setFromTriplets(trip[i].begin(), trip[i].end());
  return out;
}

ScalarField eulerian_derivative(const Frame& frame, const ScalarField& f, const std::vector<int>& multi_index) {
  if (multi_index.size() > 4) throw Error(ErrorKind::Range, "eulerian_derivative: at most four derivatives");
  ScalarField out = f;
  for (auto it = multi_index.rbegin(); it != multi_index.rend(); ++it) {
    if (*it < 0 || *it >= frame.dim()) throw Error(ErrorKind::Range, "eulerian_derivative: bad axis");
    out = frame.grad(out)[*it];
  }
  return out;
}

VectorCalculus vector_calculus(const Frame& frame, const VectorField& X) {
  const int d = frame.dim();
  VectorCalculus r;
  r.div = frame.div(X);
  std::vector<VectorField> grads;
  for (int j = 0; j < d; ++j) grads.push_back(frame.grad(X[j]));
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      ScalarField c(frame.size());
      for (std::size_t n = 0; n < c.size(); ++n) c[n] = grads[j][i][n] - grads[i][j][n];
      r.curl.push_back(std::move(c));
    }
  return r;
}

ScalarField laplacian(const Frame& frame, const ScalarField& f) { return frame.laplacian(f); }

VectorField boundary_normals(const Frame& frame) {
  const int d = frame.dim();
  VectorField n = frame.boundary_area();
  for (std::size_t s = 0; s < n[0].size(); ++s) {
    double a = 0;
    for (int i = 0; i < d; ++i) a += n[i][s] * n[i][s];
    a = std::sqrt(a);
    for (int i = 0; i < d; ++i) n[i][s] /= a;
  }
  return n;
}

ScalarField boundary_weights(const Frame& frame) {
  const auto& A = frame.boundary_area();
  ScalarField w(A[0].size());
  for (std::size_t s = 0; s < w.size(); ++s) {
    double a = 0;
    for (const auto& c : A) a += c[s] * c[s];
    w[s] = std::sqrt(a);
  }
  return w;
}

double integrate(const Frame& frame, const ScalarField& f, Region region) {
  if (region == Region::Interior) return frame.integrate(f);
  const auto& bnd = frame.grid().boundary_nodes();
  const auto w = boundary_weights(frame);
  ScalarField prod(bnd.size());
  for (std::size_t s = 0; s < bnd.size(); ++s) prod[s] = w[s] * f[bnd[s]];
  return pairwise_sum(prod);
}

// ---------------------------------------------------------------------------

struct PoissonSolver::Factor {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool singular = false;
};

PoissonSolver::PoissonSolver(const Frame& frame, LaplacianForm form) : frame_(&frame), form_(form) { assemble(); }

PoissonSolver::PoissonSolver(const Frame& frame, LaplacianForm form, const PoissonSolver& src)
    : frame_(&frame), form_(form) {
  assemble();
  if (src.A_.rows() == A_.rows() && src.form_ == form) {
    dir_ = src.dir_;
    neu_ = src.neu_;
    fresh_ = false;
  }
}

void PoissonSolver::assemble() {
  const Grid& g = frame_->grid();
  const std::size_t n = g.size();
  G_ = derivative_matrices(*frame_, form_ == LaplacianForm::Projection);
  Eigen::SparseMatrix<double> A(n, n);
  const auto& W = frame_->weights();
  Eigen::VectorXd w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = W[i];
  for (const auto& Gi : G_) {
    Eigen::SparseMatrix<double> Gc = Gi;
    Eigen::SparseMatrix<double> WG = w.asDiagonal() * Gc;
    A += Eigen::SparseMatrix<double>(Gc.transpose()) * WG;
  }
  A.prune(0.0);
  A_ = A;

  pos_.assign(n, -1);
  const auto& inner = g.interior_nodes();
  for (std::size_t k = 0; k < inner.size(); ++k) pos_[inner[k]] = static_cast<int>(k);
  std::vector<Eigen::Triplet<double>> tii, tib;
  for (int r = 0; r < A_.outerSize(); ++r) {
    if (pos_[r] < 0) continue;
    for (SpMat::InnerIterator it(A_, r); it; ++it) {
      const int c = static_cast<int>(it.col());
      if (pos_[c] >= 0)
        tii.emplace_back(pos_[r], pos_[c], it.value());
      else
        tib.emplace_back(pos_[r], g.boundary_slot(c), it.value());
    }
  }
  AII_.resize(inner.size(), inner.size());
  AII_.setFromTriplets(tii.begin(), tii.end());
  AIB_.resize(inner.size(), g.boundary_nodes().size());
  AIB_.setFromTriplets(tib.begin(), tib.end());
}

std::shared_ptr<const PoissonSolver::Factor> PoissonSolver::factor(BoundaryKind bc) const {
  auto& slot = bc == BoundaryKind::Dirichlet ? dir_ : neu_;
  if (slot) return slot;
  auto f = std::make_shared<Factor>();
  Eigen::SparseMatrix<double> M = bc == BoundaryKind::Dirichlet ? Eigen::SparseMatrix<double>(AII_) : Eigen::SparseMatrix<double>(A_);
  if (bc == BoundaryKind::Neumann) {
    // constants span the kernel; a small shift makes the factorization usable as preconditioner
    const double shift = 1e-8 * M.diagonal().mean();
    for (int i = 0; i < M.rows(); ++i) M.coeffRef(i, i) += shift;
    f->singular = true;
  }
  f->ldlt.compute(M);
  if (f->ldlt.info() != Eigen::Success) throw Error(ErrorKind::Solver, "poisson: factorization failed");
  slot = f;
  return slot;
}

SpMat PoissonSolver::interior_laplacian() const {
  const auto& inner = frame_->grid().interior_nodes();
  const auto& W = frame_->weights();
  Eigen::VectorXd winv(inner.size());
  for (std::size_t k = 0; k < inner.size(); ++k) winv[k] = -1.0 / W[inner[k]];
  SpMat L = winv.asDiagonal() * AII_;
  return L;
}

ScalarField PoissonSolver::apply(const ScalarField& f) const {
  if (form_ == LaplacianForm::Standard) return frame_->laplacian(f);
  const auto gc = frame_->grad_cons(f);
  return frame_->div(gc);
}

namespace {

struct PcgOutcome {
  int iterations = 0;
  double rel = 0;
  std::vector<double> history;
  bool converged = false;
};

template <class Prec>
PcgOutcome pcg(const SpMat& A, const Eigen::VectorXd& b, Eigen::VectorXd& x, const Prec& prec, double tol, int max_iter,
               bool remove_mean) {
  PcgOutcome o;
  const double bn = b.norm();
  if (bn == 0.0) {
    x.setZero();
    o.converged = true;
    return o;
  }
  Eigen::VectorXd r = b - A * x;
  Eigen::VectorXd z = prec(r);
  if (remove_mean) z.array() -= z.mean();
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  for (int k = 0; k < max_iter; ++k) {
    o.rel = r.norm() / bn;
    o.history.push_back(o.rel);
    if (o.rel <= tol) {
      o.converged = true;
      o.iterations = k;
      return o;
    }
    const Eigen::VectorXd Ap = A * p;
    const double alpha = rz / p.dot(Ap);
    x += alpha * p;
    r -= alpha * Ap;
    z = prec(r);
    if (remove_mean) z.array() -= z.mean();
    const double rz1 = r.dot(z);
    p = z + (rz1 / rz) * p;
    rz = rz1;
  }
  o.rel = r.norm() / bn;
  o.history.push_back(o.rel);
  o.iterations = max_iter;
  o.converged = o.rel <= tol;
  return o;
}

}  // namespace

EllipticResult PoissonSolver::solve(const EllipticProblem& pb) const {
  const Grid& g = frame_->grid();
  const std::size_t n = g.size();
  const auto& bnd = g.boundary_nodes();
  const auto& inner = g.interior_nodes();
  const auto& W = frame_->weights();
  if (pb.rhs.size() != n) throw Error(ErrorKind::Precondition, "poisson: rhs has wrong size");
  ScalarField bval = pb.boundary.empty() ? ScalarField(bnd.size(), 0.0) : pb.boundary;
  if (bval.size() != bnd.size()) throw Error(ErrorKind::Precondition, "poisson: boundary data has wrong size");

  EllipticResult res;
  res.solution.assign(n, 0.0);

  auto run = [&](const SpMat& A, const Eigen::VectorXd& b, Eigen::VectorXd& x, BoundaryKind bc) {
    for (int attempt = 0; attempt < 2; ++attempt) {
      auto F = factor(bc);
      auto prec = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd { return F->ldlt.solve(r); };
      Eigen::VectorXd x0 = x;
      PcgOutcome o = pcg(A, b, x0, prec, pb.tol, fresh_ ? pb.max_iter : std::min(pb.max_iter, 30), bc == BoundaryKind::Neumann);
      if (!o.converged && !fresh_) {
        // stale factorization from another geometry: refactor once and retry
        dir_.reset();
        neu_.reset();
        fresh_ = true;
        continue;
      }
      res.iterations = o.iterations;
      res.relative_residual = o.rel;
      res.history = o.history;
      if (!o.converged)
        throw Error(ErrorKind::Solver, "poisson: no convergence in " + std::to_string(pb.max_iter) +
                                           " iterations, relative residual " + std::to_string(o.rel));
      x = x0;
      return;
    }
  };

  if (pb.bc == BoundaryKind::Dirichlet) {
    Eigen::VectorXd b(inner.size()), vb(bnd.size()), x = Eigen::VectorXd::Zero(inner.size());
    for (std::size_t s = 0; s < bnd.size(); ++s) vb[s] = bval[s];
    for (std::size_t k = 0; k < inner.size(); ++k) b[k] = -W[inner[k]] * pb.rhs[inner[k]];
    b -= AIB_ * vb;
    run(AII_, b, x, BoundaryKind::Dirichlet);
    for (std::size_t k = 0; k < inner.size(); ++k) res.solution[inner[k]] = x[k];
    for (std::size_t s = 0; s < bnd.size(); ++s) res.solution[bnd[s]] = bval[s];
  } else {
    const auto omega = boundary_weights(*frame_);
    double wf = 0, wsum = 0, flux = 0;
    {
      ScalarField a(n), c(n);
      for (std::size_t i = 0; i < n; ++i) {
        a[i] = W[i] * pb.rhs[i];
        c[i] = W[i];
      }
      wf = pairwise_sum(a);
      wsum = pairwise_sum(c);
      ScalarField f(bnd.size());
      for (std::size_t s = 0; s < bnd.size(); ++s) f[s] = omega[s] * bval[s];
      flux = pairwise_sum(f);
    }
    res.compatibility_shift = (wf - flux) / wsum;
    Eigen::VectorXd b(n), x = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = -W[i] * (pb.rhs[i] - res.compatibility_shift);
    for (std::size_t s = 0; s < bnd.size(); ++s) b[bnd[s]] += omega[s] * bval[s];
    run(A_, b, x, BoundaryKind::Neumann);
    double mean = 0;
    for (std::size_t i = 0; i < n; ++i) mean += W[i] * x[i];
    mean /= wsum;
    for (std::size_t i = 0; i < n; ++i) res.solution[i] = x[i] - mean;
  }
  return res;
}

}  // namespace mhdl
