#pragma once

#include <Eigen/Sparse>
#include <memory>
#include <string>
#include <vector>

#include "mhdl/frame.hpp"
#include "mhdl/types.hpp"

namespace mhdl {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Sparse matrices of the chain-rule (conservative = false) or conservative derivative, one per axis.
std::vector<SpMat> derivative_matrices(const Frame& frame, bool conservative);

// Partial derivative d_{s_1} ... d_{s_m} f in the Eulerian frame (chain rule applied m times).
ScalarField eulerian_derivative(const Frame& frame, const ScalarField& f, const std::vector<int>& multi_index);

struct VectorCalculus {
  ScalarField div;
  std::vector<ScalarField> curl;  // entries (i,j) with i<j of d_i X_j - d_j X_i; one entry (scalar) in 2D
};
VectorCalculus vector_calculus(const Frame& frame, const VectorField& X);

ScalarField laplacian(const Frame& frame, const ScalarField& f);

enum class Region { Interior, Boundary };
double integrate(const Frame& frame, const ScalarField& f, Region region = Region::Interior);
// outward unit normal and length/area weight of each boundary slot
VectorField boundary_normals(const Frame& frame);
ScalarField boundary_weights(const Frame& frame);

enum class BoundaryKind { Dirichlet, Neumann };
// Standard: div_cons(grad f); Projection: div(grad_cons f). The second pairs with the
// conservative pressure gradient of the momentum equation.
enum class LaplacianForm { Standard, Projection };

struct EllipticProblem {
  ScalarField rhs;               // target value of the Laplacian at every node
  BoundaryKind bc = BoundaryKind::Dirichlet;
  ScalarField boundary;          // Dirichlet values or outward normal flux, per boundary slot (empty = 0)
  double tol = 1e-10;            // relative residual
  int max_iter = 2000;
};

struct EllipticResult {
  ScalarField solution;
  int iterations = 0;
  double relative_residual = 0.0;
  std::vector<double> history;
  double compatibility_shift = 0.0;  // Neumann only: constant removed from rhs
};

// Preconditioned conjugate gradients on the symmetric weighted form
//   A = sum_i G_i^T W G_i  (- W Laplacian + boundary flux),
// Dirichlet rows eliminated, Neumann applied weakly through the boundary flux.
class PoissonSolver {
 public:
  explicit PoissonSolver(const Frame& frame, LaplacianForm form = LaplacianForm::Standard);
  // reuse the factorization of an earlier solver as preconditioner (same grid, nearby geometry);
  // only the factorization is shared, the source's frame may be gone
  PoissonSolver(const Frame& frame, LaplacianForm form, const PoissonSolver& preconditioner_source);

  EllipticResult solve(const EllipticProblem& problem) const;

  const SpMat& weighted_operator() const { return A_; }  // full A, all nodes
  // Laplacian restricted to interior nodes for fields vanishing on the boundary
  SpMat interior_laplacian() const;
  // apply the discrete Laplacian that the solver inverts
  ScalarField apply(const ScalarField& f) const;
  bool factorization_is_fresh() const { return fresh_; }

  struct Factor;

 private:
  void assemble();
  std::shared_ptr<const Factor> factor(BoundaryKind bc) const;

  const Frame* frame_;
  LaplacianForm form_;
  std::vector<SpMat> G_;
  SpMat A_, AII_, AIB_;
  std::vector<int> pos_;  // global -> interior index or -1
  mutable std::shared_ptr<const Factor> dir_, neu_;
  mutable bool fresh_ = true;
};

}  // namespace mhdl
