#pragma once

#include <vector>

#include "mhdl/grid.hpp"
#include "mhdl/types.hpp"

namespace mhdl {

// Derivatives with respect to the reference labels y, and the pointwise chain rule built on them.
// Uses the algebraic adjugate of the reference block Jacobian, so linear functions of y
// (and hence affine flow maps) are differentiated exactly. Time independent: commuting
// it with time differentiation at fixed label is exact, which the commutator checks rely on.
class ReferenceCalculus {
 public:
  explicit ReferenceCalculus(const Grid& grid);

  const Grid& grid() const { return *g_; }
  int dim() const { return d_; }
  std::size_t size() const { return g_->size(); }
  const ScalarField& weights() const { return W_; }

  // out[a] = d f / d y^a
  VectorField label_gradient(const ScalarField& f) const;

  // Flow map Jacobian jac[i*d+a] = d x^i / d y^a and its inverse inv[a*d+i] = d y^a / d x^i.
  struct Chart {
    std::vector<ScalarField> jac, inv;
    ScalarField det;
  };
  Chart chart(const VectorField& x) const;

  // Eulerian gradient from label derivatives: out[i] = sum_a inv[a*d+i] d f/d y^a
  VectorField gradient(const Chart& c, const ScalarField& f) const;
  ScalarField divergence(const Chart& c, const VectorField& X) const;

 private:
  const Grid* g_;
  int d_;
  std::vector<std::vector<double>> adj_;  // per block, adj(dy/ds) at [(l*d + c)*d + a] for ds^c/dy^a * det
  ScalarField W_;
};

}  // namespace mhdl
