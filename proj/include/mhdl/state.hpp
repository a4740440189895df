#pragma once

#include <vector>

#include "mhdl/grid.hpp"
#include "mhdl/types.hpp"

namespace mhdl {

// (x, u, B, p) over one grid; T = double for states, Jet for Taylor expansions in time.
template <class T>
struct FieldSet {
  std::vector<std::vector<T>> x, u, B;
  std::vector<T> p;
};

struct SimState {
  GridPtr grid;
  double t = 0.0;
  VectorField x, u, B;
  ScalarField p;

  int dim() const { return grid->dim(); }
  std::size_t size() const { return grid->size(); }
  FieldSet<double> fields() const { return {x, u, B, p}; }
};

// identity flow map, fluid at rest
inline SimState rest_state(GridPtr grid) {
  SimState s;
  s.grid = grid;
  s.x = grid->reference();
  s.u = zero_vector(grid->dim(), grid->size());
  s.B = zero_vector(grid->dim(), grid->size());
  s.p.assign(grid->size(), 0.0);
  return s;
}

}  // namespace mhdl
