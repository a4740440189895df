#pragma once

#include <array>
#include <memory>
#include <vector>

#include "mhdl/sbp.hpp"
#include "mhdl/types.hpp"

namespace mhdl {

// One logically rectangular patch. Local index = i0 + n0*(i1 + n1*i2).
struct Block {
  int dim = 2;
  std::array<int, 3> n{1, 1, 1};
  std::array<int, 3> stride{1, 1, 1};
  int nloc = 0;
  bool cap = false;                // caps touch the outer boundary at the top of the last axis
  std::vector<int> node;           // local -> global
  std::vector<double> hw;          // tensor product of 1D SBP weights
  std::vector<double> hw_face;     // caps only: weights of the tangential face, per local node (0 off face)
};

// Multi-block "cubed ball": a central cube of half-width a and 2d caps blending the cube faces
// onto the unit sphere (equiangular on the sphere). Shared nodes are stored once.
class Grid {
 public:
  Grid(int dim, int nx, int sbp_order = 6, double core_half_width = 0.5);

  int dim() const { return dim_; }
  int nx() const { return nx_; }
  std::size_t size() const { return ref_[0].size(); }
  const std::vector<Block>& blocks() const { return blocks_; }
  const Sbp& sbp() const { return sbp_; }
  const VectorField& reference() const { return ref_; }
  const std::vector<int>& boundary_nodes() const { return bnd_; }
  const std::vector<int>& interior_nodes() const { return inner_; }
  bool on_boundary(int g) const { return is_bnd_[g] != 0; }
  // index of a global boundary node in boundary_nodes(), -1 otherwise
  int boundary_slot(int g) const { return bslot_[g]; }
  // neighbours of each boundary node along the boundary (by reference position), used for arc fits
  const std::vector<std::vector<int>>& boundary_neighbours() const { return bnbr_; }

 private:
  int dim_;
  int nx_;
  Sbp sbp_;
  std::vector<Block> blocks_;
  VectorField ref_;
  std::vector<int> bnd_, inner_, bslot_;
  std::vector<char> is_bnd_;
  std::vector<std::vector<int>> bnbr_;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_grid(int dim, int nx, int sbp_order = 6) {
  return std::make_shared<const Grid>(dim, nx, sbp_order);
}

}  // namespace mhdl
