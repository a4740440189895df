#pragma once

#include <cmath>
#include <type_traits>
#include <vector>

#include "mhdl/grid.hpp"
#include "mhdl/taylor.hpp"

namespace mhdl {

// Discrete Eulerian frame of a flow map on the multi-block grid.
//
// Per block, with logical derivatives D_a and metric cofactors C^a_i = J da^a/dx^i:
//   chain-rule derivative     grad_i f = W^{-1} sum_b H_b sum_a C^a_i D_a f
//   conservative derivative   cons_i f = W^{-1} sum_b H_b sum_a D_a (C^a_i f)
// with node weights W = sum_b H_b J_b. The two are W-adjoint up to the outer boundary term,
// which is what makes the discrete energy identities exact.
template <class T>
class FrameT {
 public:
  using Field = std::vector<T>;
  using VField = std::vector<Field>;

  FrameT(const Grid& grid, const VField& x) : g_(&grid), d_(grid.dim()) { build(x); }

  const Grid& grid() const { return *g_; }
  int dim() const { return d_; }
  std::size_t size() const { return g_->size(); }
  const Field& weights() const { return W_; }
  const std::vector<T>& block_cofactors(int b) const { return C_[b]; }
  const std::vector<T>& block_jacobian(int b) const { return J_[b]; }
  // outward area vector per boundary slot (sum of face weight times face cofactor)
  const VField& boundary_area() const { return area_; }

  void block_derivative(int b, int axis, const T* floc, T* out) const {
    const Block& bl = g_->blocks()[b];
    const int s = bl.stride[axis], n = bl.n[axis];
    for (int l = 0; l < bl.nloc; ++l) {
      if ((l / s) % n != 0) continue;
      g_->sbp().apply(floc + l, s, n, out + l, s);
    }
  }

  VField grad(const Field& f) const {
    VField out(d_, Field(size(), T(0.0)));
    for (std::size_t b = 0; b < g_->blocks().size(); ++b) {
      const Block& bl = g_->blocks()[b];
      std::vector<T> loc(bl.nloc), dd(static_cast<std::size_t>(d_) * bl.nloc);
      gather(bl, f, loc.data());
      for (int a = 0; a < d_; ++a) block_derivative(static_cast<int>(b), a, loc.data(), dd.data() + a * bl.nloc);
      const auto& C = C_[b];
      for (int l = 0; l < bl.nloc; ++l) {
        const int gi = bl.node[l];
        for (int i = 0; i < d_; ++i) {
          T acc = C[(l * d_ + 0) * d_ + i] * dd[l];
          for (int a = 1; a < d_; ++a) acc = acc + C[(l * d_ + a) * d_ + i] * dd[a * bl.nloc + l];
          out[i][gi] = out[i][gi] + acc * bl.hw[l];
        }
      }
    }
    for (int i = 0; i < d_; ++i)
      for (std::size_t n = 0; n < size(); ++n) out[i][n] = out[i][n] * Winv_[n];
    return out;
  }

  Field div(const VField& X) const {
    Field out(size(), T(0.0));
    for (std::size_t b = 0; b < g_->blocks().size(); ++b) {
      const Block& bl = g_->blocks()[b];
      std::vector<T> loc(bl.nloc), dd(bl.nloc), acc(bl.nloc, T(0.0));
      const auto& C = C_[b];
      for (int i = 0; i < d_; ++i) {
        gather(bl, X[i], loc.data());
        for (int a = 0; a < d_; ++a) {
          block_derivative(static_cast<int>(b), a, loc.data(), dd.data());
          for (int l = 0; l < bl.nloc; ++l) acc[l] = acc[l] + C[(l * d_ + a) * d_ + i] * dd[l];
        }
      }
      for (int l = 0; l < bl.nloc; ++l) out[bl.node[l]] = out[bl.node[l]] + acc[l] * bl.hw[l];
    }
    for (std::size_t n = 0; n < size(); ++n) out[n] = out[n] * Winv_[n];
    return out;
  }

  VField grad_cons(const Field& f) const {
    VField out(d_, Field(size(), T(0.0)));
    for (std::size_t b = 0; b < g_->blocks().size(); ++b) {
      const Block& bl = g_->blocks()[b];
      std::vector<T> loc(bl.nloc), v(bl.nloc), dd(bl.nloc), acc(bl.nloc);
      gather(bl, f, loc.data());
      const auto& C = C_[b];
      for (int i = 0; i < d_; ++i) {
        std::fill(acc.begin(), acc.end(), T(0.0));
        for (int a = 0; a < d_; ++a) {
          for (int l = 0; l < bl.nloc; ++l) v[l] = C[(l * d_ + a) * d_ + i] * loc[l];
          block_derivative(static_cast<int>(b), a, v.data(), dd.data());
          for (int l = 0; l < bl.nloc; ++l) acc[l] = acc[l] + dd[l];
        }
        for (int l = 0; l < bl.nloc; ++l) out[i][bl.node[l]] = out[i][bl.node[l]] + acc[l] * bl.hw[l];
      }
    }
    for (int i = 0; i < d_; ++i)
      for (std::size_t n = 0; n < size(); ++n) out[i][n] = out[i][n] * Winv_[n];
    return out;
  }

  Field div_cons(const VField& X) const {
    Field out(size(), T(0.0));
    for (std::size_t b = 0; b < g_->blocks().size(); ++b) {
      const Block& bl = g_->blocks()[b];
      std::vector<std::vector<T>> loc(d_, std::vector<T>(bl.nloc));
      for (int i = 0; i < d_; ++i) gather(bl, X[i], loc[i].data());
      std::vector<T> v(bl.nloc), dd(bl.nloc), acc(bl.nloc, T(0.0));
      const auto& C = C_[b];
      for (int a = 0; a < d_; ++a) {
        for (int l = 0; l < bl.nloc; ++l) {
          T s = C[(l * d_ + a) * d_ + 0] * loc[0][l];
          for (int i = 1; i < d_; ++i) s = s + C[(l * d_ + a) * d_ + i] * loc[i][l];
          v[l] = s;
        }
        block_derivative(static_cast<int>(b), a, v.data(), dd.data());
        for (int l = 0; l < bl.nloc; ++l) acc[l] = acc[l] + dd[l];
      }
      for (int l = 0; l < bl.nloc; ++l) out[bl.node[l]] = out[bl.node[l]] + acc[l] * bl.hw[l];
    }
    for (std::size_t n = 0; n < size(); ++n) out[n] = out[n] * Winv_[n];
    return out;
  }

  Field laplacian(const Field& f) const { return div_cons(grad(f)); }

  T integrate(const Field& f) const {
    // pairwise over nodes for reproducible sums
    std::vector<T> prod(size());
    for (std::size_t n = 0; n < size(); ++n) prod[n] = W_[n] * f[n];
    return tree_sum(prod, 0, prod.size());
  }

 private:
  static T tree_sum(const std::vector<T>& v, std::size_t lo, std::size_t hi) {
    if (hi - lo <= 8) {
      T s(0.0);
      for (std::size_t i = lo; i < hi; ++i) s = s + v[i];
      return s;
    }
    std::size_t mid = lo + (hi - lo) / 2;
    return tree_sum(v, lo, mid) + tree_sum(v, mid, hi);
  }

  static void gather(const Block& bl, const Field& f, T* loc) {
    for (int l = 0; l < bl.nloc; ++l) loc[l] = f[bl.node[l]];
  }

  void build(const VField& x) {
    const auto& blocks = g_->blocks();
    C_.resize(blocks.size());
    J_.resize(blocks.size());
    W_.assign(size(), T(0.0));
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const Block& bl = blocks[b];
      const int nl = bl.nloc;
      // Dx[a][i][l] = D_a x^i
      std::vector<std::vector<std::vector<T>>> Dx(d_, std::vector<std::vector<T>>(d_, std::vector<T>(nl)));
      std::vector<std::vector<T>> xl(d_, std::vector<T>(nl));
      for (int i = 0; i < d_; ++i) {
        gather(bl, x[i], xl[i].data());
        for (int a = 0; a < d_; ++a) block_derivative(static_cast<int>(b), a, xl[i].data(), Dx[a][i].data());
      }
      auto& C = C_[b];
      auto& J = J_[b];
      C.assign(static_cast<std::size_t>(nl) * d_ * d_, T(0.0));
      J.assign(nl, T(0.0));
      if (d_ == 2) {
        for (int l = 0; l < nl; ++l) {
          C[(l * 2 + 0) * 2 + 0] = Dx[1][1][l];
          C[(l * 2 + 0) * 2 + 1] = -Dx[1][0][l];
          C[(l * 2 + 1) * 2 + 0] = -Dx[0][1][l];
          C[(l * 2 + 1) * 2 + 1] = Dx[0][0][l];
          J[l] = Dx[0][0][l] * Dx[1][1][l] - Dx[1][0][l] * Dx[0][1][l];
        }
      } else {
        // conservative curl form: C^a_n = D_c(x^l D_b x^m) - D_b(x^l D_c x^m), (a,b,c) and (n,m,l) cyclic
        std::vector<T> v(nl), dv(nl);
        for (int a = 0; a < 3; ++a) {
          const int bb = (a + 1) % 3, cc = (a + 2) % 3;
          for (int nn = 0; nn < 3; ++nn) {
            const int m = (nn + 1) % 3, ll = (nn + 2) % 3;
            for (int l = 0; l < nl; ++l) v[l] = xl[ll][l] * Dx[bb][m][l];
            block_derivative(static_cast<int>(b), cc, v.data(), dv.data());
            for (int l = 0; l < nl; ++l) C[(l * 3 + a) * 3 + nn] = dv[l];
            for (int l = 0; l < nl; ++l) v[l] = xl[ll][l] * Dx[cc][m][l];
            block_derivative(static_cast<int>(b), bb, v.data(), dv.data());
            for (int l = 0; l < nl; ++l) C[(l * 3 + a) * 3 + nn] = C[(l * 3 + a) * 3 + nn] - dv[l];
          }
        }
        for (int l = 0; l < nl; ++l) {
          auto m = [&](int i, int a) { return Dx[a][i][l]; };
          J[l] = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
                 m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
        }
      }
      for (int l = 0; l < nl; ++l) W_[bl.node[l]] = W_[bl.node[l]] + J[l] * bl.hw[l];
    }
    Winv_.resize(size());
    for (std::size_t n = 0; n < size(); ++n) Winv_[n] = T(1.0) / W_[n];

    const auto& bnd = g_->boundary_nodes();
    area_.assign(d_, Field(bnd.size(), T(0.0)));
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const Block& bl = blocks[b];
      if (!bl.cap) continue;
      const auto& C = C_[b];
      for (int l = 0; l < bl.nloc; ++l) {
        if (bl.hw_face[l] == 0.0) continue;
        const int s = g_->boundary_slot(bl.node[l]);
        for (int i = 0; i < d_; ++i) area_[i][s] = area_[i][s] + C[(l * d_ + (d_ - 1)) * d_ + i] * bl.hw_face[l];
      }
    }
  }

  const Grid* g_;
  int d_;
  std::vector<std::vector<T>> C_, J_;
  Field W_, Winv_;
  VField area_;
};

using Frame = FrameT<double>;
using JetFrame = FrameT<Jet>;

}  // namespace mhdl
