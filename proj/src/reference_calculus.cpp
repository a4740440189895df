#include "mhdl/reference_calculus.hpp"

#include <cmath>
#include <string>

namespace mhdl {

namespace {

// inverse of a small dense matrix m (row-major, size d); returns determinant
double invert(const double* m, double* inv, int d) {
  if (d == 2) {
    const double det = m[0] * m[3] - m[1] * m[2];
    inv[0] = m[3] / det;
    inv[1] = -m[1] / det;
    inv[2] = -m[2] / det;
    inv[3] = m[0] / det;
    return det;
  }
  const double c00 = m[4] * m[8] - m[5] * m[7], c01 = m[5] * m[6] - m[3] * m[8], c02 = m[3] * m[7] - m[4] * m[6];
  const double det = m[0] * c00 + m[1] * c01 + m[2] * c02;
  inv[0] = c00 / det;
  inv[1] = (m[2] * m[7] - m[1] * m[8]) / det;
  inv[2] = (m[1] * m[5] - m[2] * m[4]) / det;
  inv[3] = c01 / det;
  inv[4] = (m[0] * m[8] - m[2] * m[6]) / det;
  inv[5] = (m[2] * m[3] - m[0] * m[5]) / det;
  inv[6] = c02 / det;
  inv[7] = (m[1] * m[6] - m[0] * m[7]) / det;
  inv[8] = (m[0] * m[4] - m[1] * m[3]) / det;
  return det;
}

}  // namespace

ReferenceCalculus::ReferenceCalculus(const Grid& grid) : g_(&grid), d_(grid.dim()) {
  const auto& y = grid.reference();
  W_.assign(grid.size(), 0.0);
  for (const Block& bl : grid.blocks()) {
    std::vector<double> adj(static_cast<std::size_t>(bl.nloc) * d_ * d_);
    // R[i][c] = d y^i / d s^c
    std::vector<std::vector<double>> loc(d_, std::vector<double>(bl.nloc)), R(d_ * d_, std::vector<double>(bl.nloc));
    for (int i = 0; i < d_; ++i)
      for (int l = 0; l < bl.nloc; ++l) loc[i][l] = y[i][bl.node[l]];
    for (int i = 0; i < d_; ++i)
      for (int c = 0; c < d_; ++c) {
        const int s = bl.stride[c], n = bl.n[c];
        for (int l = 0; l < bl.nloc; ++l)
          if ((l / s) % n == 0) grid.sbp().apply(loc[i].data() + l, s, n, R[i * d_ + c].data() + l, s);
      }
    for (int l = 0; l < bl.nloc; ++l) {
      double m[9], inv[9];
      for (int i = 0; i < d_; ++i)
        for (int c = 0; c < d_; ++c) m[i * d_ + c] = R[i * d_ + c][l];
      const double det = invert(m, inv, d_);
      // inv[c*d + a] = d s^c / d y^a
      for (int c = 0; c < d_; ++c)
        for (int a = 0; a < d_; ++a) adj[(l * d_ + c) * d_ + a] = inv[c * d_ + a] * det;
      W_[bl.node[l]] += bl.hw[l] * det;
    }
    adj_.push_back(std::move(adj));
  }
}

VectorField ReferenceCalculus::label_gradient(const ScalarField& f) const {
  VectorField out = zero_vector(d_, size());
  for (std::size_t b = 0; b < g_->blocks().size(); ++b) {
    const Block& bl = g_->blocks()[b];
    std::vector<double> loc(bl.nloc), dd(static_cast<std::size_t>(bl.nloc) * d_);
    for (int l = 0; l < bl.nloc; ++l) loc[l] = f[bl.node[l]];
    for (int c = 0; c < d_; ++c) {
      const int s = bl.stride[c], n = bl.n[c];
      for (int l = 0; l < bl.nloc; ++l)
        if ((l / s) % n == 0) g_->sbp().apply(loc.data() + l, s, n, dd.data() + c * bl.nloc + l, s);
    }
    const auto& adj = adj_[b];
    for (int l = 0; l < bl.nloc; ++l)
      for (int a = 0; a < d_; ++a) {
        double acc = 0;
        for (int c = 0; c < d_; ++c) acc += adj[(l * d_ + c) * d_ + a] * dd[c * bl.nloc + l];
        out[a][bl.node[l]] += bl.hw[l] * acc;
      }
  }
  for (int a = 0; a < d_; ++a)
    for (std::size_t n = 0; n < size(); ++n) out[a][n] /= W_[n];
  return out;
}

ReferenceCalculus::Chart ReferenceCalculus::chart(const VectorField& x) const {
  Chart c;
  c.jac.assign(d_ * d_, ScalarField(size()));
  c.inv.assign(d_ * d_, ScalarField(size()));
  c.det.assign(size(), 0.0);
  for (int i = 0; i < d_; ++i) {
    auto gi = label_gradient(x[i]);
    for (int a = 0; a < d_; ++a) c.jac[i * d_ + a] = std::move(gi[a]);
  }
  for (std::size_t n = 0; n < size(); ++n) {
    double m[9], inv[9];
    for (int k = 0; k < d_ * d_; ++k) m[k] = c.jac[k][n];
    c.det[n] = invert(m, inv, d_);
    for (int k = 0; k < d_ * d_; ++k) c.inv[k][n] = inv[k];
  }
  return c;
}

VectorField ReferenceCalculus::gradient(const Chart& c, const ScalarField& f) const {
  const auto lg = label_gradient(f);
  VectorField out = zero_vector(d_, size());
  for (std::size_t n = 0; n < size(); ++n)
    for (int i = 0; i < d_; ++i) {
      double acc = 0;
      for (int a = 0; a < d_; ++a) acc += c.inv[a * d_ + i][n] * lg[a][n];
      out[i][n] = acc;
    }
  return out;
}

ScalarField ReferenceCalculus::divergence(const Chart& c, const VectorField& X) const {
  ScalarField out(size(), 0.0);
  for (int i = 0; i < d_; ++i) {
    const auto lg = label_gradient(X[i]);
    for (std::size_t n = 0; n < size(); ++n)
      for (int a = 0; a < d_; ++a) out[n] += c.inv[a * d_ + i][n] * lg[a][n];
  }
  return out;
}

}  // namespace mhdl
