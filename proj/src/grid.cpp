#include "mhdl/grid.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>

namespace mhdl {

namespace {

using Point = std::array<double, 3>;
using Mapping = std::function<Point(const std::array<double, 3>&)>;

double det3(const double m[3][3], int d) {
  if (d == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

// sign of det d(position)/d(logical) at the patch centre
double orientation(const Mapping& f, int d) {
  const double e = 1e-6;
  double m[3][3] = {};
  for (int a = 0; a < d; ++a) {
    std::array<double, 3> s{0.5, 0.5, 0.5}, t{0.5, 0.5, 0.5};
    s[a] += e;
    t[a] -= e;
    Point p = f(s), q = f(t);
    for (int i = 0; i < d; ++i) m[i][a] = (p[i] - q[i]) / (2 * e);
  }
  return det3(m, d);
}

}  // namespace

Grid::Grid(int dim, int nx, int sbp_order, double a) : dim_(dim), nx_(nx), sbp_(sbp_order) {
  if (dim != 2 && dim != 3) throw Error(ErrorKind::Config, "grid: dimension must be 2 or 3");
  if (nx % 4 != 0) throw Error(ErrorKind::Config, "grid: nx must be a multiple of 4");
  const int nc = nx / 2;
  if (nc + 1 < sbp_.min_points())
    throw Error(ErrorKind::Config, "grid: nx=" + std::to_string(nx) + " too coarse for the SBP closures (need nx >= " +
                                       std::to_string(2 * (sbp_.min_points() - 1)) + ")");
  // radial cap resolution matches the core spacing unless the closures need more points
  const int nr = std::max(nx / 4, sbp_.min_points() - 1);

  struct Patch {
    std::array<int, 3> n{1, 1, 1};
    Mapping map;  // logical coordinates in [0,1]^d
    bool cap;
  };
  std::vector<Patch> patches;

  {
    Patch c;
    for (int k = 0; k < dim; ++k) c.n[k] = nc + 1;
    c.cap = false;
    c.map = [a, dim](const std::array<double, 3>& s) {
      Point p{0, 0, 0};
      for (int k = 0; k < dim; ++k) p[k] = a * (2 * s[k] - 1);
      return p;
    };
    patches.push_back(c);
  }
  for (int k = 0; k < dim; ++k) {
    for (int sg : {-1, 1}) {
      std::vector<int> tang;
      for (int j = 0; j < dim; ++j)
        if (j != k) tang.push_back(j);
      auto build = [=](bool flip) {
        return [=](const std::array<double, 3>& s) {
          Point pin{0, 0, 0}, dir{0, 0, 0};
          pin[k] = sg * a;
          dir[k] = sg;
          for (std::size_t t = 0; t < tang.size(); ++t) {
            double xi = 2 * s[t] - 1;
            if (t == 0 && flip) xi = -xi;
            pin[tang[t]] = a * xi;
            dir[tang[t]] = std::tan(std::numbers::pi / 4 * xi);
          }
          double nd = 0;
          for (int i = 0; i < dim; ++i) nd += dir[i] * dir[i];
          nd = std::sqrt(nd);
          const double eta = s[dim - 1];
          Point p{0, 0, 0};
          for (int i = 0; i < dim; ++i) p[i] = (1 - eta) * pin[i] + eta * dir[i] / nd;
          return p;
        };
      };
      Patch c;
      for (int t = 0; t < dim - 1; ++t) c.n[t] = nc + 1;
      c.n[dim - 1] = nr + 1;
      c.cap = true;
      c.map = build(false);
      if (orientation(c.map, dim) < 0) c.map = build(true);
      patches.push_back(c);
    }
  }

  std::map<std::array<long long, 3>, int> index;
  ref_.assign(dim, {});
  for (const Patch& pt : patches) {
    Block b;
    b.dim = dim;
    b.n = pt.n;
    b.stride = {1, pt.n[0], pt.n[0] * pt.n[1]};
    b.nloc = pt.n[0] * pt.n[1] * pt.n[2];
    b.cap = pt.cap;
    b.node.resize(b.nloc);
    b.hw.resize(b.nloc);
    if (b.cap) b.hw_face.assign(b.nloc, 0.0);
    for (int l = 0; l < b.nloc; ++l) {
      std::array<int, 3> ix{l % pt.n[0], (l / pt.n[0]) % pt.n[1], l / (pt.n[0] * pt.n[1])};
      std::array<double, 3> s{0, 0, 0};
      double w = 1.0;
      for (int q = 0; q < dim; ++q) {
        s[q] = static_cast<double>(ix[q]) / (pt.n[q] - 1);
        w *= sbp_.weight(ix[q], pt.n[q]);
      }
      b.hw[l] = w;
      if (b.cap && ix[dim - 1] == pt.n[dim - 1] - 1) {
        double wf = 1.0;
        for (int q = 0; q < dim - 1; ++q) wf *= sbp_.weight(ix[q], pt.n[q]);
        b.hw_face[l] = wf;
      }
      Point p = pt.map(s);
      if (b.cap && ix[dim - 1] == pt.n[dim - 1] - 1) {
        // snap exactly onto the sphere
        double r = 0;
        for (int i = 0; i < dim; ++i) r += p[i] * p[i];
        r = std::sqrt(r);
        for (int i = 0; i < dim; ++i) p[i] /= r;
      }
      std::array<long long, 3> key{0, 0, 0};
      for (int i = 0; i < dim; ++i) key[i] = std::llround(p[i] * 1e9);
      auto it = index.find(key);
      int g;
      if (it == index.end()) {
        g = static_cast<int>(ref_[0].size());
        index.emplace(key, g);
        for (int i = 0; i < dim; ++i) ref_[i].push_back(p[i]);
      } else {
        g = it->second;
      }
      b.node[l] = g;
    }
    blocks_.push_back(std::move(b));
  }

  const std::size_t n = ref_[0].size();
  is_bnd_.assign(n, 0);
  for (const Block& b : blocks_) {
    if (!b.cap) continue;
    for (int l = 0; l < b.nloc; ++l)
      if (b.hw_face[l] > 0) is_bnd_[b.node[l]] = 1;
  }
  bslot_.assign(n, -1);
  for (std::size_t g = 0; g < n; ++g) {
    if (is_bnd_[g]) {
      bslot_[g] = static_cast<int>(bnd_.size());
      bnd_.push_back(static_cast<int>(g));
    } else {
      inner_.push_back(static_cast<int>(g));
    }
  }

  bnbr_.assign(bnd_.size(), {});
  if (dim == 2) {
    std::vector<int> order(bnd_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    auto ang = [&](int s) { return std::atan2(ref_[1][bnd_[s]], ref_[0][bnd_[s]]); };
    std::sort(order.begin(), order.end(), [&](int p, int q) { return ang(p) < ang(q); });
    const int m = static_cast<int>(order.size());
    for (int i = 0; i < m; ++i) {
      bnbr_[order[i]] = {bnd_[order[(i + m - 1) % m]], bnd_[order[(i + 1) % m]]};
    }
  } else {
    const std::size_t m = bnd_.size();
    for (std::size_t s = 0; s < m; ++s) {
      std::vector<std::pair<double, int>> dist;
      dist.reserve(m);
      for (std::size_t t = 0; t < m; ++t) {
        if (t == s) continue;
        double d2 = 0;
        for (int i = 0; i < 3; ++i) {
          double e = ref_[i][bnd_[s]] - ref_[i][bnd_[t]];
          d2 += e * e;
        }
        dist.emplace_back(d2, bnd_[t]);
      }
      std::partial_sort(dist.begin(), dist.begin() + 6, dist.end());
      for (int k = 0; k < 6; ++k) bnbr_[s].push_back(dist[k].second);
    }
  }
}

}  // namespace mhdl
