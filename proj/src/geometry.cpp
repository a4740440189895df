#include "mhdl/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mhdl {

double injectivity_bound(double K0, double l1) {
  const double curv = K0 > 0 ? 1.0 / K0 : std::numeric_limits<double>::infinity();
  return std::min(0.5 * l1, curv);
}

double cutoff(double dist, double d0) {
  const double a = 0.25 * d0, b = 0.5 * d0;
  if (dist <= a) return 1.0;
  if (dist >= b) return 0.0;
  const double s = (b - dist) / (b - a);
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

namespace {

using Vec3 = Eigen::Vector3d;

Vec3 point(const VectorField& x, int d, int node) {
  Vec3 p = Vec3::Zero();
  for (int i = 0; i < d; ++i) p[i] = x[i][node];
  return p;
}

// distance from p to the circle through a, b, c (2D) or sphere through four points (3D);
// falls back to the distance to the nearest node when the fit is degenerate
double fitted_distance(const Vec3& p, const std::vector<Vec3>& pts, int d) {
  const Vec3& o = pts[0];
  const double fallback = (p - o).norm();
  const int m = d;  // equations
  Eigen::MatrixXd M(m, d);
  Eigen::VectorXd r(m);
  for (int k = 1; k <= m; ++k) {
    const Vec3 e = pts[k] - o;
    for (int i = 0; i < d; ++i) M(k - 1, i) = 2.0 * e[i];
    r[k - 1] = pts[k].squaredNorm() - o.squaredNorm();
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (lu.rank() < d || std::abs(lu.determinant()) < 1e-14) return fallback;
  const Eigen::VectorXd c = lu.solve(r);
  Vec3 cc = Vec3::Zero();
  for (int i = 0; i < d; ++i) cc[i] = c[i];
  const double R = (o - cc).norm();
  if (R > 1e6) return fallback;
  return std::abs(R - (p - cc).norm());
}

}  // namespace

GeometryCache compute_geometry(GridPtr grid, const VectorField& x) {
  GeometryCache G;
  G.grid = grid;
  G.d = grid->dim();
  G.x = x;
  const int d = G.d;
  const std::size_t n = grid->size();
  const auto& bnd = grid->boundary_nodes();
  const std::size_t m = bnd.size();
  auto calc = std::make_shared<ReferenceCalculus>(*grid);
  G.calculus = calc;
  G.chart = calc->chart(x);
  for (std::size_t k = 0; k < n; ++k)
    if (!(G.chart.det[k] > 0))
      throw Error(ErrorKind::Orientation, "geometry: non-positive Jacobian " + std::to_string(G.chart.det[k]) +
                                              " at node " + std::to_string(k));

  G.g.assign(d * d, ScalarField(n));
  G.ginv.assign(d * d, ScalarField(n));
  for (std::size_t k = 0; k < n; ++k) {
    Eigen::Matrix3d J = Eigen::Matrix3d::Identity();
    for (int i = 0; i < d; ++i)
      for (int a = 0; a < d; ++a) J(i, a) = G.chart.jac[i * d + a][k];
    const Eigen::MatrixXd gm = (J.transpose() * J).topLeftCorner(d, d);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gm, Eigen::EigenvaluesOnly);
    const double cond = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
    if (!(cond < kConditionLimit))
      throw Error(ErrorKind::Conditioning, "geometry: metric condition number " + std::to_string(cond) + " at node " +
                                               std::to_string(k));
    const Eigen::MatrixXd gi = gm.inverse();
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        G.g[a * d + b][k] = gm(a, b);
        G.ginv[a * d + b][k] = gi(a, b);
      }
  }

  // normal: Eulerian gradient of |y|^2/2, whose label gradient is y itself
  const auto& y = grid->reference();
  G.normal = zero_vector(d, n);
  for (std::size_t k = 0; k < n; ++k) {
    double nn = 0;
    for (int i = 0; i < d; ++i) {
      double acc = 0;
      for (int a = 0; a < d; ++a) acc += G.chart.inv[a * d + i][k] * y[a][k];
      G.normal[i][k] = acc;
      nn += acc * acc;
    }
    nn = std::sqrt(nn);
    for (int i = 0; i < d; ++i) G.normal[i][k] = nn > 0 ? G.normal[i][k] / nn : (i == 0 ? 1.0 : 0.0);
  }

  G.conormal = zero_vector(d, m);
  for (std::size_t s = 0; s < m; ++s)
    for (int a = 0; a < d; ++a) {
      double acc = 0;
      for (int i = 0; i < d; ++i) acc += G.chart.jac[i * d + a][bnd[s]] * G.normal[i][bnd[s]];
      G.conormal[a][s] = acc;
    }

  // unnormalised normal G_i = inv[a][i] y_a; its derivative by the product rule,
  // d_k G_i = inv[a][i] inv[a][k] + y_a d_k inv[a][i], so only the chart inverse is differentiated
  std::vector<VectorField> dinv;
  for (int c = 0; c < d * d; ++c) dinv.push_back(calc->gradient(G.chart, G.chart.inv[c]));
  G.gamma.assign(d * d, ScalarField(m));
  G.theta.assign(d * d, ScalarField(m));
  G.sigma.assign(m, 0.0);
  for (std::size_t s = 0; s < m; ++s) {
    const int k = bnd[s];
    Eigen::Matrix3d gam = Eigen::Matrix3d::Zero(), D = Eigen::Matrix3d::Zero();
    double len = 0;
    for (int i = 0; i < d; ++i) {
      double gi = 0;
      for (int a = 0; a < d; ++a) gi += G.chart.inv[a * d + i][k] * y[a][k];
      len += gi * gi;
    }
    len = std::sqrt(len);
    // D(i, j) = d_i N_j up to the normal part, which the projection removes
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        gam(i, j) = (i == j ? 1.0 : 0.0) - G.normal[i][k] * G.normal[j][k];
        double acc = 0;
        for (int a = 0; a < d; ++a)
          acc += G.chart.inv[a * d + j][k] * G.chart.inv[a * d + i][k] + y[a][k] * dinv[a * d + j][i][k];
        D(i, j) = acc / len;
      }
    // tangential part of the normal's derivative, symmetrised
    Eigen::Matrix3d th = gam * D * gam;
    th = 0.5 * (th + th.transpose());
    double fro = 0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        G.gamma[i * d + j][s] = gam(i, j);
        G.theta[i * d + j][s] = th(i, j);
        fro += th(i, j) * th(i, j);
      }
    G.sigma[s] = th.trace();
    G.curvature_bound = std::max(G.curvature_bound, std::sqrt(fro));
  }

  for (std::size_t s = 0; s < m; ++s)
    for (std::size_t t = s + 1; t < m; ++t)
      G.boundary_diameter = std::max(G.boundary_diameter, (point(x, d, bnd[s]) - point(x, d, bnd[t])).norm());
  G.iota0 = injectivity_bound(G.curvature_bound, G.boundary_diameter);
  G.d0 = std::min(0.5 * G.iota0, 0.25 * (0.5 * G.boundary_diameter));

  // distance: nearest boundary node, refined by a local circle/sphere fit
  const auto& nbr = grid->boundary_neighbours();
  G.dist.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (grid->on_boundary(static_cast<int>(k))) continue;
    const Vec3 p = point(x, d, static_cast<int>(k));
    double best = std::numeric_limits<double>::infinity();
    std::size_t bs = 0;
    for (std::size_t s = 0; s < m; ++s) {
      const double e = (p - point(x, d, bnd[s])).squaredNorm();
      if (e < best) {
        best = e;
        bs = s;
      }
    }
    std::vector<Vec3> pts{point(x, d, bnd[bs])};
    for (int q : nbr[bs]) {
      if (static_cast<int>(pts.size()) == d + 1) break;
      pts.push_back(point(x, d, q));
    }
    G.dist[k] = fitted_distance(p, pts, d);
  }

  G.eta.assign(n, 0.0);
  G.q.assign(d * d, ScalarField(n));
  for (std::size_t k = 0; k < n; ++k) {
    G.eta[k] = cutoff(G.dist[k], G.d0);
    const double e2 = G.eta[k] * G.eta[k];
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) G.q[i * d + j][k] = (i == j ? 1.0 : 0.0) - e2 * G.normal[i][k] * G.normal[j][k];
  }
  return G;
}

MetricRates metric_rates(const GeometryCache& G, const VectorField& u) {
  const int d = G.d;
  const std::size_t n = G.grid->size();
  const auto& bnd = G.grid->boundary_nodes();
  const std::size_t m = bnd.size();
  const auto& calc = *G.calculus;
  std::vector<VectorField> du;  // du[i][a] = d u^i / d y^a
  for (int i = 0; i < d; ++i) du.push_back(calc.label_gradient(u[i]));

  MetricRates r;
  r.dg.assign(d * d, ScalarField(n, 0.0));
  r.dginv.assign(d * d, ScalarField(n, 0.0));
  r.volume_rate.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        double acc = 0;
        for (int i = 0; i < d; ++i) acc += du[i][a][k] * G.chart.jac[i * d + b][k] + G.chart.jac[i * d + a][k] * du[i][b][k];
        r.dg[a * d + b][k] = acc;
      }
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        double acc = 0;
        for (int c = 0; c < d; ++c)
          for (int e = 0; e < d; ++e) acc -= G.ginv[a * d + c][k] * r.dg[c * d + e][k] * G.ginv[e * d + b][k];
        r.dginv[a * d + b][k] = acc;
      }
    double div = 0;
    for (int i = 0; i < d; ++i)
      for (int a = 0; a < d; ++a) div += G.chart.inv[a * d + i][k] * du[i][a][k];
    r.volume_rate[k] = div;
  }

  r.dconormal = zero_vector(d, m);
  r.surface_rate.assign(m, 0.0);
  r.normal_motion_rate.assign(m, 0.0);
  for (std::size_t s = 0; s < m; ++s) {
    const int k = bnd[s];
    double nn = 0;
    for (int c = 0; c < d; ++c)
      for (int e = 0; e < d; ++e) nn += r.dginv[c * d + e][k] * G.conormal[c][s] * G.conormal[e][s];
    for (int a = 0; a < d; ++a) r.dconormal[a][s] = -0.5 * G.conormal[a][s] * nn;
    double sr = 0, un = 0;
    for (int i = 0; i < d; ++i) {
      un += u[i][k] * G.normal[i][k];
      for (int j = 0; j < d; ++j) {
        double dij = 0;  // d_i u_j
        for (int a = 0; a < d; ++a) dij += G.chart.inv[a * d + i][k] * du[j][a][k];
        sr += G.gamma[i * d + j][s] * dij;
      }
    }
    r.surface_rate[s] = sr;
    r.normal_motion_rate[s] = G.sigma[s] * un;
  }
  return r;
}

BoundaryTensor project(const GeometryCache& G, const BoundaryTensor& alpha) {
  if (alpha.rank == 0) return alpha;
  const int d = G.d;
  BoundaryTensor cur = alpha;
  int total = 1;
  for (int r = 0; r < alpha.rank; ++r) total *= d;
  if (static_cast<int>(alpha.comp.size()) != total) throw Error(ErrorKind::Precondition, "project: component count");
  const std::size_t m = alpha.comp.empty() ? 0 : alpha.comp[0].size();
  // contract one slot at a time with gamma
  int stride = total;
  for (int slot = 0; slot < alpha.rank; ++slot) {
    stride /= d;
    BoundaryTensor nxt;
    nxt.rank = alpha.rank;
    nxt.comp.assign(total, ScalarField(m, 0.0));
    for (int c = 0; c < total; ++c) {
      const int i = (c / stride) % d;
      const int base = c - i * stride;
      for (int j = 0; j < d; ++j)
        for (std::size_t s = 0; s < m; ++s) nxt.comp[c][s] += G.gamma[i * d + j][s] * cur.comp[base + j * stride][s];
    }
    cur = std::move(nxt);
  }
  return cur;
}

std::vector<ScalarField> boundary_hessian(const GeometryCache& G, const ScalarField& q) {
  const int d = G.d;
  const auto& bnd = G.grid->boundary_nodes();
  const auto grad = G.calculus->gradient(G.chart, q);
  std::vector<ScalarField> H(d * d, ScalarField(bnd.size()));
  for (int j = 0; j < d; ++j) {
    const auto gg = G.calculus->gradient(G.chart, grad[j]);
    for (int i = 0; i < d; ++i)
      for (std::size_t s = 0; s < bnd.size(); ++s) H[i * d + j][s] = gg[i][bnd[s]];
  }
  return H;
}

ScalarField projection_identity_residual(const GeometryCache& G, const ScalarField& q, double trace_tol) {
  const int d = G.d;
  const auto& bnd = G.grid->boundary_nodes();
  double qmax = 0, tmax = 0;
  for (double v : q) qmax = std::max(qmax, std::abs(v));
  for (int b : bnd) tmax = std::max(tmax, std::abs(q[b]));
  if (tmax > trace_tol * std::max(1.0, qmax))
    throw Error(ErrorKind::Precondition, "projection_identity_residual: boundary trace " + std::to_string(tmax) +
                                             " does not vanish");
  const auto grad = G.calculus->gradient(G.chart, q);
  BoundaryTensor H{2, boundary_hessian(G, q)};
  const auto PH = project(G, H);
  ScalarField out(bnd.size());
  for (std::size_t s = 0; s < bnd.size(); ++s) {
    double dn = 0;
    for (int i = 0; i < d; ++i) dn += G.normal[i][bnd[s]] * grad[i][bnd[s]];
    double acc = 0;
    for (int c = 0; c < d * d; ++c) {
      const double e = PH.comp[c][s] - G.theta[c][s] * dn;
      acc += e * e;
    }
    out[s] = std::sqrt(acc);
  }
  return out;
}

}  // namespace mhdl
