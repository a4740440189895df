#include "mhdl/energies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mhdl/numerics.hpp"

namespace mhdl {

namespace {

double sq_sum(const VectorField& v, std::size_t i) {
  double s = 0;
  for (const auto& c : v) s += c[i] * c[i];
  return s;
}

// all s-th Cartesian derivatives of f, component index i1*d^(s-1) + ... + is
std::vector<ScalarField> derivative_tensor(const Frame& F, const ScalarField& f, int s) {
  std::vector<ScalarField> cur{f};
  const int d = F.dim();
  for (int o = 0; o < s; ++o) {
    std::vector<ScalarField> nxt(cur.size() * d);
    for (std::size_t c = 0; c < cur.size(); ++c) {
      auto g = F.grad(cur[c]);
      // new leading index: component = i * size(cur) + c
      for (int i = 0; i < d; ++i) nxt[i * cur.size() + c] = std::move(g[i]);
    }
    cur = std::move(nxt);
  }
  return cur;
}

// Q(T, T) at one node for a rank-s tensor, q given as d*d component arrays at `node`
double q_contract(const std::vector<ScalarField>& T, int s, int d, const std::vector<ScalarField>& q, std::size_t node,
                  std::size_t qnode) {
  std::vector<double> a(T.size()), b(T.size());
  for (std::size_t c = 0; c < T.size(); ++c) a[c] = T[c][node];
  int stride = static_cast<int>(T.size());
  for (int slot = 0; slot < s; ++slot) {
    stride /= d;
    std::fill(b.begin(), b.end(), 0.0);
    for (std::size_t c = 0; c < T.size(); ++c) {
      const int i = (static_cast<int>(c) / stride) % d;
      const int base = static_cast<int>(c) - i * stride;
      for (int j = 0; j < d; ++j) b[c] += q[i * d + j][qnode] * a[base + j * stride];
    }
    std::swap(a, b);
  }
  double out = 0;
  for (std::size_t c = 0; c < T.size(); ++c) out += a[c] * T[c][node];
  return out;
}

ScalarField total_pressure_derivative(const TimeJet& J, int k) {
  // D_t^k (p + |B|^2/2) by the Leibniz rule
  ScalarField P = J.p[k];
  double binom = 1.0;
  for (int j = 0; j <= k; ++j) {
    if (j > 0) binom = binom * (k - j + 1) / j;
    for (std::size_t i = 0; i < P.size(); ++i) {
      double dot = 0;
      for (std::size_t c = 0; c < J.B[j].size(); ++c) dot += J.B[j][c][i] * J.B[k - j][c][i];
      P[i] += 0.5 * binom * dot;
    }
  }
  return P;
}

}  // namespace

double physical_energy(const SimState& s, const EosParams& eos) {
  Frame F(*s.grid, s.x);
  ScalarField e(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double rho = eos.rho(s.p[i]);
    e[i] = 0.5 * rho * sq_sum(s.u, i) + 0.5 * sq_sum(s.B, i) + rho * internal_energy_density(eos, rho);
  }
  return F.integrate(e);
}

double magnetic_dissipation(const SimState& s, const EosParams& eos) {
  if (eos.lambda == 0.0) return 0.0;
  Frame F(*s.grid, s.x);
  ScalarField e(s.size(), 0.0);
  for (int k = 0; k < s.dim(); ++k) {
    const auto g = F.grad(s.B[k]);
    for (std::size_t i = 0; i < s.size(); ++i) e[i] += sq_sum(g, i);
  }
  return eos.lambda * F.integrate(e);
}

int stencil_points(int k) {
  if (k < 0 || k > 3) throw Error(ErrorKind::Range, "material_derivative: order must be 0..3");
  static const int pts[] = {1, 5, 5, 7};
  return pts[k];
}

std::vector<double> fd_weights(const std::vector<double>& t, double z, int k) {
  // Fornberg's recursion
  const int n = static_cast<int>(t.size());
  std::vector<std::vector<double>> c(n, std::vector<double>(k + 1, 0.0));
  double c1 = 1.0, c4 = t[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, k);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = t[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = t[i] - t[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int m = mn; m >= 1; --m) c[i][m] = c1 * (m * c[i - 1][m - 1] - c5 * c[i - 1][m]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int m = mn; m >= 1; --m) c[j][m] = (c4 * c[j][m] - m * c[j][m - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][k];
  return w;
}

namespace {

struct Window {
  std::size_t first = 0;
  std::vector<double> w;
};

Window window_for(const History& h, std::size_t idx, int k) {
  const int npts = stencil_points(k);
  const std::size_t N = h.snapshots.size();
  if (static_cast<int>(N) < npts)
    throw Error(ErrorKind::Window, "material_derivative: order " + std::to_string(k) + " needs " +
                                       std::to_string(npts) + " snapshots, history has " + std::to_string(N));
  long first = static_cast<long>(idx) - npts / 2;
  first = std::clamp(first, 0L, static_cast<long>(N) - npts);
  Window win;
  win.first = static_cast<std::size_t>(first);
  std::vector<double> t(npts);
  for (int j = 0; j < npts; ++j) t[j] = h.snapshots[first + j].t;
  win.w = fd_weights(t, h.snapshots[idx].t, k);
  return win;
}

const VectorField& pick(const SimState& s, Quantity q, VectorField& tmp) {
  switch (q) {
    case Quantity::Position:
      return s.x;
    case Quantity::Velocity:
      return s.u;
    case Quantity::Magnetic:
      return s.B;
    case Quantity::Pressure:
      tmp = {s.p};
      return tmp;
    case Quantity::Density:
      break;
  }
  tmp.assign(1, ScalarField(s.size()));
  return tmp;
}

}  // namespace

VectorField material_derivative(const History& h, const std::function<VectorField(const SimState&)>& f, int k,
                                double t) {
  const std::size_t idx = h.index_of(t);
  const Window win = window_for(h, idx, k);
  VectorField out;
  for (std::size_t j = 0; j < win.w.size(); ++j) {
    const VectorField v = f(h.snapshots[win.first + j]);
    if (out.empty()) out = VectorField(v.size(), ScalarField(v[0].size(), 0.0));
    for (std::size_t c = 0; c < v.size(); ++c)
      for (std::size_t i = 0; i < v[c].size(); ++i) out[c][i] += win.w[j] * v[c][i];
  }
  return out;
}

VectorField material_derivative(const History& h, Quantity q, int k, double t) {
  const std::size_t idx = h.index_of(t);
  const Window win = window_for(h, idx, k);
  VectorField out;
  for (std::size_t j = 0; j < win.w.size(); ++j) {
    const SimState& s = h.snapshots[win.first + j];
    VectorField tmp;
    const VectorField* f = &pick(s, q, tmp);
    if (q == Quantity::Density) {
      for (std::size_t i = 0; i < s.size(); ++i) tmp[0][i] = h.eos.rho(s.p[i]);
      f = &tmp;
    }
    if (out.empty()) out = VectorField(f->size(), ScalarField(s.size(), 0.0));
    for (std::size_t c = 0; c < f->size(); ++c)
      for (std::size_t i = 0; i < s.size(); ++i) out[c][i] += win.w[j] * (*f)[c][i];
  }
  return out;
}

TimeJet time_jet(const SimState& s, const EosParams& eos, int K) {
  const auto J = taylor_expansion(s, eos, K);
  TimeJet out;
  const int d = s.dim();
  for (int k = 0; k <= K; ++k) {
    VectorField u(d, ScalarField(s.size())), B(d, ScalarField(s.size()));
    ScalarField p(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (int c = 0; c < d; ++c) {
        u[c][i] = J.u[c][i].derivative(k);
        B[c][i] = J.B[c][i].derivative(k);
      }
      p[i] = J.p[i].derivative(k);
    }
    out.u.push_back(std::move(u));
    out.B.push_back(std::move(B));
    out.p.push_back(std::move(p));
  }
  return out;
}

TimeJet time_jet(const History& h, std::size_t index, int K, DerivativeSource src) {
  if (src == DerivativeSource::Taylor) return time_jet(h.snapshots.at(index), h.eos, K);
  TimeJet out;
  const double t = h.snapshots.at(index).t;
  for (int k = 0; k <= K; ++k) {
    out.u.push_back(material_derivative(h, Quantity::Velocity, k, t));
    out.B.push_back(material_derivative(h, Quantity::Magnetic, k, t));
    out.p.push_back(material_derivative(h, Quantity::Pressure, k, t)[0]);
  }
  return out;
}

double dissipation_residual(const History& h, double t) {
  const std::size_t idx = h.index_of(t);
  const Window win = window_for(h, idx, 1);
  double dE = 0;
  for (std::size_t j = 0; j < win.w.size(); ++j) dE += win.w[j] * physical_energy(h.snapshots[win.first + j], h.eos);
  return std::abs(dE + magnetic_dissipation(h.snapshots[idx], h.eos));
}

double integrated_dissipation_residual(const History& h) {
  const std::size_t N = h.snapshots.size();
  if (N < 2) return 0.0;
  std::vector<double> D(N);
  for (std::size_t i = 0; i < N; ++i) D[i] = magnetic_dissipation(h.snapshots[i], h.eos);
  // composite Simpson where possible, a trapezoid panel for an odd interval count
  const double dt = h.interval;
  double integral = 0;
  std::size_t m = N - 1;
  std::size_t simpson = m - (m % 2);
  for (std::size_t i = 0; i + 2 <= simpson; i += 2) integral += dt / 3 * (D[i] + 4 * D[i + 1] + D[i + 2]);
  if (m % 2) integral += dt / 2 * (D[N - 2] + D[N - 1]);
  return physical_energy(h.snapshots.back(), h.eos) - physical_energy(h.snapshots.front(), h.eos) + integral;
}

RtMargin rt_margin(const SimState& s, const GeometryCache& geo) {
  const int d = s.dim();
  ScalarField P(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) P[i] = s.p[i] + 0.5 * sq_sum(s.B, i);
  const auto gP = geo.calculus->gradient(geo.chart, P);
  const auto& bnd = s.grid->boundary_nodes();
  RtMargin r;
  r.nu.resize(bnd.size());
  r.eps0 = std::numeric_limits<double>::infinity();
  for (std::size_t sl = 0; sl < bnd.size(); ++sl) {
    double dn = 0;
    for (int i = 0; i < d; ++i) dn += geo.normal[i][bnd[sl]] * gP[i][bnd[sl]];
    const double m = -dn;
    r.eps0 = std::min(r.eps0, m);
    if (m < kMarginFloor) r.degenerate = true;
    r.nu[sl] = 1.0 / std::max(m, kMarginFloor);
  }
  return r;
}

RtMargin rt_margin(const SimState& s) { return rt_margin(s, compute_geometry(s.grid, s.x)); }

namespace {

double field_sup(const Frame& F, const TimeJet& J) {
  // sum over s + k <= 2 of |d^s D_t^k f| for f in {p, B, u}, then sup over nodes
  const std::size_t n = F.size();
  ScalarField acc(n, 0.0);
  auto add_norm = [&](const VectorField& comps, int s) {
    ScalarField nrm(n, 0.0);
    for (const auto& f : comps)
      for (const auto& c : derivative_tensor(F, f, s))
        for (std::size_t i = 0; i < n; ++i) nrm[i] += c[i] * c[i];
    for (std::size_t i = 0; i < n; ++i) acc[i] += std::sqrt(nrm[i]);
  };
  for (int k = 0; k <= 2; ++k)
    for (int s = 0; s + k <= 2; ++s) {
      add_norm({J.p[k]}, s);
      add_norm(J.B[k], s);
      add_norm(J.u[k], s);
    }
  return *std::max_element(acc.begin(), acc.end());
}

}  // namespace

Apriori apriori_report(const SimState& s, const EosParams& eos) {
  const auto geo = compute_geometry(s.grid, s.x);
  Apriori a;
  a.curvature = geo.curvature_bound;
  a.iota0 = geo.iota0;
  a.K = geo.curvature_bound + 1.0 / geo.iota0;
  for (double p : s.p) a.rho_max = std::max(a.rho_max, std::abs(eos.rho(p)));
  Frame F(*s.grid, s.x);
  a.field_sup = field_sup(F, time_jet(s, eos, 2));
  a.M = std::max(a.rho_max, a.field_sup);
  a.eps0 = rt_margin(s, geo).eps0;
  return a;
}

double q_energy_density_integral(const Frame& F, const GeometryCache& geo, const VectorField& X, int s,
                                 const ScalarField* weight) {
  const std::size_t n = F.size();
  ScalarField dens(n, 0.0);
  for (const auto& comp : X) {
    const auto T = derivative_tensor(F, comp, s);
    for (std::size_t i = 0; i < n; ++i) dens[i] += q_contract(T, s, F.dim(), geo.q, i, i);
  }
  if (weight)
    for (std::size_t i = 0; i < n; ++i) dens[i] *= (*weight)[i];
  return F.integrate(dens);
}

double curl_norm2(const Frame& F, const VectorField& X, int m, const ScalarField* weight) {
  const int d = F.dim();
  const std::size_t n = F.size();
  std::vector<VectorField> grads;
  for (int j = 0; j < d; ++j) grads.push_back(F.grad(X[j]));
  ScalarField dens(n, 0.0);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      ScalarField c(n);
      for (std::size_t k = 0; k < n; ++k) c[k] = grads[j][i][k] - grads[i][j][k];
      const auto T = derivative_tensor(F, c, m);
      for (const auto& t : T)
        for (std::size_t k = 0; k < n; ++k) dens[k] += t[k] * t[k];
    }
  if (weight)
    for (std::size_t k = 0; k < n; ++k) dens[k] *= (*weight)[k];
  return F.integrate(dens);
}

EnergyReport higher_energy(const History& h, double t, const EnergyOptions& opt) {
  if (opt.r < 0 || opt.r > 2) throw Error(ErrorKind::Range, "higher_energy: r must be 0..2");
  const std::size_t idx = h.index_of(t);
  const SimState& s = h.snapshots[idx];
  const EosParams& eos = h.eos;
  const int d = s.dim();
  const std::size_t n = s.size();
  const int R = opt.r;
  const TimeJet J = time_jet(h, idx, R + 1, opt.source);
  const Frame F(*s.grid, s.x);
  const auto geo = compute_geometry(s.grid, s.x);
  const RtMargin rt = rt_margin(s, geo);
  const auto& bnd = s.grid->boundary_nodes();
  const auto bw = boundary_weights(F);

  EnergyReport rep;
  rep.t = s.t;
  rep.r = R;
  rep.E_phys = physical_energy(s, eos);
  rep.rt_margin = rt.eps0;
  rep.nu_min = *std::min_element(rt.nu.begin(), rt.nu.end());
  rep.nu_max = *std::max_element(rt.nu.begin(), rt.nu.end());
  rep.nu_degenerate = rt.degenerate;

  ScalarField rho(n), w_p(n), rho_drho(n);
  const double drho = eos.drho();
  for (std::size_t i = 0; i < n; ++i) {
    rho[i] = eos.rho(s.p[i]);
    w_p[i] = drho / rho[i];
    rho_drho[i] = rho[i] * drho;
  }

  for (int rr = 0; rr <= R; ++rr) {
    for (int sd = 0; sd <= rr; ++sd) {
      const int k = rr - sd;
      double e = 0;
      if (sd == 0) {
        ScalarField dens(n);
        for (std::size_t i = 0; i < n; ++i)
          dens[i] = 0.5 * rho_drho[i] * sq_sum(J.u[k], i) + 0.5 * sq_sum(J.B[k], i) +
                    0.5 * w_p[i] * J.p[k][i] * J.p[k][i];
        e = F.integrate(dens);
      } else {
        e = 0.5 * q_energy_density_integral(F, geo, J.u[k], sd, &rho) +
            0.5 * q_energy_density_integral(F, geo, J.B[k], sd, nullptr) +
            0.5 * q_energy_density_integral(F, geo, {J.p[k]}, sd, &w_p);
        // boundary term with the tangential projection (q reduces to gamma on the boundary)
        const ScalarField P = total_pressure_derivative(J, k);
        const auto T = derivative_tensor(F, P, sd);
        ScalarField b(bnd.size());
        for (std::size_t sl = 0; sl < bnd.size(); ++sl)
          b[sl] = bw[sl] * rt.nu[sl] * q_contract(T, sd, d, geo.gamma, bnd[sl], sl);
        e += 0.5 * pairwise_sum(b);
      }
      rep.Esk[{sd, k}] = e;
    }
    rep.K.push_back(rr == 0 ? 0.0 : curl_norm2(F, J.u[0], rr - 1, &rho) + curl_norm2(F, J.B[0], rr - 1, nullptr));

    // W_{rr+1}
    {
      const int m = rr + 1;
      ScalarField a(n), b(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) a[i] = drho * drho * J.p[m][i] * J.p[m][i];
      const auto g = F.grad(J.p[m - 1]);
      for (std::size_t i = 0; i < n; ++i) b[i] = drho * sq_sum(g, i);
      rep.W.push_back(0.5 * (std::sqrt(F.integrate(a)) + std::sqrt(F.integrate(b))));
    }
    // H_{rr+1}^2: running time integral plus the instantaneous resistive part
    {
      const int m = rr + 1;
      ScalarField g2(n, 0.0);
      for (int c = 0; c < d; ++c) {
        const auto g = F.grad(J.B[m - 1][c]);
        for (std::size_t i = 0; i < n; ++i) g2[i] += sq_sum(g, i);
      }
      const double instant = 0.5 * eos.lambda * F.integrate(g2);
      double integral = 0;
      if (idx > 0) {
        std::vector<double> vals(idx + 1);
        for (std::size_t j = 0; j <= idx; ++j) {
          const SimState& sj = h.snapshots[j];
          VectorField DB;
          if (opt.source == DerivativeSource::Taylor)
            DB = time_jet(sj, eos, m).B[m];
          else
            DB = material_derivative(h, Quantity::Magnetic, m, sj.t);
          ScalarField dd(n);
          for (std::size_t i = 0; i < n; ++i) dd[i] = sq_sum(DB, i);
          vals[j] = Frame(*sj.grid, sj.x).integrate(dd);
        }
        for (std::size_t j = 0; j < idx; ++j) integral += 0.5 * (h.snapshots[j + 1].t - h.snapshots[j].t) * (vals[j] + vals[j + 1]);
      }
      rep.H2_integral.push_back(integral);
      rep.H2_instant.push_back(instant);
      rep.H2.push_back(integral + instant);
    }
    double total = 0;
    for (int sd = 0; sd <= rr; ++sd) total += rep.Esk[{sd, rr - sd}];
    total += rep.K[rr];
    total += rep.W[rr] * rep.W[rr];
    total += rep.H2[rr];
    rep.E.push_back(total);
  }
  if (opt.with_apriori) rep.apriori = apriori_report(s, eos);
  return rep;
}

std::vector<std::pair<std::string, double>> EnergyReport::columns() const {
  std::vector<std::pair<std::string, double>> c;
  c.emplace_back("t", t);
  c.emplace_back("E_phys", E_phys);
  for (const auto& [sk, v] : Esk) c.emplace_back("E_" + std::to_string(sk.first) + "_" + std::to_string(sk.second), v);
  for (std::size_t r = 0; r < E.size(); ++r) {
    c.emplace_back("K_" + std::to_string(r), K[r]);
    c.emplace_back("W_" + std::to_string(r + 1), W[r]);
    c.emplace_back("H2_" + std::to_string(r + 1), H2[r]);
    c.emplace_back("E_" + std::to_string(r), E[r]);
  }
  c.emplace_back("rt_margin", rt_margin);
  c.emplace_back("nu_min", nu_min);
  c.emplace_back("nu_max", nu_max);
  c.emplace_back("nu_degenerate", nu_degenerate ? 1.0 : 0.0);
  c.emplace_back("K", apriori.K);
  c.emplace_back("M", apriori.M);
  c.emplace_back("eps0", apriori.eps0);
  return c;
}

}  // namespace mhdl
