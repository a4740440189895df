#include "mhdl/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mhdl {

FieldSet<double> mhd_rhs(const SimState& s, const EosParams& eos, NaturalRates<double>* natural) {
  FieldSet<double> in{s.x, s.u, s.B, s.p}, r;
  mhd_rates(*s.grid, eos, in, r, natural);
  return r;
}

namespace {

void axpy(VectorField& y, double a, const VectorField& x) {
  for (std::size_t k = 0; k < y.size(); ++k)
    for (std::size_t i = 0; i < y[k].size(); ++i) y[k][i] += a * x[k][i];
}
void axpy(ScalarField& y, double a, const ScalarField& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}
void axpy(FieldSet<double>& y, double a, const FieldSet<double>& x) {
  axpy(y.x, a, x.x);
  axpy(y.u, a, x.u);
  axpy(y.B, a, x.B);
  axpy(y.p, a, x.p);
}

bool finite(const FieldSet<double>& f) {
  auto ok = [](const ScalarField& v) {
    return std::all_of(v.begin(), v.end(), [](double z) { return std::isfinite(z); });
  };
  for (const auto& c : f.x)
    if (!ok(c)) return false;
  for (const auto& c : f.u)
    if (!ok(c)) return false;
  for (const auto& c : f.B)
    if (!ok(c)) return false;
  return ok(f.p);
}

}  // namespace

SimState step(const SimState& s, const EosParams& eos, double dt) {
  if (dt == 0.0) return s;
  const Grid& g = *s.grid;
  const FieldSet<double> y0 = s.fields();
  FieldSet<double> k, acc = y0, stage;

  mhd_rates(g, eos, y0, k);
  axpy(acc, dt / 6, k);
  stage = y0;
  axpy(stage, dt / 2, k);

  mhd_rates(g, eos, stage, k);
  axpy(acc, dt / 3, k);
  stage = y0;
  axpy(stage, dt / 2, k);

  mhd_rates(g, eos, stage, k);
  axpy(acc, dt / 3, k);
  stage = y0;
  axpy(stage, dt, k);

  mhd_rates(g, eos, stage, k);
  axpy(acc, dt / 6, k);

  if (!finite(acc)) throw InstabilityError("step: non-finite values at t=" + std::to_string(s.t + dt), s);
  for (double p : acc.p)
    if (eos.rho(p) < kRhoFloor)
      throw InstabilityError("step: density fell below the floor at t=" + std::to_string(s.t + dt), s);

  SimState out;
  out.grid = s.grid;
  out.t = s.t + dt;
  out.x = std::move(acc.x);
  out.u = std::move(acc.u);
  out.B = std::move(acc.B);
  out.p = std::move(acc.p);
  return out;
}

double min_spacing(const Grid& g, const VectorField& x) {
  const int d = g.dim();
  double h = std::numeric_limits<double>::infinity();
  for (const Block& b : g.blocks()) {
    for (int a = 0; a < d; ++a) {
      const int s = b.stride[a], n = b.n[a];
      for (int l = 0; l < b.nloc; ++l) {
        if ((l / s) % n == n - 1) continue;
        double e2 = 0;
        for (int i = 0; i < d; ++i) {
          const double e = x[i][b.node[l + s]] - x[i][b.node[l]];
          e2 += e * e;
        }
        h = std::min(h, std::sqrt(e2));
      }
    }
  }
  return h;
}

double cfl_dt(const SimState& s, const EosParams& eos) {
  const double h = min_spacing(*s.grid, s.x);
  double umax = 0, bmax = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double u2 = 0, b2 = 0;
    for (int k = 0; k < s.dim(); ++k) {
      u2 += s.u[k][i] * s.u[k][i];
      b2 += s.B[k][i] * s.B[k][i];
    }
    umax = std::max(umax, u2);
    bmax = std::max(bmax, b2);
  }
  double dt = kCflWave * h / (eos.sound_speed() + std::sqrt(umax) + std::sqrt(bmax));
  if (eos.lambda > 0) dt = std::min(dt, kCflDiffusion * h * h / eos.lambda);
  return dt;
}

FieldSet<Jet> taylor_expansion(const SimState& s, const EosParams& eos, int order) {
  if (order < 0 || order >= Jet::N) throw Error(ErrorKind::Range, "taylor_expansion: order out of range");
  auto lift = [](const ScalarField& f) { return std::vector<Jet>(f.begin(), f.end()); };
  auto liftv = [&](const VectorField& v) {
    std::vector<std::vector<Jet>> o;
    for (const auto& c : v) o.push_back(lift(c));
    return o;
  };
  FieldSet<Jet> y{liftv(s.x), liftv(s.u), liftv(s.B), lift(s.p)}, r;
  // coefficient k+1 of the solution equals coefficient k of the rate divided by k+1;
  // rate coefficient k depends only on solution coefficients 0..k
  for (int k = 0; k < order; ++k) {
    mhd_rates(*s.grid, eos, y, r);
    auto lift_coeff = [k](std::vector<Jet>& dst, const std::vector<Jet>& src) {
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i].c[k + 1] = src[i].c[k] / (k + 1);
    };
    for (int c = 0; c < s.dim(); ++c) {
      lift_coeff(y.x[c], r.x[c]);
      lift_coeff(y.u[c], r.u[c]);
      lift_coeff(y.B[c], r.B[c]);
    }
    lift_coeff(y.p, r.p);
  }
  return y;
}

std::size_t History::index_of(double t) const {
  if (snapshots.empty()) throw Error(ErrorKind::Window, "history: empty");
  const double t0 = snapshots.front().t;
  const long k = std::lround((t - t0) / interval);
  if (k < 0 || k >= static_cast<long>(snapshots.size()) || std::abs(snapshots[k].t - t) > 0.25 * interval)
    throw Error(ErrorKind::Window, "history: no snapshot at t=" + std::to_string(t));
  return static_cast<std::size_t>(k);
}

History run(const SimState& s0, const EosParams& eos, const RunOptions& opt) {
  if (!(opt.t_final >= 0)) throw Error(ErrorKind::Config, "run: negative final time");
  double dt = opt.dt > 0 ? opt.dt : cfl_dt(s0, eos) * opt.dt_scale;
  const int nsteps = opt.t_final > 0 ? std::max(1, static_cast<int>(std::ceil(opt.t_final / dt - 1e-9))) : 0;
  if (nsteps > 0) dt = opt.t_final / nsteps;
  History h;
  h.grid = s0.grid;
  h.eos = eos;
  h.dt = dt;
  h.interval = dt * opt.snapshot_every;
  h.snapshots.push_back(s0);
  if (opt.monitor) opt.monitor(s0, 0);
  SimState s = s0;
  for (int n = 1; n <= nsteps; ++n) {
    s = step(s, eos, dt);
    s.t = s0.t + n * dt;  // avoid drift from repeated addition
    if (opt.monitor) opt.monitor(s, n);
    if (n % opt.snapshot_every == 0) h.snapshots.push_back(s);
  }
  h.final_state = std::move(s);
  return h;
}

}  // namespace mhdl
