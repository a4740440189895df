#include "mhdl/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

#include "CLI11.hpp"
#include "mhdl/builtins.hpp"
#include "mhdl/dynamics.hpp"
#include "mhdl/energies.hpp"
#include "mhdl/incompressible.hpp"
#include "mhdl/initial_data.hpp"
#include "mhdl/io.hpp"
#include "mhdl/numerics.hpp"
#include "mhdl/verification.hpp"

namespace fs = std::filesystem;

namespace mhdl {

int worker_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("MHDL_THREADS")) {
    const int m = std::atoi(env);
    if (m >= 1) n = m;
  }
  return n;
}

namespace {

// runs task(i) for i in [0, n) on up to `workers` threads; rethrows the first failure by index
void parallel_for(int n, int workers, const std::function<void(int)>& task) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<int> next{0};
  auto body = [&]() {
    for (int i = next++; i < n; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int w = std::max(1, std::min(workers, n));
  std::vector<std::thread> pool;
  for (int k = 1; k < w; ++k) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string kappa_dir(double kappa) {
  std::string s = format_number(kappa);
  std::replace(s.begin(), s.end(), '+', 'p');
  return "kappa_" + s;
}

double l2_diff(const Frame& F, const VectorField& a, const VectorField& b) {
  ScalarField s(F.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t n = 0; n < s.size(); ++n) s[n] += (a[i][n] - b[i][n]) * (a[i][n] - b[i][n]);
  return std::sqrt(std::max(0.0, F.integrate(s)));
}

}  // namespace

std::vector<LimitRow> limit_sweep(const LimitOptions& opt) {
  if (opt.kappas.empty()) throw Error(ErrorKind::Config, "limit-sweep: no kappa values");
  const GridPtr g = make_grid(opt.dim, opt.nx);
  BuiltinOptions bo;
  bo.seed = opt.seed;
  const BuiltinData bd = make_builtin(opt.builtin, *g, bo);

  // incompressible reference, shared read-only by the workers
  IncompressibleStepper inc(g, opt.lambda);
  IncompressibleState ref = incompressible_from(g, bd.v, bd.B);
  inc.project(ref);
  const VectorField v0 = ref.v;
  if (opt.t_final > 0) {
    const int n = static_cast<int>(std::ceil(opt.t_final / inc.cfl_dt(ref) - 1e-9));
    const double dt = opt.t_final / n;
    for (int k = 0; k < n; ++k) ref = inc.step(ref, dt);
  }
  const Frame F(*g, g->reference());

  std::vector<LimitRow> rows(opt.kappas.size());
  std::mutex io;
  parallel_for(static_cast<int>(rows.size()), worker_count(), [&](int i) {
    EosParams eos;
    eos.kappa = opt.kappas[i];
    eos.lambda = opt.lambda;
    ConstructOptions co;
    co.order = opt.order;
    CompatibleData D;
    try {
      D = construct_compatible(g, v0, bd.B, eos, co);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Divergence) throw;
      co.solver = LadderSolver::NewtonKrylov;
      D = construct_compatible(g, v0, bd.B, eos, co);
    }
    RunOptions ro;
    ro.t_final = opt.t_final;
    ro.snapshot_every = 1 << 30;
    const History h = run(D.state(), eos, ro);
    const SimState& s = h.final_state;
    LimitRow r;
    r.kappa = eos.kappa;
    r.t = s.t;
    r.steps = h.dt > 0 ? static_cast<int>(std::lround(opt.t_final / h.dt)) : 0;
    r.u_l2 = l2_diff(F, s.u, ref.v);
    r.data_l2 = l2_diff(F, D.u0, D.v0);
    ScalarField eh(s.size());
    double pmax = 0;
    for (std::size_t n = 0; n < s.size(); ++n) {
      for (int c = 0; c < s.dim(); ++c) r.u_max = std::max(r.u_max, std::abs(s.u[c][n] - ref.v[c][n]));
      const double rho = eos.rho(s.p[n]);
      r.rho_max = std::max(r.rho_max, std::abs(rho - 1.0));
      pmax = std::max(pmax, std::abs(s.p[n]));
      const double e = enthalpy(eos, rho) - ref.q[n];
      eh[n] = e * e;
    }
    r.rho_bound = 2 * pmax / eos.kappa;
    r.enthalpy_l2 = std::sqrt(std::max(0.0, F.integrate(eh)));
    rows[i] = r;
    if (!opt.out.empty()) {
      const fs::path dir = fs::path(opt.out) / kappa_dir(eos.kappa);
      std::lock_guard<std::mutex> lock(io);
      fs::create_directories(dir);
      write_snapshot((dir / "initial.mhdl").string(), D);
      write_snapshot((dir / "final.mhdl").string(), s, eos);
    }
  });
  return rows;
}

namespace {

struct Common {
  std::string config, out;
  std::vector<double> kappas;
  double lambda = 0, tmax = 0;
  int nx = 0, order = 0;
  std::uint64_t seed = 0;
  CLI::Option *o_out = nullptr, *o_kappa = nullptr, *o_lambda = nullptr, *o_nx = nullptr, *o_tmax = nullptr,
              *o_order = nullptr, *o_seed = nullptr;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "configuration file (key = value, [sections], # comments)");
    o_out = app->add_option("--out", out, "output directory");
    o_kappa = app->add_option("--kappa", kappas, "pressure law stiffness (repeatable for sweeps)");
    o_lambda = app->add_option("--lambda", lambda, "magnetic diffusivity");
    o_nx = app->add_option("--nx", nx, "nodes per side of the core block times two");
    o_tmax = app->add_option("--tmax", tmax, "final time");
    o_order = app->add_option("--order", order, "ladder order of the compatible construction");
    o_seed = app->add_option("--seed", seed, "random seed");
  }

  RunConfig resolve() const {
    RunConfig c;
    if (!config.empty()) c = load_config(config);
    if (o_out->count()) c.out = out;
    if (o_kappa->count()) {
      c.kappas = kappas;
      c.kappa = kappas.front();
    }
    if (o_lambda->count()) c.lambda = lambda;
    if (o_nx->count()) c.nx = nx;
    if (o_tmax->count()) c.t_final = tmax;
    if (o_order->count()) c.order = order;
    if (o_seed->count()) c.seed = seed;
    c.validate();
    return c;
  }
};

EosParams eos_of(const RunConfig& c) {
  EosParams e;
  e.kappa = c.kappa;
  e.lambda = c.lambda;
  return e;
}

CompatibleData build_compatible(GridPtr g, const VectorField& v, const VectorField& B, const EosParams& eos, int order,
                                const std::string& solver) {
  ConstructOptions co;
  co.order = order;
  if (solver == "newton") co.solver = LadderSolver::NewtonKrylov;
  try {
    return construct_compatible(g, v, B, eos, co);
  } catch (const Error& e) {
    if (solver != "auto" || e.kind() != ErrorKind::Divergence) throw;
    co.solver = LadderSolver::NewtonKrylov;
    return construct_compatible(g, v, B, eos, co);
  }
}

bool is_builtin(const std::string& s) {
  const auto& n = builtin_names();
  return std::find(n.begin(), n.end(), s) != n.end();
}

// initial state from the configured source; compatible data when requested
SimState initial_state(const RunConfig& c, const std::string& solver, std::optional<CompatibleData>* data = nullptr) {
  if (is_builtin(c.source)) {
    const GridPtr g = make_grid(c.dim, c.nx);
    BuiltinOptions bo;
    bo.seed = c.seed;
    const BuiltinData bd = make_builtin(c.source, *g, bo);
    if (!c.compatible) return state_from(g, bd);
    CompatibleData D = build_compatible(g, bd.v, bd.B, eos_of(c), c.order, solver);
    SimState s = D.state();
    if (data) *data = std::move(D);
    return s;
  }
  if (!fs::exists(c.source))
    throw Error(ErrorKind::Config, "source '" + c.source + "' is neither a builtin nor an existing snapshot");
  return read_snapshot(c.source).state;
}

double divb_norm(const SimState& s) {
  const Frame F(*s.grid, s.x);
  ScalarField d = F.div(s.B);
  for (double& v : d) v *= v;
  return std::sqrt(std::max(0.0, F.integrate(d)));
}

void write_diagnostic(const fs::path& out, const std::string& what, const SimState* last, const EosParams* eos) {
  fs::create_directories(out);
  std::string text = "numerical failure\n" + what + "\n";
  if (last && last->grid) {
    text += "last finite state at t = " + format_number(last->t) + " written to last_state.mhdl\n";
    write_snapshot((out / "last_state.mhdl").string(), *last, eos ? *eos : EosParams{});
  }
  write_text((out / "diagnostic.txt").string(), text);
}

int cmd_simulate(const RunConfig& c, const std::string& solver) {
  const fs::path out(c.out);
  fs::create_directories(out / "snapshots");
  const EosParams eos = eos_of(c);
  std::optional<CompatibleData> data;
  const SimState s0 = initial_state(c, solver, &data);
  if (data) write_snapshot((out / "initial.mhdl").string(), *data);

  RunOptions ro;
  ro.t_final = c.t_final;
  ro.snapshot_every = c.snapshot_every;
  if (c.dt_policy == DtPolicy::Fixed) ro.dt = c.dt;
  ro.dt_scale = c.cfl_scale;
  History h;
  try {
    h = run(s0, eos, ro);
  } catch (const InstabilityError& e) {
    write_diagnostic(out, e.what(), &e.last_finite_state(), &eos);
    throw;
  }
  if (h.snapshots.back().t < h.final_state.t) h.snapshots.push_back(h.final_state);

  const auto has = [&](const char* m) { return std::find(c.monitors.begin(), c.monitors.end(), m) != c.monitors.end(); };
  Table energy, divb, rt, apri;
  Plot plot;
  plot.title = "physical energy";
  plot.xlabel = "t";
  plot.ylabel = "E_phys";
  plot.series.push_back({"E_phys", {}, {}});
  divb.header = {"t", "divB_l2"};
  rt.header = {"t", "rt_margin"};
  apri.header = {"t", "K", "M", "eps0", "curvature", "iota0", "rho_max", "field_sup"};
  for (std::size_t i = 0; i < h.snapshots.size(); ++i) {
    const SimState& s = h.snapshots[i];
    char name[64];
    std::snprintf(name, sizeof name, "snap_%06zu.mhdl", i);
    write_snapshot((out / "snapshots" / name).string(), s, eos);
    if (has("energy")) {
      // one-state history so that the Taylor source needs no neighbours
      History one;
      one.grid = h.grid;
      one.eos = eos;
      one.dt = h.dt;
      one.interval = h.interval > 0 ? h.interval : 1.0;
      one.snapshots = {s};
      EnergyOptions eo;
      eo.r = c.r_max;
      eo.source = DerivativeSource::Taylor;
      const EnergyReport rep = higher_energy(one, s.t, eo);
      const auto cols = rep.columns();
      if (energy.header.empty())
        for (const auto& [k, v] : cols) energy.header.push_back(k);
      std::vector<double> vals;
      for (const auto& [k, v] : cols) vals.push_back(v);
      energy.add(vals);
      plot.series[0].x.push_back(s.t);
      plot.series[0].y.push_back(rep.E_phys);
    }
    if (has("divb")) divb.add({s.t, divb_norm(s)});
    if (has("rt")) rt.add({s.t, rt_margin(s).eps0});
    if (has("apriori")) {
      const Apriori a = apriori_report(s, eos);
      apri.add({s.t, a.K, a.M, a.eps0, a.curvature, a.iota0, a.rho_max, a.field_sup});
    }
  }
  if (has("energy")) {
    emit_report(energy, ReportKind::Csv, (out / "energy.csv").string());
    emit_report(energy, ReportKind::Svg, (out / "energy.svg").string(), &plot);
  }
  if (has("divb")) emit_report(divb, ReportKind::Csv, (out / "divb.csv").string());
  if (has("rt")) emit_report(rt, ReportKind::Csv, (out / "rt.csv").string());
  if (has("apriori")) emit_report(apri, ReportKind::Csv, (out / "apriori.csv").string());
  write_snapshot((out / "final.mhdl").string(), h.final_state, eos);
  std::cout << "simulate: " << h.snapshots.size() << " snapshots to t = " << h.final_state.t << " in " << c.out << "\n";
  return kExitOk;
}

int cmd_init_data(RunConfig c, const std::string& solver, bool check_run) {
  const fs::path out(c.out);
  fs::create_directories(out);
  if (!is_builtin(c.source)) throw Error(ErrorKind::Config, "init-data: source must be a builtin");
  c.compatible = true;
  std::optional<CompatibleData> data;
  initial_state(c, solver, &data);
  const CompatibleData& D = *data;
  write_snapshot((out / "initial.mhdl").string(), D);

  std::optional<History> h;
  if (check_run) {
    RunOptions ro;
    ro.t_final = 10 * cfl_dt(D.state(), eos_of(c)) * 0.25;
    ro.dt = ro.t_final / 10;
    h = run(D.state(), eos_of(c), ro);
  }
  const auto rows = compatibility_residual(D, h ? &*h : nullptr);
  Table t;
  t.header = {"j", "p_trace", "B_trace"};
  if (check_run) t.header.insert(t.header.end(), {"p_run", "B_run"});
  for (const auto& r : rows) {
    std::vector<double> v{static_cast<double>(r.j), r.p, r.B};
    if (check_run) {
      v.push_back(r.p_run.value_or(std::nan("")));
      v.push_back(r.B_run.value_or(std::nan("")));
    }
    t.add(v);
  }
  emit_report(t, ReportKind::Csv, (out / "compatibility.csv").string());

  const Frame F(*D.grid, D.grid->reference());
  Table s;
  s.header = {"kappa", "lambda", "order", "iterations", "sweeps", "u0_minus_v0_l2", "neumann_flux", "heat_defect0"};
  s.add({D.kappa, D.lambda, static_cast<double>(D.order), static_cast<double>(D.iterations),
         static_cast<double>(D.sweeps), l2_diff(F, D.u0, D.v0), D.neumann_flux, D.heat_defect0});
  emit_report(s, ReportKind::Csv, (out / "construction.csv").string());
  std::cout << "init-data: " << D.iterations << " iterations, max trace "
            << std::max(*std::max_element(D.trace_p.begin(), D.trace_p.end()),
                        *std::max_element(D.trace_B.begin(), D.trace_B.end()))
            << "\n";
  return kExitOk;
}

int cmd_limit_sweep(const RunConfig& c) {
  const fs::path out(c.out);
  fs::create_directories(out);
  LimitOptions lo;
  lo.dim = c.dim;
  lo.nx = c.nx;
  lo.lambda = c.lambda;
  lo.t_final = c.t_final;
  if (!c.kappas.empty()) lo.kappas = c.kappas;
  lo.builtin = is_builtin(c.source) ? c.source : "solenoidal-random";
  lo.seed = c.seed;
  lo.order = c.order;
  lo.out = c.out;
  const auto rows = limit_sweep(lo);
  Table t;
  t.header = {"kappa", "t", "steps", "u_minus_v_l2", "u_minus_v_max", "rho_minus_1_max", "rho_bound", "h_minus_q_l2",
              "u0_minus_v0_l2"};
  Plot p;
  p.title = "incompressible limit";
  p.xlabel = "kappa";
  p.ylabel = "||u - v||";
  p.loglog = true;
  p.fit_slope = true;
  p.series = {{"u - v at T", {}, {}}, {"h(rho) - q at T", {}, {}}};
  for (const auto& r : rows) {
    t.add({r.kappa, r.t, static_cast<double>(r.steps), r.u_l2, r.u_max, r.rho_max, r.rho_bound, r.enthalpy_l2,
           r.data_l2});
    p.series[0].x.push_back(r.kappa);
    p.series[0].y.push_back(r.u_l2);
    p.series[1].x.push_back(r.kappa);
    p.series[1].y.push_back(r.enthalpy_l2);
  }
  emit_report(t, ReportKind::Csv, (out / "limit.csv").string());
  emit_report(t, ReportKind::Svg, (out / "limit.svg").string(), &p);
  std::cout << "limit-sweep: " << rows.size() << " runs in " << c.out << "\n";
  return kExitOk;
}

int cmd_verify(const RunConfig& c, int samples, bool discrete) {
  const fs::path out(c.out);
  fs::create_directories(out);
  Table id;
  id.header = {"identity", "order", "indices", "test_field", "dim", "residual", "scale", "relative"};
  for (CommutatorId cid : {CommutatorId::DtGradR, CommutatorId::GradDtK, CommutatorId::DtkBdot, CommutatorId::DtkLaplace}) {
    const auto [lo, hi] = supported_orders(cid);
    for (int o = lo; o <= hi; ++o)
      for (int dim : {2, 3})
        for (int tc : {-1, 0}) {
          IdentityCase ic;
          ic.id = cid;
          ic.order = o;
          ic.test_component = tc;
          const int nf = cid == CommutatorId::DtGradR ? o : free_indices(cid);
          std::string idx;
          for (int k = 0; k < nf; ++k) {
            ic.indices.push_back((k + 1) % dim);
            idx += std::to_string(ic.indices.back());
          }
          const auto flow = random_polynomial_flow(dim, c.seed + 17 * o + dim);
          std::vector<double> pt{0.3};
          for (int k = 0; k < dim; ++k) pt.push_back(0.2 - 0.15 * k);
          const auto r = commutator_residual(ic, flow, pt);
          id.rows.push_back({commutator_name(cid), std::to_string(o), idx, tc < 0 ? "f" : "B" + std::to_string(tc),
                             std::to_string(dim), format_number(r.residual), format_number(r.scale),
                             format_number(r.relative)});
        }
  }
  emit_report(id, ReportKind::Csv, (out / "identities.csv").string());

  if (discrete) {
    std::vector<History> runs;
    const double T = 0.02;
    for (int nx : {48, 96, 192}) {
      const GridPtr g = make_grid(2, nx);
      BuiltinOptions bo;
      bo.seed = c.seed;
      const SimState s0 = state_from(g, make_builtin("solenoidal-random", *g, bo));
      EosParams eos;
      eos.kappa = 100;
      RunOptions ro;
      ro.dt = 2e-3 * 48.0 / nx;
      ro.t_final = T + 6 * ro.dt;
      runs.push_back(run(s0, eos, ro));
    }
    std::vector<const History*> ptr;
    for (const auto& h : runs) ptr.push_back(&h);
    Table rf;
    rf.header = {"identity", "order", "test_field", "nx", "residual", "observed_order"};
    Plot p;
    p.title = "commutator residuals";
    p.xlabel = "h";
    p.ylabel = "max residual";
    p.loglog = true;
    p.fit_slope = true;
    struct Case {
      CommutatorId id;
      int order;
      std::vector<int> idx;
      int tc;
    };
    for (const Case& k : std::vector<Case>{{CommutatorId::DtkLaplace, 2, {}, -1},
                                           {CommutatorId::DtGradR, 2, {0, 1}, -1},
                                           {CommutatorId::GradDtK, 2, {1}, -1},
                                           {CommutatorId::DtkBdot, 2, {}, 1}}) {
      IdentityCase ic;
      ic.id = k.id;
      ic.order = k.order;
      ic.indices = k.idx;
      ic.test_component = k.tc;
      const auto st = commutator_refinement(ic, ptr, T);
      PlotSeries ser{std::string(commutator_name(k.id)) + " " + std::to_string(k.order), st.spacing, st.residual};
      p.series.push_back(ser);
      for (std::size_t i = 0; i < st.residual.size(); ++i)
        rf.rows.push_back({commutator_name(k.id), std::to_string(k.order), k.tc < 0 ? "f" : "B" + std::to_string(k.tc),
                           std::to_string(runs[i].grid->nx()), format_number(st.residual[i]),
                           i == 0 ? "" : format_number(st.orders[i - 1])});
    }
    emit_report(rf, ReportKind::Csv, (out / "refinement.csv").string());
    emit_report(rf, ReportKind::Svg, (out / "refinement.svg").string(), &p);
  }

  Table iq;
  iq.header = {"inequality", "r", "nx", "samples", "max_ratio"};
  const SimState s = rest_state(make_grid(c.dim, c.nx));
  for (InequalityId iid : {InequalityId::Hodge, InequalityId::EllipticI, InequalityId::EllipticII, InequalityId::Tensor,
                           InequalityId::Theta}) {
    const int r = iid == InequalityId::Hodge ? 1 : 2;
    const auto sw = inequality_sweep(iid, r, samples, c.seed, s);
    iq.rows.push_back({inequality_name(iid), std::to_string(r), std::to_string(c.nx), std::to_string(sw.samples),
                       format_number(sw.max_ratio)});
  }
  emit_report(iq, ReportKind::Csv, (out / "inequalities.csv").string());
  std::cout << "verify: reports in " << c.out << "\n";
  return kExitOk;
}

int cmd_energies(const RunConfig& c, const std::string& input, int r, const std::string& source) {
  const fs::path out(c.out);
  std::vector<fs::path> files;
  if (fs::is_directory(input)) {
    for (const auto& e : fs::directory_iterator(input))
      if (e.path().extension() == ".mhdl") files.push_back(e.path());
  } else if (fs::exists(input)) {
    files.push_back(input);
  }
  if (files.empty()) throw Error(ErrorKind::Config, "energies: no snapshots found at '" + input + "'");
  std::sort(files.begin(), files.end());

  History h;
  for (const auto& f : files) {
    Snapshot s = read_snapshot(f.string(), h.grid);
    if (!h.grid) {
      h.grid = s.state.grid;
      h.eos.kappa = s.kappa;
      h.eos.lambda = s.lambda;
    }
    h.snapshots.push_back(std::move(s.state));
  }
  std::sort(h.snapshots.begin(), h.snapshots.end(), [](const SimState& a, const SimState& b) { return a.t < b.t; });
  h.interval = h.snapshots.size() > 1 ? h.snapshots[1].t - h.snapshots[0].t : 1.0;
  for (std::size_t i = 1; i < h.snapshots.size(); ++i)
    if (std::abs(h.snapshots[i].t - h.snapshots[0].t - i * h.interval) > 1e-6 * h.interval)
      throw Error(ErrorKind::Config, "energies: snapshots are not uniformly spaced in time");
  h.dt = h.interval;
  h.final_state = h.snapshots.back();

  EnergyOptions eo;
  eo.r = r;
  eo.source = source == "fd" ? DerivativeSource::TimeDifference : DerivativeSource::Taylor;
  Table t;
  for (const auto& s : h.snapshots) {
    const EnergyReport rep = higher_energy(h, s.t, eo);
    const auto cols = rep.columns();
    if (t.header.empty())
      for (const auto& [k, v] : cols) t.header.push_back(k);
    std::vector<double> vals;
    for (const auto& [k, v] : cols) vals.push_back(v);
    t.add(vals);
  }
  fs::create_directories(out);
  emit_report(t, ReportKind::Csv, (out / "energies.csv").string());
  std::cout << "energies: " << t.rows.size() << " rows in " << c.out << "\n";
  return kExitOk;
}

bool config_kind(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config:
    case ErrorKind::Io:
    case ErrorKind::Integrity:
    case ErrorKind::Version:
    case ErrorKind::Range:
    case ErrorKind::Precondition:
      return true;
    default:
      return false;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"mhdl: free-boundary MHD flow-map solver, monitors and verification drivers"};
  app.require_subcommand(1);
  Common sim, ini, lim, ver, ene;
  std::string solver = "auto", input, source = "taylor";
  int samples = 20, r = 1;
  bool no_discrete = false, check_run = false;

  auto* s1 = app.add_subcommand("simulate", "run the compressible system and write snapshots and monitors");
  sim.attach(s1);
  s1->add_option("--solver", solver, "ladder solver for compatible data: auto, fixed, newton");
  auto* s2 = app.add_subcommand("init-data", "construct compatible initial data and its trace table");
  ini.attach(s2);
  s2->add_option("--solver", solver, "ladder solver: auto, fixed, newton");
  s2->add_flag("--check-run", check_run, "also differentiate the boundary rates of a short run");
  auto* s3 = app.add_subcommand("limit-sweep", "compressible runs against the incompressible reference over kappa");
  lim.attach(s3);
  auto* s4 = app.add_subcommand("verify", "commutator identities and inequality ratios");
  ver.attach(s4);
  s4->add_option("--samples", samples, "random fields per inequality");
  s4->add_flag("--no-discrete", no_discrete, "skip the refinement study on runs");
  auto* s5 = app.add_subcommand("energies", "energy report from a directory of snapshots");
  ene.attach(s5);
  s5->add_option("--input", input, "snapshot file or directory")->required();
  s5->add_option("--r", r, "energy order");
  s5->add_option("--source", source, "time derivatives: taylor or fd");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  std::string out_dir;
  try {
    if (s1->parsed()) {
      const RunConfig c = sim.resolve();
      out_dir = c.out;
      return cmd_simulate(c, solver);
    }
    if (s2->parsed()) {
      RunConfig c = ini.resolve();
      out_dir = c.out;
      if (ini.config.empty()) c.source = "rotation";
      return cmd_init_data(c, solver, check_run);
    }
    if (s3->parsed()) {
      RunConfig c = lim.resolve();
      out_dir = c.out;
      return cmd_limit_sweep(c);
    }
    if (s4->parsed()) {
      const RunConfig c = ver.resolve();
      out_dir = c.out;
      return cmd_verify(c, samples, !no_discrete);
    }
    if (s5->parsed()) {
      const RunConfig c = ene.resolve();
      out_dir = c.out;
      if (r < 0 || r > 2) throw Error(ErrorKind::Config, "energies: r must be 0..2");
      if (source != "taylor" && source != "fd") throw Error(ErrorKind::Config, "energies: source must be taylor or fd");
      return cmd_energies(c, input, r, source);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (config_kind(e.kind())) return kExitConfig;
    if (!out_dir.empty() && !fs::exists(fs::path(out_dir) / "diagnostic.txt")) {
      try {
        write_diagnostic(out_dir, e.what(), nullptr, nullptr);
      } catch (...) {
      }
    }
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace mhdl
