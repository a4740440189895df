#pragma once

#include <functional>
#include <vector>

#include "mhdl/eos.hpp"
#include "mhdl/rhs.hpp"
#include "mhdl/state.hpp"
#include "mhdl/taylor.hpp"

namespace mhdl {

constexpr double kCflWave = 0.4;
constexpr double kCflDiffusion = 0.2;

class InstabilityError : public Error {
 public:
  InstabilityError(const std::string& what, SimState last) : Error(ErrorKind::Instability, what), last_(std::move(last)) {}
  const SimState& last_finite_state() const { return last_; }

 private:
  SimState last_;
};

// Rates of (x, u, B, p) for a double-valued state.
FieldSet<double> mhd_rhs(const SimState& s, const EosParams& eos, NaturalRates<double>* natural = nullptr);

// Classical RK4; p and B stay zero on the boundary because their boundary rates vanish.
SimState step(const SimState& s, const EosParams& eos, double dt);

// smallest node spacing of the current configuration
double min_spacing(const Grid& g, const VectorField& x);
double cfl_dt(const SimState& s, const EosParams& eos);

// Exact time derivatives of the semi-discrete system at the state's time, orders 0..Jet::N-1,
// by Taylor-series recursion. out.p[i].derivative(k) is d^k p_i / dt^k.
FieldSet<Jet> taylor_expansion(const SimState& s, const EosParams& eos, int order = Jet::N - 1);

struct History {
  GridPtr grid;
  EosParams eos;
  double dt = 0.0;        // integrator step
  double interval = 0.0;  // snapshot spacing
  std::vector<SimState> snapshots;  // uniformly spaced, first one is the initial state
  SimState final_state;             // state at t_final (also a snapshot when the spacing divides the run)

  std::size_t index_of(double t) const;  // nearest snapshot, must lie within interval/4
};

struct RunOptions {
  double t_final = 0.0;
  double dt = 0.0;             // <= 0: CFL-limited step
  double dt_scale = 1.0;       // multiplies the CFL step (refinement studies)
  int snapshot_every = 1;      // steps between stored snapshots
  std::function<void(const SimState&, int)> monitor;  // called after every step (and at step 0)
};

History run(const SimState& s0, const EosParams& eos, const RunOptions& opt);

}  // namespace mhdl
