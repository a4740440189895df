#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mhdl/dynamics.hpp"
#include "mhdl/series.hpp"

namespace mhdl {

// ---- commutator identities -------------------------------------------------
//
// D_t is the time derivative at fixed label, d_i the Eulerian derivative.
//   DtGradR     [D_t, d^r] f      = sum_{s<r} d^s [D_t, d] d^{r-s-1} f,  [D_t, d_i] g = -(d_i u^k) d_k g
//   GradDtK     [d_i, D_t^k] f    = [d_i, D_t] D_t^{k-1} f + D_t [d_i, D_t^{k-1}] f
//   DtkBdot     [D_t^k, B.d] f    = sum_{j<k} C(k,j) (D_t^{k-j} B^l) d_l D_t^j f + sum_j C(k,j) (D_t^{k-j} B^l) [D_t^j, d_l] f
//   DtkLaplace  [D_t^m, Lap] f,   m = r - 1
// Right-hand sides are generated by symbolic expansion into products of factors d^a D_t^j (u | B | f).
enum class CommutatorId { DtGradR, GradDtK, DtkBdot, DtkLaplace };

const char* commutator_name(CommutatorId id);
CommutatorId commutator_from_name(const std::string& name);

struct SymFactor {
  char field = 'f';        // 'u', 'B' or 'f'
  int comp = -1;           // component label for u and B, -1 for the scalar test field
  int dt = 0;              // number of D_t applied first
  std::vector<int> d;      // derivative labels applied after, outermost first
};
struct SymTerm {
  double coeff = 1.0;
  std::vector<SymFactor> factors;
};
// Labels 0..free-1 are free indices; labels free..labels-1 are summed over 0..dim-1.
struct Expansion {
  int free = 0;
  int labels = 0;
  std::vector<SymTerm> terms;
};

// number of free indices and supported order range per identity
int free_indices(CommutatorId id);
std::pair<int, int> supported_orders(CommutatorId id);

// right-hand side of the identity (throws Range outside the supported orders)
Expansion commutator_expansion(CommutatorId id, int order);
// merges terms that agree up to renaming of summed labels
Expansion simplify(const Expansion& e);
std::string describe(const Expansion& e);

struct IdentityCase {
  CommutatorId id = CommutatorId::DtGradR;
  int order = 1;             // r for DtGradR and DtkLaplace, k otherwise
  std::vector<int> indices;  // values of the free indices
  int test_component = -1;   // -1: the scalar test field; otherwise that component of B is the test field
};

struct CommutatorResult {
  double residual = 0.0;  // max |lhs - rhs|
  double scale = 0.0;     // max of |first lhs term|, |second lhs term|
  double relative = 0.0;  // residual / scale (0 when scale is 0)
};

// Polynomial flow x = y + t U(y) + t^2/2 V(y) + t^3/6 W(y) with polynomial test fields, differentiated
// exactly through truncated Taylor series.
struct PolynomialFlow {
  int dim = 2;
  // coefficient lists over monomials in (t, y_1..y_d): exponent tuple -> value
  struct Poly {
    std::vector<std::pair<std::vector<int>, double>> terms;
  };
  std::vector<Poly> x, B;
  Poly f;
};
// random polynomial flow; velocity_degree is the spatial degree of U and V (1 gives linear velocity)
PolynomialFlow random_polynomial_flow(int dim, std::uint64_t seed, int velocity_degree = 2, int field_degree = 4,
                                      double amplitude = 0.3);

// point = (t, y_1, .., y_d)
CommutatorResult commutator_residual(const IdentityCase& c, const PolynomialFlow& flow, const std::vector<double>& point);
// same, against a caller-supplied right-hand side
CommutatorResult commutator_residual(const IdentityCase& c, const Expansion& rhs, const PolynomialFlow& flow,
                                     const std::vector<double>& point);

// Discrete evaluation on a run: D_t by time differences at fixed label, d by the chain-rule frame
// derivative, max over nodes whose reference position lies in |y|_inf <= probe. The test field is p
// or a component of B.
CommutatorResult commutator_residual(const IdentityCase& c, const History& h, double t, double probe = 0.1);

struct CommutatorStudy {
  std::vector<double> spacing;   // grid spacing per run
  std::vector<double> residual;  // max residual per run
  std::vector<double> orders;    // log2 ratios between consecutive runs
  double max_residual = 0.0;
  double order = 0.0;            // min of orders
};
// each history is a refinement of the previous one, evaluated at the same time t
CommutatorStudy commutator_refinement(const IdentityCase& c, const std::vector<const History*>& runs, double t,
                                      double probe = 0.1);

// ---- inequality monitors ----------------------------------------------------
//
// Both sides are assembled on the configuration of the given state; |.|_dOmega is the L2 norm over
// the boundary, ||.|| the L2 norm over the domain, all derivatives Eulerian.
//   Hodge        int |d beta|^2  vs  int (N N gamma d beta d beta + |div beta|^2 + |curl beta|^2 + K^2 |beta|^2)
//                with beta = d^r w for a vector field w, r = 0 or 1 (gamma acts on the indices of d^r)
//   EllipticI    ||d^r q|| + |d^r q|_dOmega  vs  sum_{s<=r} |Pi d^s q|_dOmega + sum_{s<=r-1} ||d^s Lap q||
//   EllipticII   ||d^r q|| + |d^{r-1} q|_dOmega  vs  delta sum_{s<=r} |Pi d^s q|_dOmega + 1/delta sum_{s<=r-2} ||d^s Lap q||
//   Tensor       |Pi d^2 q|_dOmega  vs  |theta grad_N q|_dOmega + |d q|_dOmega      (q = 0 on the boundary, r = 2)
//   Theta        |theta|_dOmega  vs  |Pi d^2 P|_dOmega + |d P|_dOmega                (RT margin > 0, r = 2)
enum class InequalityId { Hodge, EllipticI, EllipticII, Tensor, Theta };

const char* inequality_name(InequalityId id);
InequalityId inequality_from_name(const std::string& name);

struct InequalityCase {
  InequalityId id = InequalityId::EllipticI;
  int r = 2;
  double delta = 1.0;          // EllipticII only
  ScalarField q;               // scalar sample (EllipticI/II, Tensor); total pressure for Theta
  VectorField w;               // vector sample (Hodge)
  double trace_tol = 1e-10;    // boundary-vanishing tolerance, relative to max |q|
};

struct InequalityResult {
  double lhs = 0.0, rhs = 0.0, ratio = 0.0;
  bool vacuous = false;  // lhs = rhs = 0
};

InequalityResult inequality_ratio(const InequalityCase& c, const SimState& s);

struct InequalitySweep {
  int samples = 0;
  double max_ratio = 0.0;
  std::vector<double> ratios;
};
// n random smooth fields (boundary-vanishing where the inequality requires it) on the configuration of s
InequalitySweep inequality_sweep(InequalityId id, int r, int n, std::uint64_t seed, const SimState& s,
                                 double delta = 1.0);

}  // namespace mhdl
