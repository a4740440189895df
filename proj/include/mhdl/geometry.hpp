#pragma once

#include <memory>
#include <vector>

#include "mhdl/reference_calculus.hpp"
#include "mhdl/types.hpp"

namespace mhdl {

constexpr double kConditionLimit = 1e8;

// Geometry of one configuration x(y). Tensors with Latin indices are Cartesian (Eulerian);
// the metric g and the conormal carry label indices. Rank-2 fields are stored as d*d
// component arrays, index i*d+j.
struct GeometryCache {
  GridPtr grid;
  std::shared_ptr<const ReferenceCalculus> calculus;
  int d = 2;
  VectorField x;
  ReferenceCalculus::Chart chart;  // dx/dy, its inverse and determinant (the volume factor J)
  std::vector<ScalarField> g, ginv;  // per node
  VectorField normal;                // unit normal field; on the boundary the outward normal, extended inward
  VectorField conormal;              // boundary slots: N_a = (dx^i/dy^a) N_i
  std::vector<ScalarField> gamma;    // boundary slots: delta - N N
  std::vector<ScalarField> theta;    // boundary slots: second fundamental form
  ScalarField sigma;                 // boundary slots: mean curvature (trace of theta)
  ScalarField dist, eta;             // per node
  std::vector<ScalarField> q;        // per node: delta - eta^2 N N
  double curvature_bound = 0.0;      // sup |theta|
  double boundary_diameter = 0.0;
  double iota0 = 0.0;                // injectivity radius lower bound
  double d0 = 0.0;                   // cutoff depth
};

// lower bound min(l1/2, 1/K0) for the normal injectivity radius
double injectivity_bound(double K0, double l1);

// quintic smoothstep: 1 for dist <= d0/4, 0 for dist >= d0/2
double cutoff(double dist, double d0);

GeometryCache compute_geometry(GridPtr grid, const VectorField& x);

struct MetricRates {
  std::vector<ScalarField> dg, dginv;  // per node
  VectorField dconormal;               // boundary slots
  ScalarField volume_rate;             // div u, per node
  ScalarField surface_rate;            // boundary slots: gamma^{ij} d_i u_j
  ScalarField normal_motion_rate;      // boundary slots: sigma (u . N)
};
MetricRates metric_rates(const GeometryCache& cache, const VectorField& u);

// Tensor of rank r on the boundary slots, d^r components.
struct BoundaryTensor {
  int rank = 0;
  std::vector<ScalarField> comp;
};
BoundaryTensor project(const GeometryCache& cache, const BoundaryTensor& alpha);

// |Pi Hess q - theta N.grad q| per boundary slot for q vanishing on the boundary
ScalarField projection_identity_residual(const GeometryCache& cache, const ScalarField& q, double trace_tol = 1e-10);

// Cartesian Hessian of a scalar at boundary slots, via two chain-rule derivatives
std::vector<ScalarField> boundary_hessian(const GeometryCache& cache, const ScalarField& q);

}  // namespace mhdl
