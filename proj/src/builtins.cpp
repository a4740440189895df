#include "mhdl/builtins.hpp"

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <random>

namespace mhdl {

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"rest", "rotation", "solenoidal-random", "bessel-mode"};
  return names;
}

double bessel_j0_first_zero() {
  auto f = [](double r) { return std::cyl_bessel_j(0.0, r); };
  boost::math::tools::eps_tolerance<double> tol(52);
  std::uintmax_t it = 100;
  auto br = boost::math::tools::toms748_solve(f, 2.0, 3.0, tol, it);
  return 0.5 * (br.first + br.second);
}

namespace {

// cubic polynomial in the first two coordinates with seeded coefficients
struct Poly2 {
  double c[4][4] = {};
  double value(double x, double y) const {
    double s = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; i + j < 4; ++j) s += c[i][j] * std::pow(x, i) * std::pow(y, j);
    return s;
  }
  double dx(double x, double y) const {
    double s = 0;
    for (int i = 1; i < 4; ++i)
      for (int j = 0; i + j < 4; ++j) s += i * c[i][j] * std::pow(x, i - 1) * std::pow(y, j);
    return s;
  }
  double dy(double x, double y) const {
    double s = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = 1; i + j < 4; ++j) s += j * c[i][j] * std::pow(x, i) * std::pow(y, j - 1);
    return s;
  }
};

Poly2 random_poly(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Poly2 p;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; i + j < 4; ++j) p.c[i][j] = dist(rng);
  return p;
}

}  // namespace

BuiltinData make_builtin(const std::string& name, const Grid& grid, const BuiltinOptions& opt) {
  const int d = grid.dim();
  const std::size_t n = grid.size();
  const auto& y = grid.reference();
  BuiltinData out;
  out.name = name;
  out.v = zero_vector(d, n);
  out.B = zero_vector(d, n);
  out.p.assign(n, 0.0);
  auto r2 = [&](std::size_t i) {
    double s = 0;
    for (int k = 0; k < d; ++k) s += y[k][i] * y[k][i];
    return s;
  };

  if (name == "rest") return out;

  if (name == "rotation") {
    // rigid rotation about the last axis pair; incompressible pressure w^2 (r^2 - 1)/2
    for (std::size_t i = 0; i < n; ++i) {
      out.v[0][i] = -opt.omega * y[1][i];
      out.v[1][i] = opt.omega * y[0][i];
      const double rr = y[0][i] * y[0][i] + y[1][i] * y[1][i];
      out.p[i] = 0.5 * opt.omega * opt.omega * (rr - 1.0);
    }
    for (int b : grid.boundary_nodes()) out.p[b] = 0.0;
    return out;
  }

  if (name == "solenoidal-random") {
    std::mt19937_64 rng(opt.seed);
    const Poly2 stream = random_poly(rng), potential = random_poly(rng);
    const double a = opt.strain;
    for (std::size_t i = 0; i < n; ++i) {
      const double x0 = y[0][i], x1 = y[1][i];
      // strain (x, -y) in 2D, (x, y, -2z)/2 in 3D; both divergence free
      if (d == 2) {
        out.v[0][i] = a * x0;
        out.v[1][i] = -a * x1;
      } else {
        out.v[0][i] = 0.5 * a * x0;
        out.v[1][i] = 0.5 * a * x1;
        out.v[2][i] = -a * y[2][i];
      }
      out.v[0][i] += opt.perturbation * stream.dy(x0, x1);
      out.v[1][i] -= opt.perturbation * stream.dx(x0, x1);

      // B = rotated gradient of (1 - r^2)^4 P, vanishing with its first derivatives on the boundary
      const double s = 1.0 - r2(i);
      const double s3 = s * s * s, s4 = s3 * s;
      const double ax = -8.0 * x0 * s3 * potential.value(x0, x1) + s4 * potential.dx(x0, x1);
      const double ay = -8.0 * x1 * s3 * potential.value(x0, x1) + s4 * potential.dy(x0, x1);
      out.B[0][i] = opt.field * ay;
      out.B[1][i] = -opt.field * ax;
      // pressure of the pure strain flow, a^2 (1 - r^2)/2 (2D)
      out.p[i] = d == 2 ? 0.5 * a * a * s : 0.0;
    }
    for (int b : grid.boundary_nodes()) {
      out.p[b] = 0.0;
      for (int k = 0; k < d; ++k) out.B[k][b] = 0.0;
    }
    return out;
  }

  if (name == "bessel-mode") {
    const double j01 = bessel_j0_first_zero();
    for (std::size_t i = 0; i < n; ++i) {
      out.B[0][i] = opt.mode_amplitude * std::cyl_bessel_j(0.0, j01 * std::sqrt(r2(i)));
    }
    for (int b : grid.boundary_nodes()) out.B[0][b] = 0.0;
    return out;
  }

  throw Error(ErrorKind::Config, "unknown builtin '" + name + "'");
}

SimState state_from(GridPtr grid, const BuiltinData& data) {
  SimState s = rest_state(grid);
  s.u = data.v;
  s.B = data.B;
  s.p = data.p;
  return s;
}

}  // namespace mhdl
