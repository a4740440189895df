#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "mhdl/grid.hpp"
#include "mhdl/types.hpp"

namespace testing {

inline double max_abs(const mhdl::ScalarField& f) {
  double m = 0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

inline double max_abs_diff(const mhdl::ScalarField& a, const mhdl::ScalarField& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// sample a function of the reference position at every node
inline mhdl::ScalarField sample(const mhdl::Grid& g, const std::function<double(const double*)>& f) {
  mhdl::ScalarField out(g.size());
  double y[3] = {0, 0, 0};
  for (std::size_t k = 0; k < g.size(); ++k) {
    for (int i = 0; i < g.dim(); ++i) y[i] = g.reference()[i][k];
    out[k] = f(y);
  }
  return out;
}

inline double r2(const double* y, int d) {
  double s = 0;
  for (int i = 0; i < d; ++i) s += y[i] * y[i];
  return s;
}

}  // namespace testing
