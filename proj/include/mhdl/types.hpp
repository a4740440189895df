#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mhdl {

using ScalarField = std::vector<double>;
using VectorField = std::vector<ScalarField>;  // d components, each one value per node

enum class ErrorKind {
  Config,
  Orientation,
  Conditioning,
  Solver,
  Instability,
  Vacuum,
  Window,
  Range,
  Precondition,
  Integrity,
  Version,
  Divergence,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline VectorField zero_vector(int d, std::size_t n) { return VectorField(d, ScalarField(n, 0.0)); }

// Pairwise summation; fixed tree order keeps results reproducible bit for bit.
inline double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}
inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

}  // namespace mhdl
