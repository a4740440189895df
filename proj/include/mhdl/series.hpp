#pragma once

#include <memory>
#include <vector>

namespace mhdl {

// Truncated multivariate Taylor series sum_a c_a z^a, |a| <= degree, in nv variables.
// Coefficients are stored by graded index; the tables are shared per (nv, degree).
class Series {
 public:
  struct Layout;

  Series() = default;
  Series(std::shared_ptr<const Layout> layout, double constant = 0.0);

  static std::shared_ptr<const Layout> layout(int nv, int degree);
  // z_v around the expansion point, i.e. the series of (point_v + z_v)
  static Series variable(std::shared_ptr<const Layout> layout, int v, double point);

  int variables() const;
  int degree() const;
  double value() const { return c_.empty() ? 0.0 : c_[0]; }
  // partial derivative in variable v (the top degree becomes unreliable and is dropped)
  Series derivative(int v) const;
  Series inverse() const;
  // coefficient for an exponent tuple
  double coefficient(const std::vector<int>& exponent) const;

  Series& operator+=(const Series& o);
  Series& operator-=(const Series& o);
  Series& operator*=(double s);
  friend Series operator+(Series a, const Series& b) { return a += b; }
  friend Series operator-(Series a, const Series& b) { return a -= b; }
  friend Series operator*(Series a, double s) { return a *= s; }
  friend Series operator*(double s, Series a) { return a *= s; }
  friend Series operator*(const Series& a, const Series& b);
  friend Series operator-(Series a) { return a *= -1.0; }

 private:
  std::shared_ptr<const Layout> L_;
  std::vector<double> c_;
  int valid_ = 0;  // coefficients of total degree <= valid_ are exact
};

}  // namespace mhdl
