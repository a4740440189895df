#pragma once

#include <vector>

namespace mhdl {

// Diagonal-norm summation-by-parts first derivative on a uniform line with unit spacing.
// order 4: (2,4) pair, second-order closures; order 6: (3,6) pair, third-order closures.
class Sbp {
 public:
  explicit Sbp(int interior_order = 6);

  int interior_order() const { return order_; }
  int closure_rows() const { return nb_; }
  int closure_width() const { return w_; }
  int half_width() const { return static_cast<int>(c_.size()); }
  // smallest line on which both closures see genuine interior rows
  int min_points() const { return nb_ + w_; }

  // quadrature weight of point i on a line of n points
  double weight(int i, int n) const {
    if (i < nb_) return h_[i];
    if (i >= n - nb_) return h_[n - 1 - i];
    return 1.0;
  }

  // out[i*so] = sum_j D_ij in[j*si]
  template <class T>
  void apply(const T* in, int si, int n, T* out, int so) const {
    for (int i = 0; i < nb_; ++i) {
      T acc = in[0] * q_[i][0];
      for (int j = 1; j < w_; ++j) acc = acc + in[j * si] * q_[i][j];
      out[i * so] = acc;
    }
    const int m = half_width();
    for (int i = nb_; i < n - nb_; ++i) {
      T acc = (in[(i + 1) * si] - in[(i - 1) * si]) * c_[0];
      for (int k = 2; k <= m; ++k) acc = acc + (in[(i + k) * si] - in[(i - k) * si]) * c_[k - 1];
      out[i * so] = acc;
    }
    for (int i = 0; i < nb_; ++i) {
      const int r = n - 1 - i;
      T acc = in[(n - 1) * si] * (-q_[i][0]);
      for (int j = 1; j < w_; ++j) acc = acc + in[(n - 1 - j) * si] * (-q_[i][j]);
      out[r * so] = acc;
    }
  }

  // dense row of the operator on n points (used for sparse assembly)
  std::vector<std::pair<int, double>> row(int i, int n) const;

 private:
  int order_;
  int nb_;
  int w_;
  std::vector<double> h_;
  std::vector<std::vector<double>> q_;
  std::vector<double> c_;
};

}  // namespace mhdl
