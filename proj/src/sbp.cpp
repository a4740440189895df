#include "mhdl/sbp.hpp"

#include <stdexcept>

namespace mhdl {

Sbp::Sbp(int interior_order) : order_(interior_order) {
  if (interior_order == 4) {
    nb_ = 4;
    w_ = 6;
    h_ = {17.0 / 48, 59.0 / 48, 43.0 / 48, 49.0 / 48};
    q_ = {
        {-24.0 / 17, 59.0 / 34, -4.0 / 17, -3.0 / 34, 0.0, 0.0},
        {-0.5, 0.0, 0.5, 0.0, 0.0, 0.0},
        {4.0 / 43, -59.0 / 86, 0.0, 59.0 / 86, -4.0 / 43, 0.0},
        {3.0 / 98, 0.0, -59.0 / 98, 0.0, 32.0 / 49, -4.0 / 49},
    };
    c_ = {2.0 / 3, -1.0 / 12};
  } else if (interior_order == 6) {
    // One-parameter family; free entry Q(4,5) = 0.70127127127127 minimises the closure truncation error.
    nb_ = 6;
    w_ = 9;
    h_ = {13649.0 / 43200, 12013.0 / 8640, 2711.0 / 4320, 5359.0 / 4320, 7877.0 / 8640, 43801.0 / 43200};
    q_ = {
        {-1.5825335189391163, 2.0333786787006765, -0.1415128587448743, -0.4503983065782706,
         0.10448806928404113, 0.036577936277543945, 0.0, 0.0, 0.0},
        {-0.46205919563115844, 0.0, 0.2872586229782509, 0.25881608737683154, -0.06911206553262365,
         -0.014903449191300357, 0.0, 0.0, 0.0},
        {0.07124710472182919, -0.6364510951379063, 0.0, 0.6062355236091459, -0.022902190275812615,
         -0.018129342917256215, 0.0, 0.0, 0.0},
        {0.11471331379897026, -0.2900874843868145, -0.30668119136114846, 0.0, 0.5202622850504816,
         -0.05164226551611848, 0.013435342414629596, 0.0, 0.0},
        {-0.036210680656541254, 0.10540094493378291, 0.01576433612739063, -0.7079054425759885, 0.0,
         0.7691994139626473, -0.1645296432652025, 0.01828107147391139, 0.0},
        {-0.011398193015049823, 0.020437334208704278, 0.011220896474665327, 0.06318369464187551,
         -0.6916490244268136, 0.0, 0.7397091390607521, -0.1479418278121504, 0.016437980868016712},
    };
    c_ = {3.0 / 4, -3.0 / 20, 1.0 / 60};
  } else {
    throw std::invalid_argument("sbp: interior order must be 4 or 6");
  }
}

std::vector<std::pair<int, double>> Sbp::row(int i, int n) const {
  std::vector<std::pair<int, double>> r;
  if (i < nb_) {
    for (int j = 0; j < w_; ++j)
      if (q_[i][j] != 0.0) r.emplace_back(j, q_[i][j]);
  } else if (i >= n - nb_) {
    const int k = n - 1 - i;
    for (int j = 0; j < w_; ++j)
      if (q_[k][j] != 0.0) r.emplace_back(n - 1 - j, -q_[k][j]);
  } else {
    for (int k = 1; k <= half_width(); ++k) {
      r.emplace_back(i - k, -c_[k - 1]);
      r.emplace_back(i + k, c_[k - 1]);
    }
  }
  return r;
}

}  // namespace mhdl
