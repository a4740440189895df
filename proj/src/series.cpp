#include "mhdl/series.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <mutex>
#include <stdexcept>

namespace mhdl {

struct Series::Layout {
  int nv = 0, degree = 0;
  std::vector<std::vector<int>> exps;          // index -> exponent tuple
  std::vector<int> total;                      // index -> total degree
  std::map<std::vector<int>, int> index;
  std::vector<std::vector<int>> shift;         // shift[v][i]: index of exps[i] - e_v, or -1
  std::vector<std::vector<int>> up;            // up[v][i]: index of exps[i] + e_v, or -1
  std::vector<std::array<int, 3>> products;    // (i, j, k) with exps[i] + exps[j] = exps[k]
};

namespace {

void enumerate(int nv, int degree, std::vector<int>& cur, int v, int left, std::vector<std::vector<int>>& out) {
  if (v == nv) {
    out.push_back(cur);
    return;
  }
  for (int e = 0; e <= left; ++e) {
    cur[v] = e;
    enumerate(nv, degree, cur, v + 1, left - e, out);
  }
  cur[v] = 0;
}

}  // namespace

std::shared_ptr<const Series::Layout> Series::layout(int nv, int degree) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const Layout>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find({nv, degree});
  if (it != cache.end()) return it->second;

  auto L = std::make_shared<Layout>();
  L->nv = nv;
  L->degree = degree;
  std::vector<int> cur(nv, 0);
  enumerate(nv, degree, cur, 0, degree, L->exps);
  auto tot = [](const std::vector<int>& e) {
    int s = 0;
    for (int x : e) s += x;
    return s;
  };
  std::stable_sort(L->exps.begin(), L->exps.end(),
                   [&](const std::vector<int>& a, const std::vector<int>& b) { return tot(a) < tot(b); });
  for (std::size_t i = 0; i < L->exps.size(); ++i) {
    L->index[L->exps[i]] = static_cast<int>(i);
    L->total.push_back(tot(L->exps[i]));
  }
  L->shift.assign(nv, std::vector<int>(L->exps.size(), -1));
  L->up.assign(nv, std::vector<int>(L->exps.size(), -1));
  for (std::size_t i = 0; i < L->exps.size(); ++i)
    for (int v = 0; v < nv; ++v) {
      auto e = L->exps[i];
      if (e[v] > 0) {
        --e[v];
        L->shift[v][i] = L->index.at(e);
        ++e[v];
      }
      ++e[v];
      auto f = L->index.find(e);
      if (f != L->index.end()) L->up[v][i] = f->second;
    }
  for (std::size_t i = 0; i < L->exps.size(); ++i)
    for (std::size_t j = 0; j < L->exps.size(); ++j) {
      if (L->total[i] + L->total[j] > degree) continue;
      std::vector<int> e(nv);
      for (int v = 0; v < nv; ++v) e[v] = L->exps[i][v] + L->exps[j][v];
      L->products.push_back({static_cast<int>(i), static_cast<int>(j), L->index.at(e)});
    }
  cache[{nv, degree}] = L;
  return L;
}

Series::Series(std::shared_ptr<const Layout> layout, double constant)
    : L_(std::move(layout)), c_(L_->exps.size(), 0.0), valid_(L_->degree) {
  c_[0] = constant;
}

Series Series::variable(std::shared_ptr<const Layout> layout, int v, double point) {
  Series s(layout, point);
  std::vector<int> e(layout->nv, 0);
  e[v] = 1;
  s.c_[layout->index.at(e)] = 1.0;
  return s;
}

int Series::variables() const { return L_->nv; }
int Series::degree() const { return valid_; }

double Series::coefficient(const std::vector<int>& exponent) const {
  auto it = L_->index.find(exponent);
  return it == L_->index.end() ? 0.0 : c_[it->second];
}

Series Series::derivative(int v) const {
  if (valid_ <= 0) throw std::range_error("series: derivative beyond the truncation degree");
  Series out(L_, 0.0);
  out.valid_ = valid_ - 1;
  for (std::size_t i = 0; i < c_.size(); ++i) {
    const int j = L_->up[v][i];
    if (j < 0 || L_->total[i] >= valid_) continue;
    out.c_[i] = c_[j] * L_->exps[j][v];
  }
  return out;
}

Series& Series::operator+=(const Series& o) {
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  valid_ = std::min(valid_, o.valid_);
  return *this;
}
Series& Series::operator-=(const Series& o) {
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  valid_ = std::min(valid_, o.valid_);
  return *this;
}
Series& Series::operator*=(double s) {
  for (double& x : c_) x *= s;
  return *this;
}

Series operator*(const Series& a, const Series& b) {
  Series out(a.L_, 0.0);
  out.valid_ = std::min(a.valid_, b.valid_);
  for (const auto& [i, j, k] : a.L_->products) out.c_[k] += a.c_[i] * b.c_[j];
  return out;
}

Series Series::inverse() const {
  if (c_[0] == 0.0) throw std::domain_error("series: inverse of a series with zero constant term");
  // 1/(c0 (1 + e)) = (1/c0) sum (-e)^k, e has no constant term
  Series e = *this * (1.0 / c_[0]);
  e.c_[0] = 0.0;
  Series term(L_, 1.0), sum(L_, 1.0);
  term.valid_ = sum.valid_ = valid_;
  for (int k = 1; k <= L_->degree; ++k) {
    term = term * e * -1.0;
    sum += term;
  }
  return sum * (1.0 / c_[0]);
}

}  // namespace mhdl
