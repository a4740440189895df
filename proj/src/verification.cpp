#include "mhdl/verification.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <tuple>

#include "mhdl/energies.hpp"
#include "mhdl/frame.hpp"

namespace mhdl {

namespace {

using Expr = std::vector<SymTerm>;

double binomial(int n, int k) {
  double c = 1;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

SymFactor factor(char field, int comp, int dt, std::vector<int> d = {}) {
  SymFactor f;
  f.field = field;
  f.comp = comp;
  f.dt = dt;
  f.d = std::move(d);
  return f;
}

// d_a of a product, by Leibniz
Expr apply_d(const Expr& e, int a) {
  Expr out;
  for (const SymTerm& t : e)
    for (std::size_t i = 0; i < t.factors.size(); ++i) {
      SymTerm n = t;
      n.factors[i].d.insert(n.factors[i].d.begin(), a);
      out.push_back(std::move(n));
    }
  return out;
}

// D_t d_{a1} Z = d_{a1} D_t Z - (d_{a1} u^n) d_n Z
Expr dt_factor(const SymFactor& F, int& labels) {
  if (F.d.empty()) {
    SymFactor G = F;
    ++G.dt;
    return {SymTerm{1.0, {G}}};
  }
  const int a = F.d.front();
  SymFactor inner = F;
  inner.d.erase(inner.d.begin());
  Expr out = apply_d(dt_factor(inner, labels), a);
  const int n = labels++;
  SymFactor moved = F;
  moved.d.front() = n;
  out.push_back(SymTerm{-1.0, {factor('u', n, 0, {a}), moved}});
  return out;
}

Expr apply_dt(const Expr& e, int& labels) {
  Expr out;
  for (const SymTerm& t : e)
    for (std::size_t i = 0; i < t.factors.size(); ++i) {
      const Expr sub = dt_factor(t.factors[i], labels);
      for (const SymTerm& s : sub) {
        SymTerm n;
        n.coeff = t.coeff * s.coeff;
        for (std::size_t j = 0; j < t.factors.size(); ++j)
          if (j != i) n.factors.push_back(t.factors[j]);
        n.factors.insert(n.factors.end(), s.factors.begin(), s.factors.end());
        out.push_back(std::move(n));
      }
    }
  return out;
}

void relabel(SymTerm& t, const std::function<int(int)>& map) {
  for (SymFactor& f : t.factors) {
    if (f.field != 'f') f.comp = map(f.comp);
    for (int& l : f.d) l = map(l);
  }
}

Expansion grad_dtk(int k) {
  // C_1 = (d_i u^n) d_n f;  C_k = (d_i u^n) d_n D_t^{k-1} f + D_t C_{k-1}
  Expansion e;
  e.free = 1;
  e.labels = 1;
  for (int j = 1; j <= k; ++j) {
    Expr next = apply_dt(e.terms, e.labels);
    const int n = e.labels++;
    next.push_back(SymTerm{1.0, {factor('u', n, 0, {0}), factor('f', -1, j - 1, {n})}});
    e.terms = std::move(next);
  }
  return e;
}

std::string label_name(int l, int free) {
  static const char* fr = "ijkl";
  static const char* dm = "abcdefghmnopqrstvwxyz";
  if (l < free) return std::string(1, fr[l % 4]);
  const int m = l - free;
  std::string s(1, dm[m % 21]);
  if (m >= 21) s += std::to_string(m / 21);
  return s;
}

}  // namespace

const char* commutator_name(CommutatorId id) {
  switch (id) {
    case CommutatorId::DtGradR:
      return "dt_gradr";
    case CommutatorId::GradDtK:
      return "grad_dtk";
    case CommutatorId::DtkBdot:
      return "dtk_bdot";
    case CommutatorId::DtkLaplace:
      return "dtk_laplace";
  }
  return "?";
}

CommutatorId commutator_from_name(const std::string& name) {
  for (CommutatorId id : {CommutatorId::DtGradR, CommutatorId::GradDtK, CommutatorId::DtkBdot, CommutatorId::DtkLaplace})
    if (name == commutator_name(id)) return id;
  throw Error(ErrorKind::Config, "unknown identity '" + name + "'");
}

int free_indices(CommutatorId id) {
  switch (id) {
    case CommutatorId::GradDtK:
      return 1;
    case CommutatorId::DtkBdot:
    case CommutatorId::DtkLaplace:
      return 0;
    case CommutatorId::DtGradR:
      break;
  }
  return -1;  // r, depends on the order
}

std::pair<int, int> supported_orders(CommutatorId id) {
  if (id == CommutatorId::DtkLaplace) return {2, 3};
  return {1, 3};
}

Expansion commutator_expansion(CommutatorId id, int order) {
  const auto [lo, hi] = supported_orders(id);
  if (order < lo || order > hi)
    throw Error(ErrorKind::Range, std::string(commutator_name(id)) + ": order " + std::to_string(order) +
                                      " outside the supported range " + std::to_string(lo) + ".." + std::to_string(hi));
  Expansion e;
  switch (id) {
    case CommutatorId::DtGradR: {
      const int r = order;
      e.free = e.labels = r;
      for (int s = 0; s < r; ++s) {
        const int n = e.labels++;
        std::vector<int> rest{n};
        for (int q = s + 1; q < r; ++q) rest.push_back(q);
        Expr t{SymTerm{-1.0, {factor('u', n, 0, {s}), factor('f', -1, 0, rest)}}};
        for (int q = s - 1; q >= 0; --q) t = apply_d(t, q);
        e.terms.insert(e.terms.end(), t.begin(), t.end());
      }
      break;
    }
    case CommutatorId::GradDtK:
      e = grad_dtk(order);
      break;
    case CommutatorId::DtkBdot: {
      const int k = order;
      e.free = 0;
      e.labels = 0;
      for (int j = 0; j < k; ++j) {
        const int l = e.labels++;
        e.terms.push_back(SymTerm{binomial(k, j), {factor('B', l, k - j), factor('f', -1, j, {l})}});
      }
      // D_t^j d_l f = d_l D_t^j f - [d_l, D_t^j] f
      for (int j = 1; j <= k; ++j) {
        const Expansion g = grad_dtk(j);
        const int l = e.labels;
        const int offset = e.labels + 1;
        for (SymTerm t : g.terms) {
          relabel(t, [&](int x) { return x == 0 ? l : x - 1 + offset; });
          t.coeff *= -binomial(k, j);
          t.factors.insert(t.factors.begin(), factor('B', l, k - j));
          e.terms.push_back(std::move(t));
        }
        e.labels = offset + g.labels - 1;
      }
      break;
    }
    case CommutatorId::DtkLaplace: {
      const int m = order - 1;
      e.free = 0;
      e.labels = 1;
      Expr t{SymTerm{1.0, {factor('f', -1, 0, {0, 0})}}};
      for (int j = 0; j < m; ++j) t = apply_dt(t, e.labels);
      // drop the leading term Lap D_t^m f
      for (const SymTerm& s : t) {
        if (s.factors.size() == 1 && s.factors[0].field == 'f' && s.factors[0].dt == m) continue;
        e.terms.push_back(s);
      }
      break;
    }
  }
  return simplify(e);
}

Expansion simplify(const Expansion& e) {
  using Key = std::vector<std::tuple<char, int, int, std::vector<int>>>;
  std::map<Key, double> acc;
  int labels = e.free;
  for (SymTerm t : e.terms) {
    // order-independent factor key first, then rename summed labels by first appearance
    auto shape = [&](const SymFactor& f) {
      std::vector<int> d;
      for (int l : f.d) d.push_back(l < e.free ? l : -1);
      return std::make_tuple(f.field, f.comp < e.free ? f.comp : -1, f.dt, d);
    };
    std::stable_sort(t.factors.begin(), t.factors.end(),
                     [&](const SymFactor& a, const SymFactor& b) { return shape(a) < shape(b); });
    std::map<int, int> rename;
    int next = e.free;
    auto map = [&](int l) {
      if (l < e.free || l < 0) return l;
      auto it = rename.find(l);
      if (it != rename.end()) return it->second;
      rename[l] = next;
      return next++;
    };
    relabel(t, map);
    labels = std::max(labels, next);
    Key k;
    for (SymFactor& f : t.factors) {
      std::sort(f.d.begin(), f.d.end());  // smooth fields: derivatives commute
      k.emplace_back(f.field, f.comp, f.dt, f.d);
    }
    std::sort(k.begin(), k.end());
    acc[k] += t.coeff;
  }
  Expansion out;
  out.free = e.free;
  out.labels = labels;
  for (const auto& [k, c] : acc) {
    if (c == 0.0) continue;
    SymTerm t;
    t.coeff = c;
    for (const auto& [field, comp, dt, d] : k) t.factors.push_back(factor(field, comp, dt, d));
    out.terms.push_back(std::move(t));
  }
  return out;
}

std::string describe(const Expansion& e) {
  std::ostringstream os;
  bool first = true;
  for (const SymTerm& t : e.terms) {
    os << (t.coeff < 0 ? (first ? "-" : " - ") : (first ? "" : " + "));
    if (std::abs(t.coeff) != 1.0) os << std::abs(t.coeff) << " ";
    for (std::size_t i = 0; i < t.factors.size(); ++i) {
      const SymFactor& f = t.factors[i];
      if (i) os << " ";
      os << "(";
      for (int l : f.d) os << "d" << label_name(l, e.free);
      if (!f.d.empty()) os << " ";
      if (f.dt == 1) os << "Dt ";
      if (f.dt > 1) os << "Dt^" << f.dt << " ";
      os << f.field;
      if (f.field != 'f') os << "^" << label_name(f.comp, e.free);
      os << ")";
    }
    first = false;
  }
  if (first) os << "0";
  return os.str();
}

namespace {

// evaluation of factor values and direct compositions on some set of points
class Backend {
 public:
  virtual ~Backend() = default;
  virtual int dim() const = 0;
  virtual std::size_t points() const = 0;
  virtual std::vector<double> factor(char field, int comp, int dt, const std::vector<int>& d) = 0;
  virtual std::pair<std::vector<double>, std::vector<double>> lhs(const IdentityCase& c) = 0;
};

std::vector<double> evaluate(const Expansion& e, const std::vector<int>& free_values, Backend& be) {
  const std::size_t np = be.points();
  const int d = be.dim();
  std::vector<double> total(np, 0.0);
  for (const SymTerm& t : e.terms) {
    std::vector<int> dummies;
    for (const SymFactor& f : t.factors) {
      if (f.field != 'f' && f.comp >= e.free) dummies.push_back(f.comp);
      for (int l : f.d)
        if (l >= e.free) dummies.push_back(l);
    }
    std::sort(dummies.begin(), dummies.end());
    dummies.erase(std::unique(dummies.begin(), dummies.end()), dummies.end());
    std::vector<int> value(e.labels, 0);
    for (int i = 0; i < e.free; ++i) value[i] = free_values[i];
    long combos = 1;
    for (std::size_t i = 0; i < dummies.size(); ++i) combos *= d;
    for (long c = 0; c < combos; ++c) {
      long rem = c;
      for (int l : dummies) {
        value[l] = static_cast<int>(rem % d);
        rem /= d;
      }
      std::vector<double> prod(np, t.coeff);
      for (const SymFactor& f : t.factors) {
        std::vector<int> dv;
        for (int l : f.d) dv.push_back(value[l]);
        std::sort(dv.begin(), dv.end());
        const auto v = be.factor(f.field, f.field == 'f' ? -1 : value[f.comp], f.dt, dv);
        for (std::size_t p = 0; p < np; ++p) prod[p] *= v[p];
      }
      for (std::size_t p = 0; p < np; ++p) total[p] += prod[p];
    }
  }
  return total;
}

void check_case(const IdentityCase& c, int dim) {
  const auto [lo, hi] = supported_orders(c.id);
  if (c.order < lo || c.order > hi)
    throw Error(ErrorKind::Range, std::string(commutator_name(c.id)) + ": order " + std::to_string(c.order) +
                                      " outside the supported range " + std::to_string(lo) + ".." + std::to_string(hi));
  const int nf = c.id == CommutatorId::DtGradR ? c.order : free_indices(c.id);
  if (static_cast<int>(c.indices.size()) != nf)
    throw Error(ErrorKind::Range, std::string(commutator_name(c.id)) + ": expected " + std::to_string(nf) +
                                      " free index values, got " + std::to_string(c.indices.size()));
  for (int i : c.indices)
    if (i < 0 || i >= dim) throw Error(ErrorKind::Range, "commutator: free index out of range");
  if (c.test_component >= dim) throw Error(ErrorKind::Range, "commutator: test component out of range");
}

CommutatorResult compare(const IdentityCase& c, const Expansion& e, Backend& be) {
  const auto rhs = evaluate(e, c.indices, be);
  const auto [a, b] = be.lhs(c);
  CommutatorResult r;
  for (std::size_t p = 0; p < rhs.size(); ++p) {
    r.residual = std::max(r.residual, std::abs(a[p] - b[p] - rhs[p]));
    r.scale = std::max({r.scale, std::abs(a[p]), std::abs(b[p])});
  }
  r.relative = r.scale > 0 ? r.residual / r.scale : 0.0;
  return r;
}

// ---- polynomial backend ----

class SeriesBackend final : public Backend {
 public:
  SeriesBackend(const PolynomialFlow& flow, const std::vector<double>& point, int test_component)
      : d_(flow.dim), tc_(test_component) {
    if (static_cast<int>(point.size()) != d_ + 1)
      throw Error(ErrorKind::Range, "commutator: evaluation point needs t and " + std::to_string(d_) + " coordinates");
    L_ = Series::layout(d_ + 1, 6);
    for (int v = 0; v <= d_; ++v) vars_.push_back(Series::variable(L_, v, point[v]));
    for (int i = 0; i < d_; ++i) {
      x_.push_back(poly(flow.x[i]));
      u_.push_back(x_[i].derivative(0));
      B_.push_back(poly(flow.B[i]));
    }
    f_ = poly(flow.f);
    // inverse Jacobian A[a][i] = dy^a/dx^i
    std::vector<std::vector<Series>> Dx(d_, std::vector<Series>(d_));
    for (int i = 0; i < d_; ++i)
      for (int a = 0; a < d_; ++a) Dx[i][a] = x_[i].derivative(a + 1);
    A_.assign(d_, std::vector<Series>(d_));
    if (d_ == 2) {
      const Series det = Dx[0][0] * Dx[1][1] - Dx[0][1] * Dx[1][0];
      const Series inv = det.inverse();
      A_[0][0] = Dx[1][1] * inv;
      A_[0][1] = -(Dx[0][1] * inv);
      A_[1][0] = -(Dx[1][0] * inv);
      A_[1][1] = Dx[0][0] * inv;
    } else {
      auto cof = [&](int i, int a) {
        const int i1 = (i + 1) % 3, i2 = (i + 2) % 3, a1 = (a + 1) % 3, a2 = (a + 2) % 3;
        return Dx[i1][a1] * Dx[i2][a2] - Dx[i1][a2] * Dx[i2][a1];
      };
      Series det = Dx[0][0] * cof(0, 0) + Dx[0][1] * cof(0, 1) + Dx[0][2] * cof(0, 2);
      const Series inv = det.inverse();
      for (int a = 0; a < 3; ++a)
        for (int i = 0; i < 3; ++i) A_[a][i] = cof(i, a) * inv;
    }
  }

  int dim() const override { return d_; }
  std::size_t points() const override { return 1; }

  std::vector<double> factor(char field, int comp, int dt, const std::vector<int>& d) override {
    Series s = base(field, comp);
    for (int j = 0; j < dt; ++j) s = Dt(s);
    for (auto it = d.rbegin(); it != d.rend(); ++it) s = D(*it, s);
    return {s.value()};
  }

  std::pair<std::vector<double>, std::vector<double>> lhs(const IdentityCase& c) override {
    const Series f = base('f', -1);
    Series a, b;
    switch (c.id) {
      case CommutatorId::DtGradR: {
        Series g = f, h = Dt(f);
        for (auto it = c.indices.rbegin(); it != c.indices.rend(); ++it) {
          g = D(*it, g);
          h = D(*it, h);
        }
        a = Dt(g);
        b = h;
        break;
      }
      case CommutatorId::GradDtK: {
        Series g = f, h = D(c.indices[0], f);
        for (int j = 0; j < c.order; ++j) {
          g = Dt(g);
          h = Dt(h);
        }
        a = D(c.indices[0], g);
        b = h;
        break;
      }
      case CommutatorId::DtkBdot: {
        Series g(L_, 0.0), h = f;
        for (int j = 0; j < c.order; ++j) h = Dt(h);
        b = Series(L_, 0.0);
        for (int l = 0; l < d_; ++l) {
          g += B_[l] * D(l, f);
          b += B_[l] * D(l, h);
        }
        for (int j = 0; j < c.order; ++j) g = Dt(g);
        a = g;
        break;
      }
      case CommutatorId::DtkLaplace: {
        Series g(L_, 0.0), h = f;
        for (int j = 0; j < c.order - 1; ++j) h = Dt(h);
        b = Series(L_, 0.0);
        for (int l = 0; l < d_; ++l) {
          g += D(l, D(l, f));
          b += D(l, D(l, h));
        }
        for (int j = 0; j < c.order - 1; ++j) g = Dt(g);
        a = g;
        break;
      }
    }
    return {{a.value()}, {b.value()}};
  }

 private:
  Series poly(const PolynomialFlow::Poly& p) const {
    Series s(L_, 0.0);
    for (const auto& [e, c] : p.terms) {
      Series m(L_, c);
      for (int v = 0; v <= d_; ++v)
        for (int k = 0; k < e[v]; ++k) m = m * vars_[v];
      s += m;
    }
    return s;
  }
  Series base(char field, int comp) const {
    if (field == 'u') return u_[comp];
    if (field == 'B') return B_[comp];
    return tc_ < 0 ? f_ : B_[tc_];
  }
  Series Dt(const Series& s) const { return s.derivative(0); }
  Series D(int i, const Series& s) const {
    Series out(L_, 0.0);
    for (int a = 0; a < d_; ++a) out += A_[a][i] * s.derivative(a + 1);
    return out;
  }

  int d_, tc_;
  std::shared_ptr<const Series::Layout> L_;
  std::vector<Series> vars_, x_, u_, B_;
  Series f_;
  std::vector<std::vector<Series>> A_;
};

// ---- discrete backend ----

class HistoryBackend final : public Backend {
 public:
  HistoryBackend(const History& h, double t, double probe, int test_component)
      : h_(h), t_(t), tc_(test_component), center_(h.snapshots.at(h.index_of(t))), F_(*h.grid, center_.x) {
    const auto& ref = h.grid->reference();
    for (std::size_t n = 0; n < h.grid->size(); ++n) {
      if (h.grid->on_boundary(static_cast<int>(n))) continue;
      bool in = true;
      for (int i = 0; i < h.grid->dim(); ++i) in = in && std::abs(ref[i][n]) <= probe + 1e-12;
      if (in) probe_.push_back(static_cast<int>(n));
    }
    if (probe_.empty()) throw Error(ErrorKind::Range, "commutator: probe region contains no nodes");
  }

  int dim() const override { return h_.grid->dim(); }
  std::size_t points() const override { return probe_.size(); }

  std::vector<double> factor(char field, int comp, int dt, const std::vector<int>& d) override {
    return restrict(full(field, comp, dt, d));
  }

  std::pair<std::vector<double>, std::vector<double>> lhs(const IdentityCase& c) override {
    const int d = dim();
    ScalarField a, b;
    auto per_snapshot = [&](int k, const std::function<ScalarField(const SimState&, const Frame&)>& op) {
      return material_derivative(
                 h_,
                 [&](const SimState& s) {
                   const Frame F(*s.grid, s.x);
                   return VectorField{op(s, F)};
                 },
                 k, t_)[0];
    };
    switch (c.id) {
      case CommutatorId::DtGradR:
        a = per_snapshot(1, [&](const SimState& s, const Frame& F) {
          ScalarField g = test(s);
          for (auto it = c.indices.rbegin(); it != c.indices.rend(); ++it) g = F.grad(g)[*it];
          return g;
        });
        b = full('f', -1, 1, c.indices);
        break;
      case CommutatorId::GradDtK:
        a = full('f', -1, c.order, c.indices);
        b = per_snapshot(c.order, [&](const SimState& s, const Frame& F) { return F.grad(test(s))[c.indices[0]]; });
        break;
      case CommutatorId::DtkBdot:
        a = per_snapshot(c.order, [&](const SimState& s, const Frame& F) {
          const auto g = F.grad(test(s));
          ScalarField out(s.size(), 0.0);
          for (int l = 0; l < d; ++l)
            for (std::size_t n = 0; n < s.size(); ++n) out[n] += s.B[l][n] * g[l][n];
          return out;
        });
        b.assign(center_.size(), 0.0);
        for (int l = 0; l < d; ++l) {
          const auto& g = full('f', -1, c.order, {l});
          for (std::size_t n = 0; n < b.size(); ++n) b[n] += center_.B[l][n] * g[n];
        }
        break;
      case CommutatorId::DtkLaplace:
        a = per_snapshot(c.order - 1, [&](const SimState& s, const Frame& F) {
          const auto g = F.grad(test(s));
          ScalarField out(s.size(), 0.0);
          for (int l = 0; l < d; ++l) {
            const auto gg = F.grad(g[l]);
            for (std::size_t n = 0; n < s.size(); ++n) out[n] += gg[l][n];
          }
          return out;
        });
        b.assign(center_.size(), 0.0);
        for (int l = 0; l < d; ++l) {
          const auto& g = full('f', -1, c.order - 1, {l, l});
          for (std::size_t n = 0; n < b.size(); ++n) b[n] += g[n];
        }
        break;
    }
    return {restrict(a), restrict(b)};
  }

 private:
  const ScalarField& test(const SimState& s) const { return tc_ < 0 ? s.p : s.B[tc_]; }

  const ScalarField& full(char field, int comp, int dt, const std::vector<int>& d) {
    const auto key = std::make_tuple(field, comp, dt, d);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    ScalarField v;
    if (d.empty()) {
      auto get = [&](const SimState& s) -> const ScalarField& {
        if (field == 'u') return s.u[comp];
        if (field == 'B') return s.B[comp];
        return test(s);
      };
      v = dt == 0 ? get(center_) : material_derivative(h_, [&](const SimState& s) { return VectorField{get(s)}; }, dt, t_)[0];
    } else {
      const std::vector<int> inner(d.begin() + 1, d.end());
      v = F_.grad(full(field, comp, dt, inner))[d.front()];
    }
    return cache_.emplace(key, std::move(v)).first->second;
  }

  std::vector<double> restrict(const ScalarField& f) const {
    std::vector<double> out;
    out.reserve(probe_.size());
    for (int n : probe_) out.push_back(f[n]);
    return out;
  }

  const History& h_;
  double t_;
  int tc_;
  const SimState& center_;
  Frame F_;
  std::vector<int> probe_;
  std::map<std::tuple<char, int, int, std::vector<int>>, ScalarField> cache_;
};

}  // namespace

PolynomialFlow random_polynomial_flow(int dim, std::uint64_t seed, int velocity_degree, int field_degree,
                                      double amplitude) {
  if (dim != 2 && dim != 3) throw Error(ErrorKind::Config, "polynomial flow: dimension must be 2 or 3");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-amplitude, amplitude);
  // exponent tuples in (t, y) with given t power and spatial degree <= deg
  auto monomials = [dim](int tpow, int deg) {
    std::vector<std::vector<int>> out;
    std::vector<int> e(dim + 1, 0);
    std::function<void(int, int)> rec = [&](int v, int left) {
      if (v > dim) {
        out.push_back(e);
        return;
      }
      for (int k = 0; k <= left; ++k) {
        e[v] = k;
        rec(v + 1, left - k);
      }
      e[v] = 0;
    };
    e[0] = tpow;
    rec(1, deg);
    for (auto& m : out) m[0] = tpow;
    return out;
  };
  PolynomialFlow f;
  f.dim = dim;
  f.x.resize(dim);
  f.B.resize(dim);
  for (int i = 0; i < dim; ++i) {
    std::vector<int> lin(dim + 1, 0);
    lin[i + 1] = 1;
    f.x[i].terms.emplace_back(lin, 1.0);
    for (const auto& m : monomials(1, velocity_degree)) f.x[i].terms.emplace_back(m, U(rng));
    for (const auto& m : monomials(2, velocity_degree)) f.x[i].terms.emplace_back(m, 0.5 * U(rng));
    for (const auto& m : monomials(3, velocity_degree)) f.x[i].terms.emplace_back(m, U(rng) / 6.0);
    for (int tp = 0; tp <= 3; ++tp)
      for (const auto& m : monomials(tp, 3 - tp)) f.B[i].terms.emplace_back(m, U(rng));
  }
  for (int tp = 0; tp <= field_degree; ++tp)
    for (const auto& m : monomials(tp, field_degree - tp)) f.f.terms.emplace_back(m, U(rng));
  return f;
}

CommutatorResult commutator_residual(const IdentityCase& c, const PolynomialFlow& flow,
                                     const std::vector<double>& point) {
  check_case(c, flow.dim);
  SeriesBackend be(flow, point, c.test_component);
  return compare(c, commutator_expansion(c.id, c.order), be);
}

CommutatorResult commutator_residual(const IdentityCase& c, const Expansion& rhs, const PolynomialFlow& flow,
                                     const std::vector<double>& point) {
  check_case(c, flow.dim);
  SeriesBackend be(flow, point, c.test_component);
  return compare(c, rhs, be);
}

CommutatorResult commutator_residual(const IdentityCase& c, const History& h, double t, double probe) {
  check_case(c, h.grid->dim());
  HistoryBackend be(h, t, probe, c.test_component);
  return compare(c, commutator_expansion(c.id, c.order), be);
}

CommutatorStudy commutator_refinement(const IdentityCase& c, const std::vector<const History*>& runs, double t,
                                      double probe) {
  if (runs.size() < 2) throw Error(ErrorKind::Range, "commutator_refinement: needs at least two runs");
  CommutatorStudy st;
  for (const History* h : runs) {
    st.spacing.push_back(1.0 / h->grid->nx());
    st.residual.push_back(commutator_residual(c, *h, t, probe).residual);
  }
  st.max_residual = *std::max_element(st.residual.begin(), st.residual.end());
  st.order = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
    const double o = std::log(st.residual[i] / st.residual[i + 1]) / std::log(st.spacing[i] / st.spacing[i + 1]);
    st.orders.push_back(o);
    st.order = std::min(st.order, o);
  }
  return st;
}

}  // namespace mhdl
