#pragma once

#include <orbi/algebra/linalg.hpp>

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace orbi {

struct SeriesShape {
  std::vector<std::string> vars;
  int order = 0;  // total-degree bound on the tau-variables
  int zlo = 0;    // lowest kept power of z (<= 0)
  int zhi = 0;    // highest kept power of z

  bool operator==(const SeriesShape& o) const {
    return vars == o.vars && order == o.order && zlo == o.zlo && zhi == o.zhi;
  }
  std::size_t nvars() const { return vars.size(); }
  std::size_t var_index(const std::string& name) const {
    for (std::size_t i = 0; i < vars.size(); ++i)
      if (vars[i] == name) return i;
    throw ShapeError("unknown series variable '" + name + "'");
  }
};

struct Monomial {
  std::vector<int> e;
  int z = 0;

  int degree() const {
    int d = 0;
    for (int x : e) d += x;
    return d;
  }
  bool operator<(const Monomial& o) const {
    if (e != o.e) return e < o.e;
    return z < o.z;
  }
  bool operator==(const Monomial& o) const { return e == o.e && z == o.z; }
  Monomial operator+(const Monomial& o) const {
    Monomial r{e, z + o.z};
    for (std::size_t i = 0; i < e.size(); ++i) r.e[i] += o.e[i];
    return r;
  }
};

inline bool exact_zero(const Scalar& s) { return s.exact() && s.exact_value().is_zero(); }
inline bool exact_zero(const Mat& m) { return m.is_zero_exact(); }
inline bool exact_zero(const Vector& v) {
  for (const auto& x : v)
    if (!exact_zero(x)) return false;
  return true;
}
inline Real coeff_abs(const Scalar& s) { return s.abs(); }
inline Real coeff_abs(const Mat& m) { return max_abs(m); }
inline Real coeff_abs(const Vector& v) { return max_abs(v); }

// Truncated series in tau-variables, Laurent in z; coefficient type C is Scalar, Vector or Mat.
template <class C>
class Series {
 public:
  Series() = default;
  explicit Series(SeriesShape shape) : shape_(std::move(shape)) {}

  static Series constant(const SeriesShape& shape, const C& c) {
    Series s(shape);
    s.add(Monomial{std::vector<int>(shape.nvars(), 0), 0}, c);
    return s;
  }

  const SeriesShape& shape() const { return shape_; }
  const std::map<Monomial, C>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  bool in_window(const Monomial& m) const {
    return m.degree() <= shape_.order && m.z >= shape_.zlo && m.z <= shape_.zhi;
  }
  Monomial unit_monomial(int z = 0) const { return Monomial{std::vector<int>(shape_.nvars(), 0), z}; }

  // Adds c at m; out-of-window monomials are discarded.
  void add(const Monomial& m, const C& c) {
    if (!in_window(m) || exact_zero(c)) return;
    auto it = terms_.find(m);
    if (it == terms_.end()) terms_.emplace(m, c);
    else {
      it->second += c;
      if (exact_zero(it->second)) terms_.erase(it);
    }
  }
  void set(const Monomial& m, const C& c) {
    terms_.erase(m);
    add(m, c);
  }
  std::optional<C> get(const Monomial& m) const {
    auto it = terms_.find(m);
    if (it == terms_.end()) return std::nullopt;
    return it->second;
  }

  Series& operator+=(const Series& o) {
    check(o);
    for (const auto& [m, c] : o.terms_) add(m, c);
    return *this;
  }
  Series& operator-=(const Series& o) {
    check(o);
    for (const auto& [m, c] : o.terms_) add(m, -c);
    return *this;
  }
  friend Series operator+(Series a, const Series& b) { return a += b; }
  friend Series operator-(Series a, const Series& b) { return a -= b; }
  friend Series operator-(const Series& a) {
    Series r(a.shape_);
    for (const auto& [m, c] : a.terms_) r.terms_.emplace(m, -c);
    return r;
  }
  Series scaled(const Scalar& s) const {
    Series r(shape_);
    for (const auto& [m, c] : terms_) r.add(m, c * s);
    return r;
  }

  template <class F>
  auto map(F f) const {
    using D = decltype(f(std::declval<C>()));
    Series<D> r(shape_);
    for (const auto& [m, c] : terms_) r.add(m, f(c));
    return r;
  }

  // partial derivative in a linear variable
  Series d(std::size_t var) const {
    Series r(shape_);
    for (const auto& [m, c] : terms_) {
      if (m.e[var] == 0) continue;
      Monomial n = m;
      n.e[var] -= 1;
      r.add(n, c * Scalar(static_cast<long>(m.e[var])));
    }
    return r;
  }
  // x d/dx in a multiplicative variable
  Series theta(std::size_t var) const {
    Series r(shape_);
    for (const auto& [m, c] : terms_)
      if (m.e[var] != 0) r.add(m, c * Scalar(static_cast<long>(m.e[var])));
    return r;
  }
  Series z_dz() const {
    Series r(shape_);
    for (const auto& [m, c] : terms_)
      if (m.z != 0) r.add(m, c * Scalar(static_cast<long>(m.z)));
    return r;
  }
  Series shift_z(int k) const {
    Series r(shape_);
    for (const auto& [m, c] : terms_) r.add(Monomial{m.e, m.z + k}, c);
    return r;
  }
  // z -> -z
  Series negate_z() const {
    Series r(shape_);
    for (const auto& [m, c] : terms_) r.add(m, (m.z % 2 == 0) ? c : C(-c));
    return r;
  }
  // z -> e^{pi i} z; agrees with negate_z on integral powers of z
  Series rotate_half_turn() const { return negate_z(); }

  Series reshaped(const SeriesShape& s) const {
    if (s.vars != shape_.vars) throw ShapeError("reshape cannot change variables");
    Series r(s);
    for (const auto& [m, c] : terms_) r.add(m, c);
    return r;
  }

  Series z_part(int lo, int hi) const {
    Series r(shape_);
    for (const auto& [m, c] : terms_)
      if (m.z >= lo && m.z <= hi) r.terms_.emplace(m, c);
    return r;
  }

  Real max_abs() const {
    Real r = 0;
    for (const auto& [m, c] : terms_) r = rmax(r, coeff_abs(c));
    return r;
  }

  void check(const Series& o) const { check_shapes(shape_, o.shape_); }
  static void check_shapes(const SeriesShape& a, const SeriesShape& b) {
    if (a.vars != b.vars || a.order != b.order) throw ShapeError("series variable sets differ");
    if (a.zlo != b.zlo || a.zhi != b.zhi) throw ShapeError("series z-windows differ");
  }

 private:
  SeriesShape shape_;
  std::map<Monomial, C> terms_;
};

// Truncated product with a user-supplied coefficient product.
template <class A, class B, class F>
auto series_product(const Series<A>& a, const Series<B>& b, F f) {
  Series<A>::check_shapes(a.shape(), b.shape());
  using D = decltype(f(std::declval<A>(), std::declval<B>()));
  Series<D> r(a.shape());
  const int order = a.shape().order;
  for (const auto& [ma, ca] : a.terms()) {
    int da = ma.degree();
    for (const auto& [mb, cb] : b.terms()) {
      if (da + mb.degree() > order) continue;
      Monomial m = ma + mb;
      if (m.z < a.shape().zlo || m.z > a.shape().zhi) continue;
      r.add(m, f(ca, cb));
    }
  }
  return r;
}

template <class A, class B>
auto operator*(const Series<A>& a, const Series<B>& b) {
  return series_product(a, b, [](const A& x, const B& y) { return x * y; });
}

using ScalarSeries = Series<Scalar>;
using VectorSeries = Series<Vector>;
using MatSeries = Series<Mat>;

// Splits a series into strictly negative z-powers and the rest.
template <class C>
std::pair<Series<C>, Series<C>> laurent_split(const Series<C>& v) {
  return {v.z_part(v.shape().zlo, -1), v.z_part(0, v.shape().zhi)};
}

// exp(x) for a series x whose terms all have positive tau-degree or negative z-power.
inline ScalarSeries series_exp(const ScalarSeries& x) {
  ScalarSeries r = ScalarSeries::constant(x.shape(), Scalar(1)), term = r;
  const int kmax = x.shape().order + (-x.shape().zlo) + 1;
  for (int k = 1; k <= kmax; ++k) {
    term = (term * x).scaled(Scalar(Rational(1, k)));
    if (term.empty()) break;
    r += term;
  }
  return r;
}

}  // namespace orbi
