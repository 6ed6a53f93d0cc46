#pragma once

#include <orbi/algebra/series.hpp>
#include <orbi/orbifold/datum.hpp>

#include <algorithm>
#include <climits>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace orbi {

struct MissingDataError : DataError {
  std::vector<std::string> keys;
  explicit MissingDataError(std::vector<std::string> k)
      : DataError(message(k)), keys(std::move(k)) {}

 private:
  static std::string message(const std::vector<std::string>& k) {
    std::string m = "correlator table is missing " + std::to_string(k.size()) + " needed value(s):";
    for (std::size_t i = 0; i < k.size() && i < 12; ++i) m += " " + k[i];
    if (k.size() > 12) m += " ...";
    return m;
  }
};

// Genus-zero correlators <phi_i1, ..., phi_ik>_{0,k,d}.
// Insertion indices below dim H refer to H; index dim H + c refers to the class Hc[c].
struct CorrelatorTable {
  using Key = std::pair<std::vector<std::size_t>, std::vector<long>>;
  std::size_t nef_rank = 0;
  bool divisor_reduced = false;  // divisor insertions are stripped for d != 0
  long complete_through = -1;    // absent keys with (k - 3) + |d| <= this are zero
  std::map<Key, Scalar> entries;

  void set(std::vector<std::size_t> ins, std::vector<long> d, const Scalar& v) {
    std::sort(ins.begin(), ins.end());
    if (d.size() != nef_rank) throw DataError("curve class has wrong length");
    entries[{ins, d}] = v;
  }
};

namespace detail {

inline long total(const std::vector<long>& d) {
  long s = 0;
  for (long x : d) s += x;
  return s;
}

// All exponent vectors of length k with total degree <= bound, by increasing total degree.
inline std::vector<std::vector<int>> exponents_upto(std::size_t k, int bound) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(k, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i == k) {
      if (left == 0) out.push_back(cur);
      return;
    }
    for (int e = 0; e <= left; ++e) {
      cur[i] = e;
      rec(i + 1, left - e);
    }
    cur[i] = 0;
  };
  for (int t = 0; t <= bound; ++t) rec(0, t);
  return out;
}

}  // namespace detail

// Evaluates correlators from a table plus the unit axiom, degree axiom and classical three-point values.
class CorrelatorOracle {
 public:
  CorrelatorOracle(const OrbifoldDatum& d, const CorrelatorTable& t) : d_(d), t_(t) {
    if (t.nef_rank != d.nef.size()) throw DataError("table nef rank differs from the datum's nef basis");
    for (std::size_t a = 0; a < d.nef.size(); ++a) c1_nef_.push_back(d.c1[d.nef[a]]);
  }

  std::size_t canonical(std::size_t i) const {
    if (i < d_.dim_h()) return i;
    std::size_t c = i - d_.dim_h();
    if (c < d_.compact_alias.size() && d_.compact_alias[c]) return *d_.compact_alias[c];
    if (d_.compact) return c;
    return i;
  }
  const BasisClass& cls(std::size_t i) const { return i < d_.dim_h() ? d_.H[i] : d_.Hc[i - d_.dim_h()]; }

  std::string key_name(const std::vector<std::size_t>& ins, const std::vector<long>& d) const {
    std::string s = "<";
    for (std::size_t k = 0; k < ins.size(); ++k) s += (k ? "," : "") + cls(ins[k]).name;
    s += ">_d=(";
    for (std::size_t k = 0; k < d.size(); ++k) s += (k ? "," : "") + std::to_string(d[k]);
    return s + ")";
  }

  // True when the homogeneity constraint allows a nonzero value.
  bool homogeneous(const std::vector<std::size_t>& ins, const std::vector<long>& d) const {
    Rational s = 0;
    for (std::size_t i : ins) s += cls(i).degree;
    Scalar c1d;
    for (std::size_t a = 0; a < d.size(); ++a) c1d += c1_nef_[a] * Scalar(d[a]);
    Scalar rhs = Scalar(2) * (Scalar(d_.n - 3 + static_cast<long>(ins.size())) + c1d);
    return (Scalar(s) - rhs).abs() < eps_pow10(-20);
  }

  Scalar value(std::vector<std::size_t> ins, const std::vector<long>& d) {
    for (auto& i : ins) i = canonical(i);
    std::sort(ins.begin(), ins.end());
    const bool d0 = detail::total(d) == 0;
    const std::size_t unit = d_.unit();
    if (std::find(ins.begin(), ins.end(), unit) != ins.end()) {
      if (ins.size() != 3 || !d0) return Scalar(0);
      auto it = std::find(ins.begin(), ins.end(), unit);
      std::vector<std::size_t> rest;
      for (auto j = ins.begin(); j != ins.end(); ++j)
        if (j != it) rest.push_back(*j);
      return pair_indices(rest[0], rest[1]);
    }
    if (ins.size() < 3 && d0) return Scalar(0);
    if (!homogeneous(ins, d)) return Scalar(0);
    if (d0 && ins.size() == 3) {
      for (std::size_t k = 0; k < 3; ++k) {
        if (ins[k] >= d_.dim_h() || d_.H[ins[k]].sector != 0) continue;
        std::size_t a = ins[(k + 1) % 3], b = ins[(k + 2) % 3];
        if (a >= d_.dim_h()) std::swap(a, b);
        if (a >= d_.dim_h()) return Scalar(0);
        Vector y = d_.cup(d_.pullback(d_.unit_vector(ins[k])), d_.unit_vector(a));
        Scalar r;
        for (std::size_t j = 0; j < y.size(); ++j)
          if (!y[j].near_zero(Real(0))) r += y[j] * pair_indices(b, j);
        return r;
      }
      for (std::size_t i : ins)
        if (i >= d_.dim_h() && d_.Hc[i - d_.dim_h()].sector == 0) return Scalar(0);
    }
    Scalar factor(1);
    std::vector<std::size_t> key = ins;
    if (t_.divisor_reduced && !d0) {
      key.clear();
      for (std::size_t i : ins) {
        auto it = std::find(d_.nef.begin(), d_.nef.end(), i);
        if (it == d_.nef.end())
          key.push_back(i);
        else
          factor *= Scalar(d[static_cast<std::size_t>(it - d_.nef.begin())]);
      }
      if (factor.near_zero(Real(0))) return Scalar(0);
    }
    auto it = t_.entries.find({key, d});
    if (it != t_.entries.end()) return factor * it->second;
    long ord = static_cast<long>(ins.size()) - 3 + detail::total(d);
    if (ord > t_.complete_through) missing_.insert(key_name(key, d));
    return Scalar(0);
  }

  std::vector<std::string> missing() const { return {missing_.begin(), missing_.end()}; }

 private:
  const OrbifoldDatum& d_;
  const CorrelatorTable& t_;
  std::vector<Scalar> c1_nef_;
  std::set<std::string> missing_;

  // (a, b) for canonical insertion indices; one side must be compactly supported unless the datum is compact.
  Scalar pair_indices(std::size_t a, std::size_t b) const {
    const std::size_t N = d_.dim_h();
    if (a >= N && b >= N) return Scalar(0);
    if (b >= N) std::swap(a, b);
    if (a >= N) return d_.pairing(a - N, b);
    if (d_.compact) return d_.pairing(a, b);
    for (std::size_t c = 0; c < d_.compact_alias.size(); ++c) {
      if (d_.compact_alias[c] == a) return d_.pairing(c, b);
      if (d_.compact_alias[c] == b) return d_.pairing(c, a);
    }
    throw DomainError("pairing of two non-compactly supported classes");
  }
};

enum class Locus { small, standard, big };

inline std::string locus_name(Locus l) {
  return l == Locus::small ? "small" : (l == Locus::standard ? "standard" : "big");
}

struct QdmOptions {
  int order = 12;
  Locus locus = Locus::standard;  // small: H^2_CR; standard: unit + H^2_CR; big: all classes
  std::optional<int> zlo;
};

struct VarInfo {
  enum Kind { unit, divisor, linear, q } kind;
  std::size_t cls;  // H index (nef class for divisor and q)
  std::size_t nef = 0;
};

// Truncated quantum D-module: A_i = phi_i o_tau over the series variables.
// Divisor directions enter through Q_a = q_a e^{t_a}, stored in the q variables.
struct QuantumDModule {
  OrbifoldDatum datum;
  QdmOptions options;
  SeriesShape shape;
  std::vector<VarInfo> vars;
  std::vector<MatSeries> A, Ac;  // per H basis index; Ac acts on Hc
  Mat P, Pinv;

  std::optional<std::size_t> var_of_class(std::size_t cls) const {
    for (std::size_t v = 0; v < vars.size(); ++v)
      if (vars[v].kind != VarInfo::q && vars[v].cls == cls) return v;
    return std::nullopt;
  }
  std::vector<std::size_t> vars_of(VarInfo::Kind k) const {
    std::vector<std::size_t> r;
    for (std::size_t v = 0; v < vars.size(); ++v)
      if (vars[v].kind == k) r.push_back(v);
    return r;
  }
  Monomial mono(const std::vector<int>& e, int z = 0) const { return Monomial{e, z}; }
  Monomial var_mono(std::size_t v, int z = 0) const {
    std::vector<int> e(vars.size(), 0);
    e[v] = 1;
    return Monomial{e, z};
  }
  ScalarSeries variable(std::size_t v) const {
    ScalarSeries s(shape);
    s.add(var_mono(v), Scalar(1));
    return s;
  }
  // tau' + tau_{0,2} as a vector series over H
  VectorSeries tau() const {
    VectorSeries t(shape);
    for (std::size_t v = 0; v < vars.size(); ++v)
      if (vars[v].kind != VarInfo::q) t.add(var_mono(v), datum.unit_vector(vars[v].cls));
    return t;
  }
  // Weight 1 - deg/2 of a coordinate.
  Rational weight(std::size_t cls) const { return 1 - datum.H[cls].degree / 2; }
};

inline QuantumDModule build_qdm(const OrbifoldDatum& d, const CorrelatorTable& table, const QdmOptions& opt) {
  QuantumDModule m;
  m.datum = d;
  m.options = opt;
  if (opt.order < 0) throw ShapeError("order must be non-negative");
  const std::size_t N = d.dim_h();
  if (opt.locus != Locus::small) m.vars.push_back({VarInfo::unit, d.unit()});
  for (std::size_t a = 0; a < d.nef.size(); ++a) m.vars.push_back({VarInfo::divisor, d.nef[a], a});
  for (std::size_t i = 0; i < N; ++i) {
    if (i == d.unit() || std::find(d.nef.begin(), d.nef.end(), i) != d.nef.end()) continue;
    if (opt.locus != Locus::big && d.H[i].degree != 2) continue;
    if (d.H[i].sector == 0 && d.H[i].degree == 2)
      throw DataError("untwisted degree-2 class '" + d.H[i].name + "' is not in the nef basis");
    m.vars.push_back({VarInfo::linear, i});
  }
  for (std::size_t a = 0; a < d.nef.size(); ++a) m.vars.push_back({VarInfo::q, d.nef[a], a});
  for (const auto& v : m.vars) {
    std::string nm = d.H[v.cls].name;
    m.shape.vars.push_back(v.kind == VarInfo::unit ? "t0" : (v.kind == VarInfo::q ? "q:" : "t:") + nm);
  }
  m.shape.order = opt.order;
  m.shape.zlo = opt.zlo ? *opt.zlo : -((opt.order + 1) * (2 * d.n + 1) + 1);
  m.shape.zhi = 1;

  m.P = d.pairing;
  m.Pinv = inverse(d.pairing);

  CorrelatorOracle oracle(d, table);
  std::vector<std::size_t> lin = m.vars_of(VarInfo::linear), qv = m.vars_of(VarInfo::q);
  std::vector<std::vector<int>> lin_exps = detail::exponents_upto(lin.size(), opt.order);
  std::vector<std::vector<int>> q_exps = detail::exponents_upto(qv.size(), opt.order);

  for (std::size_t i = 0; i < N; ++i) {
    MatSeries Ai(m.shape);
    if (i == d.unit()) {
      Ai.add(Monomial{std::vector<int>(m.vars.size(), 0), 0}, Mat::identity(N));
      m.A.push_back(Ai);
      continue;
    }
    for (const auto& le : lin_exps) {
      int mdeg = 0;
      Scalar fact(1);
      std::vector<std::size_t> tail;
      for (std::size_t k = 0; k < lin.size(); ++k) {
        mdeg += le[k];
        for (int r = 1; r <= le[k]; ++r) {
          fact *= Scalar(r);
          tail.push_back(m.vars[lin[k]].cls);
        }
      }
      for (const auto& qe : q_exps) {
        int qdeg = 0;
        for (int x : qe) qdeg += x;
        if (mdeg + qdeg > opt.order) continue;
        std::vector<long> dd(qe.begin(), qe.end());
        Mat K(d.dim_hc(), N);
        bool any = false;
        for (std::size_t c = 0; c < d.dim_hc(); ++c)
          for (std::size_t b = 0; b < N; ++b) {
            std::vector<std::size_t> ins = tail;
            ins.push_back(i);
            ins.push_back(b);
            ins.push_back(N + c);
            Scalar v = oracle.value(ins, dd);
            if (!v.near_zero(Real(0))) {
              K(c, b) = v / fact;
              any = true;
            }
          }
        if (!any) continue;
        std::vector<int> e(m.vars.size(), 0);
        for (std::size_t k = 0; k < lin.size(); ++k) e[lin[k]] = le[k];
        for (std::size_t k = 0; k < qv.size(); ++k) e[qv[k]] = qe[k];
        Ai.add(Monomial{e, 0}, m.Pinv * K);
      }
    }
    m.A.push_back(Ai);
  }
  auto miss = oracle.missing();
  if (!miss.empty()) throw MissingDataError(miss);
  for (const auto& Ai : m.A) m.Ac.push_back(Ai.map([&](const Mat& a) { return (m.P * a * m.Pinv).transpose(); }));
  return m;
}

// ---- checks on the product ----

struct ResidualReport {
  std::string name;
  Real residual = 0;
  bool pass = false;
};

inline ScalarSeries entry(const MatSeries& a, std::size_t i, std::size_t j) {
  return a.map([&](const Mat& x) { return x(i, j); });
}

inline MatSeries scalar_times(const ScalarSeries& s, const MatSeries& a) {
  return series_product(s, a, [](const Scalar& x, const Mat& y) {
    Mat r = y;
    r *= x;
    return r;
  });
}

// phi_i o phi_j as a vector series over H.
inline VectorSeries quantum_product(const QuantumDModule& m, std::size_t i, std::size_t j) {
  return m.A.at(i).map([&](const Mat& a) { return a.col(j); });
}

// Associativity A_i A_j = sum_k (A_i)_{kj} A_k, commutativity and unit.
inline std::vector<ResidualReport> wdvv_check(const QuantumDModule& m, const Real& tol = eps_pow10(-10)) {
  const std::size_t N = m.datum.dim_h();
  ResidualReport assoc{"associativity"}, comm{"commutativity"}, unit{"unit"}, frob{"frobenius"};
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) {
      MatSeries lhs = m.A[i] * m.A[j];
      for (std::size_t k = 0; k < N; ++k) lhs -= scalar_times(entry(m.A[i], k, j), m.A[k]);
      assoc.residual = rmax(assoc.residual, lhs.max_abs());
      VectorSeries c = quantum_product(m, i, j) - quantum_product(m, j, i);
      comm.residual = rmax(comm.residual, c.max_abs());
    }
  for (std::size_t i = 0; i < N; ++i) {
    VectorSeries u = quantum_product(m, i, m.datum.unit()) - VectorSeries::constant(m.shape, m.datum.unit_vector(i));
    unit.residual = rmax(unit.residual, u.max_abs());
    if (m.datum.compact) {
      MatSeries s = m.A[i].map([&](const Mat& a) { return m.P * a - (m.P * a).transpose(); });
      frob.residual = rmax(frob.residual, s.max_abs());
    }
  }
  std::vector<ResidualReport> out{assoc, comm, unit};
  if (m.datum.compact) out.push_back(frob);
  for (auto& r : out) r.pass = r.residual < tol;
  return out;
}

// E = c1 + sum_v (1 - deg/2) t^v phi_v over the active coordinates.
inline VectorSeries euler_field(const QuantumDModule& m) {
  VectorSeries e = VectorSeries::constant(m.shape, m.datum.c1);
  for (std::size_t v = 0; v < m.vars.size(); ++v) {
    if (m.vars[v].kind == VarInfo::q) continue;
    Rational w = m.weight(m.vars[v].cls);
    if (w != 0) e.add(m.var_mono(v), m.datum.unit_vector(m.vars[v].cls) * Scalar(w));
  }
  return e;
}

// Derivative along the coordinate of variable v; divisor directions act through Q_a.
template <class C>
Series<C> coord_derivative(const QuantumDModule& m, const Series<C>& s, std::size_t v) {
  Series<C> r = s.d(v);
  if (m.vars[v].kind == VarInfo::divisor) {
    for (std::size_t w = 0; w < m.vars.size(); ++w)
      if (m.vars[w].kind == VarInfo::q && m.vars[w].nef == m.vars[v].nef) r += s.theta(w);
  }
  return r;
}

// The vector field E applied to a series.
template <class C>
Series<C> euler_derivative(const QuantumDModule& m, const Series<C>& s) {
  Series<C> r(m.shape);
  for (std::size_t a = 0; a < m.datum.nef.size(); ++a) {
    Scalar ra = m.datum.c1[m.datum.nef[a]];
    if (ra.near_zero(Real(0))) continue;
    for (std::size_t w = 0; w < m.vars.size(); ++w)
      if (m.vars[w].kind == VarInfo::q && m.vars[w].nef == a) r += s.theta(w).scaled(ra);
  }
  for (std::size_t v = 0; v < m.vars.size(); ++v) {
    if (m.vars[v].kind == VarInfo::q) continue;
    Rational w = m.weight(m.vars[v].cls);
    if (w == 0) continue;
    Series<C> t = s.d(v);
    Series<C> x(m.shape);
    for (const auto& [mo, c] : t.terms()) {
      Monomial n = mo;
      n.e[v] += 1;
      x.add(n, c * Scalar(w));
    }
    r += x;
  }
  return r;
}

// U = E o_tau
inline MatSeries euler_multiplication(const QuantumDModule& m) {
  const std::size_t N = m.datum.dim_h();
  MatSeries u(m.shape);
  for (std::size_t a = 0; a < m.datum.nef.size(); ++a) {
    Scalar ra = m.datum.c1[m.datum.nef[a]];
    if (!ra.near_zero(Real(0))) u += m.A[m.datum.nef[a]].scaled(ra);
  }
  for (std::size_t i = 0; i < N; ++i) {
    bool in_nef = std::find(m.datum.nef.begin(), m.datum.nef.end(), i) != m.datum.nef.end();
    if (!m.datum.c1[i].near_zero(Real(0)) && !in_nef) u += m.A[i].scaled(m.datum.c1[i]);
  }
  for (std::size_t v = 0; v < m.vars.size(); ++v) {
    if (m.vars[v].kind == VarInfo::q) continue;
    Rational w = m.weight(m.vars[v].cls);
    if (w != 0) u += (m.variable(v) * m.A[m.vars[v].cls]).scaled(Scalar(w));
  }
  return u;
}

// Euler axiom: E(A_i)_{kj} + (w_i + w_j - w_k - 1)(A_i)_{kj} = 0.
inline ResidualReport euler_axiom_check(const QuantumDModule& m, const Real& tol = eps_pow10(-10)) {
  const std::size_t N = m.datum.dim_h();
  ResidualReport r{"euler-axiom"};
  for (std::size_t i = 0; i < N; ++i) {
    MatSeries ea = euler_derivative(m, m.A[i]);
    MatSeries res = ea + m.A[i].map([&](const Mat& a) {
      Mat x = a;
      for (std::size_t k = 0; k < N; ++k)
        for (std::size_t j = 0; j < N; ++j) x(k, j) *= Scalar(m.weight(i) + m.weight(j) - m.weight(k) - 1);
      return x;
    });
    r.residual = rmax(r.residual, res.max_abs());
  }
  r.pass = r.residual < tol;
  return r;
}

template <class C>
Real max_abs_through(const Series<C>& s, int degree) {
  Real r = 0;
  for (const auto& [mo, c] : s.terms())
    if (mo.degree() <= degree) r = rmax(r, coeff_abs(c));
  return r;
}

// [nabla_i, nabla_j] = 0 and [nabla_i, nabla_{z d/dz}] = 0 through degree order - 1.
inline std::vector<ResidualReport> connection_flatness(const QuantumDModule& m, const Real& tol = eps_pow10(-10),
                                                       std::optional<Mat> mu_override = std::nullopt) {
  const int deg = m.shape.order - 1;
  Mat mu = mu_override ? *mu_override : m.datum.mu();
  MatSeries U = euler_multiplication(m);
  ResidualReport comm{"[A_i,A_j]"}, curl{"d_i A_j - d_j A_i"}, zres{"A_i - d_i U + [A_i,mu]"}, zcomm{"[A_i,U]"};
  std::vector<std::size_t> dirs;
  for (std::size_t v = 0; v < m.vars.size(); ++v)
    if (m.vars[v].kind != VarInfo::q) dirs.push_back(v);
  for (std::size_t x : dirs) {
    const MatSeries& Ai = m.A[m.vars[x].cls];
    for (std::size_t y : dirs) {
      const MatSeries& Aj = m.A[m.vars[y].cls];
      MatSeries c = Ai * Aj - Aj * Ai;
      comm.residual = rmax(comm.residual, max_abs_through(c, deg));
      MatSeries k = coord_derivative(m, Aj, x) - coord_derivative(m, Ai, y);
      curl.residual = rmax(curl.residual, max_abs_through(k, deg));
    }
    MatSeries z1 = Ai - coord_derivative(m, U, x) + Ai.map([&](const Mat& a) { return a * mu - mu * a; });
    zres.residual = rmax(zres.residual, max_abs_through(z1, deg));
    MatSeries z2 = Ai * U - U * Ai;
    zcomm.residual = rmax(zcomm.residual, max_abs_through(z2, deg));
  }
  std::vector<ResidualReport> out{comm, curl, zres, zcomm};
  for (auto& r : out) r.pass = r.residual < tol;
  return out;
}

// ---- fundamental solution ----

namespace detail {

using Laurent = std::map<int, Mat>;

inline void laurent_add(Laurent& a, int z, const Mat& m) {
  auto it = a.find(z);
  if (it == a.end())
    a.emplace(z, m);
  else
    it->second += m;
}

// S with L = S e^{-T/z}; A is the per-class connection (on H or Hc), Pdiv the classical divisor multiplications.
inline std::map<std::vector<int>, Laurent> solve_s(const QuantumDModule& m, const std::vector<MatSeries>& A,
                                                    const std::vector<Mat>& Pdiv, std::size_t dim) {
  const std::size_t nv = m.vars.size();
  std::vector<std::size_t> active;
  for (std::size_t v = 0; v < nv; ++v)
    if (m.vars[v].kind == VarInfo::linear || m.vars[v].kind == VarInfo::q) active.push_back(v);
  std::map<std::vector<int>, Laurent> S;
  S[std::vector<int>(nv, 0)][0] = Mat::identity(dim);
  auto sub_exps = detail::exponents_upto(active.size(), m.shape.order);
  for (const auto& se : sub_exps) {
    std::vector<int> M(nv, 0);
    int total_deg = 0;
    for (std::size_t k = 0; k < active.size(); ++k) {
      M[active[k]] = se[k];
      total_deg += se[k];
    }
    if (total_deg == 0) continue;
    Laurent out;
    std::optional<std::size_t> lv;
    for (std::size_t v : active)
      if (m.vars[v].kind == VarInfo::linear && M[v] > 0) {
        lv = v;
        break;
      }
    auto convolve = [&](const MatSeries& a, const std::vector<int>& target, bool skip_zero_q) {
      Laurent r;
      for (const auto& [mo, coef] : a.terms()) {
        std::vector<int> rest(nv);
        bool ok = true;
        bool has_q = false;
        for (std::size_t v = 0; v < nv; ++v) {
          rest[v] = target[v] - mo.e[v];
          if (rest[v] < 0) ok = false;
          if (m.vars[v].kind == VarInfo::q && mo.e[v] > 0) has_q = true;
        }
        if (!ok || (skip_zero_q && !has_q)) continue;
        auto it = S.find(rest);
        if (it == S.end()) continue;
        for (const auto& [z, s] : it->second) laurent_add(r, z + mo.z, coef * s);
      }
      return r;
    };
    if (lv) {
      std::vector<int> target = M;
      target[*lv] -= 1;
      Laurent r = convolve(A[m.vars[*lv].cls], target, false);
      Scalar c = Scalar(Rational(-1, M[*lv]));
      for (auto& [z, s] : r) {
        Mat x = s;
        x *= c;
        laurent_add(out, z - 1, x);
      }
    } else {
      std::size_t qv = nv;
      for (std::size_t v : active)
        if (m.vars[v].kind == VarInfo::q && M[v] > 0) {
          qv = v;
          break;
        }
      const std::size_t a = m.vars[qv].nef;
      const Mat& Pa = Pdiv[a];
      Laurent r = convolve(A[m.vars[qv].cls], M, true);
      // beta X + z^{-1}[P, X] = -z^{-1} R
      const Scalar beta(static_cast<long>(M[qv]));
      Laurent term;
      for (auto& [z, s] : r) {
        Mat x = s;
        x *= -Scalar(1) / beta;
        laurent_add(term, z - 1, x);
      }
      for (int k = 0; !term.empty(); ++k) {
        if (k > 4 * m.datum.n + 4) throw DomainError("divisor multiplication is not nilpotent");
        Laurent next;
        for (const auto& [z, x] : term) {
          laurent_add(out, z, x);
          Mat c = commutator(Pa, x);
          if (c.is_zero_exact() || max_abs(c) < eps_pow10(-static_cast<int>(precision_digits()) + 5)) continue;
          c *= -Scalar(1) / beta;
          laurent_add(next, z - 1, c);
        }
        term = std::move(next);
      }
    }
    Laurent clean;
    for (auto& [z, s] : out)
      if (!s.is_zero_exact() && max_abs(s) > 0) clean.emplace(z, s);
    if (!clean.empty()) S[M] = std::move(clean);
  }
  return S;
}

}  // namespace detail

struct FundamentalSolution {
  MatSeries L, Ltilde;  // L on H; Ltilde on Hc
};

inline MatSeries exp_minus_over_z(const QuantumDModule& m, const MatSeries& T, std::size_t dim) {
  MatSeries r = MatSeries::constant(m.shape, Mat::identity(dim)), term = r;
  MatSeries x = (-T).shift_z(-1);
  for (int k = 1; k <= m.shape.order; ++k) {
    term = (term * x).scaled(Scalar(Rational(1, k)));
    if (term.empty()) break;
    r += term;
  }
  return r;
}

inline MatSeries classical_divisor_part(const QuantumDModule& m, bool compact_side) {
  const std::size_t dim = compact_side ? m.datum.dim_hc() : m.datum.dim_h();
  MatSeries T(m.shape);
  for (std::size_t v = 0; v < m.vars.size(); ++v) {
    if (m.vars[v].kind == VarInfo::unit) T.add(m.var_mono(v), Mat::identity(dim));
    if (m.vars[v].kind == VarInfo::divisor)
      T.add(m.var_mono(v), m.datum.cup_matrix(m.datum.unit_vector(m.vars[v].cls), compact_side));
  }
  return T;
}

inline MatSeries to_series(const QuantumDModule& m, const std::map<std::vector<int>, detail::Laurent>& S) {
  MatSeries r(m.shape);
  for (const auto& [e, lau] : S)
    for (const auto& [z, s] : lau) {
      if (z < m.shape.zlo) throw ShapeError("z-window too small for the fundamental solution; lower zlo");
      r.add(Monomial{e, z}, s);
    }
  return r;
}

inline FundamentalSolution fundamental_solution(const QuantumDModule& m, const Real& tol = eps_pow10(-10)) {
  for (const auto& r : connection_flatness(m, tol))
    if ((r.name == "[A_i,A_j]" || r.name == "d_i A_j - d_j A_i") && !r.pass)
      throw DomainError("connection is not flat (" + r.name + " residual " + format_real(r.residual, 6) + ")");
  std::vector<Mat> Pd, Pdc;
  for (std::size_t a = 0; a < m.datum.nef.size(); ++a) {
    Pd.push_back(m.datum.cup_matrix(m.datum.unit_vector(m.datum.nef[a])));
    Pdc.push_back(m.datum.cup_matrix(m.datum.unit_vector(m.datum.nef[a]), true));
  }
  FundamentalSolution f;
  MatSeries S = to_series(m, detail::solve_s(m, m.A, Pd, m.datum.dim_h()));
  MatSeries Sc = to_series(m, detail::solve_s(m, m.Ac, Pdc, m.datum.dim_hc()));
  f.L = S * exp_minus_over_z(m, classical_divisor_part(m, false), m.datum.dim_h());
  f.Ltilde = Sc * exp_minus_over_z(m, classical_divisor_part(m, true), m.datum.dim_hc());
  return f;
}

// (Ltilde(tau,-z) a, L(tau,z) b) = (a, b)
inline ResidualReport unitarity_check(const QuantumDModule& m, const FundamentalSolution& f,
                                      const Real& tol = eps_pow10(-10)) {
  MatSeries prod = series_product(f.Ltilde.negate_z(), f.L, [&](const Mat& a, const Mat& b) {
    return a.transpose() * m.P * b;
  });
  prod -= MatSeries::constant(m.shape, m.P);
  ResidualReport r{"unitarity", prod.max_abs()};
  r.pass = r.residual < tol;
  return r;
}

// J(tau,-z) = L(tau,z)^dagger 1 = P^{-1} Ltilde(tau,z)^T P 1
inline VectorSeries j_function(const QuantumDModule& m, const FundamentalSolution& f) {
  Vector p1 = m.P * m.datum.unit_vector(m.datum.unit());
  return f.Ltilde.map([&](const Mat& l) { return m.Pinv * (l.transpose() * p1); });
}

template <class C>
Series<C> z_coefficient(const Series<C>& s, int k) {
  Series<C> r(s.shape());
  for (const auto& [mo, c] : s.terms())
    if (mo.z == k) r.add(Monomial{mo.e, 0}, c);
  return r;
}

struct FlatCoordinates {
  VectorSeries psi;  // z^{-1} coefficient of J(tau,-z)
  Real big_cell_residual = 0;
};

// Projection of J(tau,-z) along 1 + H_-; the standard opposite subspace only.
inline FlatCoordinates opposite_project(const QuantumDModule& m, const FundamentalSolution& f,
                                        const Real& tol = eps_pow10(-10)) {
  VectorSeries J = j_function(m, f);
  FlatCoordinates out;
  VectorSeries lead = z_coefficient(J, 0) - VectorSeries::constant(m.shape, m.datum.unit_vector(m.datum.unit()));
  out.big_cell_residual = lead.max_abs();
  for (int k = 1; k <= m.shape.zhi; ++k) out.big_cell_residual = rmax(out.big_cell_residual, z_coefficient(J, k).max_abs());
  if (out.big_cell_residual > tol)
    throw DomainError("J-function leaves the big cell of the standard opposite subspace at this truncation");
  out.psi = z_coefficient(J, -1);
  return out;
}

struct ResidueReport {
  std::size_t miniversal_rank = 0;
  ResidualReport unit_map{"A_i 1 = phi_i"}, u_is_ae{"U = A_E"}, euler;
};

inline ResidueReport residue_product(const QuantumDModule& m, const Real& tol = eps_pow10(-10)) {
  const std::size_t N = m.datum.dim_h();
  ResidueReport r;
  Mat img(N, N);
  for (std::size_t i = 0; i < N; ++i) {
    VectorSeries c = quantum_product(m, i, m.datum.unit());
    auto c0 = c.get(Monomial{std::vector<int>(m.vars.size(), 0), 0});
    if (c0) img.set_col(i, *c0);
    c -= VectorSeries::constant(m.shape, m.datum.unit_vector(i));
    r.unit_map.residual = rmax(r.unit_map.residual, c.max_abs());
  }
  r.miniversal_rank = rank(img);
  // A_E from the Euler vector field
  VectorSeries E = euler_field(m);
  MatSeries ae(m.shape);
  for (std::size_t k = 0; k < N; ++k) {
    ScalarSeries ek = E.map([&](const Vector& v) { return v[k]; });
    if (!ek.empty()) ae += scalar_times(ek, m.A[k]);
  }
  r.u_is_ae.residual = (ae - euler_multiplication(m)).max_abs();
  r.unit_map.pass = r.unit_map.residual < tol;
  r.u_is_ae.pass = r.u_is_ae.residual < tol;
  r.euler = euler_axiom_check(m, tol);
  return r;
}

}  // namespace orbi
