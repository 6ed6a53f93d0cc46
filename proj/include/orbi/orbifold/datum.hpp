#pragma once

#include <orbi/orbifold/group.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace orbi {

struct BasisClass {
  std::string name;
  std::size_t sector = 0;
  Rational internal;  // degree in H*(X_v)
  Rational degree;    // Chen-Ruan degree = internal + 2 age
};

// Eigenbundle data (pr^*V)_{v,f}: phase f and Chern character over the sector classes of H.
// The coefficient on the sector unit is the rank.
struct EigenPiece {
  Rational f;
  Vector ch;
};

struct Sector {
  std::string label;
  Rational age;
  int dim = 0;
  long centralizer = 1;
  std::vector<Rational> phases;
  std::size_t inv = 0;
  std::vector<std::size_t> classes;  // indices into H
  std::vector<std::size_t> compact;  // indices into Hc
  std::vector<EigenPiece> tangent;
};

struct LineBundle {
  std::string name;
  Vector xi0;                 // untwisted degree-2 class over H
  std::vector<Rational> f;    // per sector, in [0,1)
};

struct OrbifoldDatum {
  std::string name;
  bool compact = true;
  int n = 0;
  std::vector<Sector> sectors;
  std::vector<BasisClass> H, Hc;     // Hc == H when compact
  Mat pairing;                       // rows over Hc, columns over H
  std::vector<std::size_t> inv_h;    // inv^* on H
  std::vector<std::size_t> inv_hc;   // inv^* on Hc
  std::vector<std::optional<std::size_t>> compact_alias;  // Hc class equal to an H class (n_v = 0)
  Vector c1;
  std::vector<LineBundle> line_bundles;
  std::map<std::pair<std::size_t, std::size_t>, Vector> cup_table;    // H x H -> H, sector-wise
  std::map<std::pair<std::size_t, std::size_t>, Vector> cup_c_table;  // Hc x H -> Hc
  std::map<std::size_t, Vector> restriction;  // untwisted class -> its pullback to I X
  std::vector<std::size_t> nef;               // nef divisor classes in H
  std::optional<GroupActionSpec> group;

  std::size_t dim_h() const { return H.size(); }
  std::size_t dim_hc() const { return Hc.size(); }
  std::size_t unit() const { return sectors.at(0).classes.at(0); }
  std::size_t sector_unit(std::size_t v) const { return sectors.at(v).classes.at(0); }

  std::size_t h_index(const std::string& name) const {
    for (std::size_t i = 0; i < H.size(); ++i)
      if (H[i].name == name) return i;
    throw DataError("unknown cohomology class '" + name + "'");
  }
  std::size_t hc_index(const std::string& name) const {
    for (std::size_t i = 0; i < Hc.size(); ++i)
      if (Hc[i].name == name) return i;
    throw DataError("unknown compactly supported class '" + name + "'");
  }
  std::size_t sector_index(const std::string& label) const {
    for (std::size_t v = 0; v < sectors.size(); ++v)
      if (sectors[v].label == label) return v;
    throw DataError("unknown sector '" + label + "'");
  }
  const LineBundle& line_bundle(const std::string& name) const {
    for (const auto& l : line_bundles)
      if (l.name == name) return l;
    throw DataError("unknown line bundle '" + name + "'");
  }

  Vector unit_vector(std::size_t i) const {
    Vector v(H.size());
    v.at(i) = Scalar(1);
    return v;
  }
  // Sum of all sector units; pairing against it integrates over I X.
  Vector all_units() const {
    Vector v(H.size());
    for (std::size_t s = 0; s < sectors.size(); ++s) v[sector_unit(s)] = Scalar(1);
    return v;
  }

  // ---- sector-wise cup products ----

  Vector cup_basis(std::size_t i, std::size_t j) const {
    if (H[i].sector != H[j].sector) return Vector(H.size());
    std::size_t u = sector_unit(H[i].sector);
    if (i == u) return unit_vector(j);
    if (j == u) return unit_vector(i);
    if (H[i].internal + H[j].internal > 2 * sectors[H[i].sector].dim) return Vector(H.size());
    auto it = cup_table.find({std::min(i, j), std::max(i, j)});
    if (it == cup_table.end()) return Vector(H.size());
    return it->second;
  }
  Vector cup(const Vector& a, const Vector& b) const {
    Vector r(H.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (exact_zero_(a[i])) continue;
      for (std::size_t j = 0; j < b.size(); ++j) {
        if (exact_zero_(b[j]) || H[i].sector != H[j].sector) continue;
        Vector c = cup_basis(i, j);
        Scalar s = a[i] * b[j];
        for (std::size_t k = 0; k < c.size(); ++k)
          if (!exact_zero_(c[k])) r[k] += s * c[k];
      }
    }
    return r;
  }
  // compactly supported class times ordinary class
  Vector cup_c(const Vector& c, const Vector& b) const {
    if (compact) return cup(c, b);
    Vector r(Hc.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (exact_zero_(c[i])) continue;
      for (std::size_t j = 0; j < b.size(); ++j) {
        if (exact_zero_(b[j]) || Hc[i].sector != H[j].sector) continue;
        Scalar s = c[i] * b[j];
        if (j == sector_unit(H[j].sector)) {
          r[i] += s;
          continue;
        }
        auto it = cup_c_table.find({i, j});
        if (it == cup_c_table.end()) continue;
        for (std::size_t k = 0; k < Hc.size(); ++k)
          if (!exact_zero_(it->second[k])) r[k] += s * it->second[k];
      }
    }
    return r;
  }

  // Pullback of an untwisted class to I X.
  Vector pullback(const Vector& x) const {
    Vector r(H.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (exact_zero_(x[i])) continue;
      if (H[i].sector != 0) throw DomainError("pullback needs an untwisted class");
      auto it = restriction.find(i);
      if (it != restriction.end()) {
        r += it->second * x[i];
        continue;
      }
      r[i] += x[i];
      if (H[i].internal == 0)
        for (std::size_t s = 1; s < sectors.size(); ++s) r[sector_unit(s)] += x[i];
    }
    return r;
  }

  // Matrix of b -> pr^*(x) cup b on H; on Hc when compact_side is set.
  Mat cup_matrix(const Vector& x, bool compact_side = false) const {
    Vector px = pullback(x);
    std::size_t d = compact_side ? Hc.size() : H.size();
    Mat m(d, d);
    for (std::size_t j = 0; j < d; ++j) {
      Vector e(d);
      e[j] = Scalar(1);
      m.set_col(j, compact_side ? cup_c(e, px) : cup(px, e));
    }
    return m;
  }

  // Sector-wise exponential of a class with nilpotent sector components.
  Vector ring_exp(const Vector& x) const {
    for (std::size_t s = 0; s < sectors.size(); ++s)
      if (!x[sector_unit(s)].near_zero(Real(0))) throw DomainError("ring_exp needs nilpotent input");
    Vector r = all_units(), term = all_units();
    for (int k = 1; k <= n + 1; ++k) {
      term = cup(term, x) * Scalar(Rational(1, k));
      r += term;
    }
    return r;
  }

  // Components of x of internal degree 2k, on one sector.
  Vector graded_part(const Vector& x, std::size_t sector, int k) const {
    Vector r(H.size());
    for (std::size_t i : sectors[sector].classes)
      if (H[i].internal == 2 * k) r[i] = x[i];
    return r;
  }

  Mat mu(bool compact_side = false) const {
    const auto& B = compact_side ? Hc : H;
    Mat m(B.size(), B.size());
    for (std::size_t i = 0; i < B.size(); ++i) m(i, i) = Scalar(B[i].degree / 2 - Rational(n, 2));
    return m;
  }

  // (a, b)_orb with a over Hc and b over H.
  Scalar pair(const Vector& a, const Vector& b) const {
    if (a.size() != Hc.size() || b.size() != H.size()) throw ShapeError("pairing argument size mismatch");
    return dot(a, pairing * b);
  }

  Vector inv_pull(const Vector& x, bool compact_side = false) const {
    const auto& p = compact_side ? inv_hc : inv_h;
    Vector r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[p[i]];
    return r;
  }

  void validate() const;

 private:
  static bool exact_zero_(const Scalar& s) { return s.exact() && s.exact_value().is_zero(); }
};

inline void OrbifoldDatum::validate() const {
  if (sectors.empty()) throw DataError("datum has no sectors");
  if (sectors[0].age != 0) throw DataError("untwisted sector must have age 0");
  if (pairing.rows() != Hc.size() || pairing.cols() != H.size()) throw DataError("pairing has wrong shape");
  for (std::size_t v = 0; v < sectors.size(); ++v) {
    const auto& s = sectors[v];
    if (s.classes.empty()) throw DataError("sector '" + s.label + "' has no classes");
    if (H[s.classes[0]].internal != 0) throw DataError("sector '" + s.label + "': first class must be the unit");
    if (s.age < 0) throw DataError("sector '" + s.label + "': negative age");
    const auto& w = sectors[s.inv];
    if (w.inv != v) throw DataError("sector '" + s.label + "': inv is not an involution");
    if (s.age + w.age != n - s.dim)
      throw DataError("sector '" + s.label + "': age + age(inv) != n - dim");
    if (!s.tangent.empty()) {
      Scalar rk;
      for (const auto& p : s.tangent) rk += p.ch[s.classes[0]];
      if ((rk - Scalar(n)).abs() > eps_pow10(-10)) throw DataError("sector '" + s.label + "': tangent ranks do not sum to n");
    }
  }
  for (const auto& b : H) {
    if (denominator(b.internal) != 1 || numerator(b.internal) % 2 != 0)
      throw DataError("class '" + b.name + "': only even integral internal degrees are supported");
  }
  for (std::size_t i = 0; i < Hc.size(); ++i)
    for (std::size_t j = 0; j < H.size(); ++j) {
      if (pairing(i, j).near_zero(Real(0))) continue;
      if (sectors[Hc[i].sector].inv != H[j].sector)
        throw DataError("pairing couples '" + Hc[i].name + "' with '" + H[j].name + "' outside inv-paired sectors");
      if (compact && Hc[i].degree + H[j].degree != 2 * n)
        throw DataError("pairing couples '" + Hc[i].name + "' and '" + H[j].name + "' with degrees not summing to 2n");
    }
  if (compact) {
    for (std::size_t i = 0; i < H.size(); ++i)
      for (std::size_t j = 0; j < H.size(); ++j)
        if ((pairing(i, j) - pairing(j, i)).abs() > eps_pow10(-10)) throw DataError("pairing is not symmetric");
  }
  if (rank(pairing) != H.size() || H.size() != Hc.size()) throw DataError("pairing is degenerate");
}

// [C^n/G]: one sector per conjugacy class, one ordinary unit class and one compactly supported top class each.
inline OrbifoldDatum inertia_of_quotient(const GroupActionSpec& spec) {
  spec.validate();
  OrbifoldDatum d;
  d.compact = false;
  d.n = spec.n;
  d.group = spec;
  const std::size_t k = spec.classes.size();
  for (std::size_t i = 0; i < k; ++i) {
    const auto& c = spec.classes[i];
    Sector s;
    s.label = c.label;
    s.centralizer = c.centralizer;
    s.phases = c.phases;
    for (const auto& f : c.phases) {
      s.age += f;
      if (f == 0) ++s.dim;
    }
    s.inv = spec.inverse_class(i);
    const bool id = (i == 0);
    std::string uname = id ? "1" : "1_" + c.label;
    s.classes.push_back(d.H.size());
    d.H.push_back({uname, i, Rational(0), 2 * s.age});
    std::string cname;
    if (s.dim == 0) cname = uname;
    else if (id) cname = (spec.n == 3) ? "alpha" : (spec.n == 2 ? "beta" : "vol");
    else cname = (s.dim == 1 ? "beta_" : "vol_") + c.label;
    s.compact.push_back(d.Hc.size());
    d.Hc.push_back({cname, i, Rational(2 * s.dim), Rational(2 * s.dim) + 2 * s.age});
    d.compact_alias.push_back(s.dim == 0 ? std::optional<std::size_t>(s.classes[0]) : std::nullopt);
    std::map<Rational, long> mult;
    for (const auto& f : c.phases) ++mult[f];
    for (const auto& [f, m] : mult) {
      Vector ch(k);
      ch[s.classes[0]] = Scalar(m);
      s.tangent.push_back({f, ch});
    }
    d.sectors.push_back(s);
  }
  d.pairing = Mat(k, k);
  d.inv_h.resize(k);
  d.inv_hc.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = d.sectors[i].inv;
    d.pairing(i, j) = Scalar(Rational(1, d.sectors[i].centralizer));
    d.inv_h[i] = j;
    d.inv_hc[i] = j;
  }
  d.c1 = Vector(k);
  // one-dimensional characters give orbifold line bundles with xi0 = 0
  for (const auto& ch : spec.characters) {
    if (!(ch.values[0].exact_rational() && ch.values[0].exact_value().rational() == 1)) continue;
    LineBundle lb;
    lb.name = ch.name;
    lb.xi0 = Vector(k);
    bool ok = true;
    for (std::size_t i = 0; i < k && ok; ++i) {
      // values of a linear character are |G|-th roots of unity
      const Complex& x = ch.values[i].value();
      Real turns = mp::atan2(x.im, x.re) * spec.order / (2 * pi());
      long num = mp::lround(turns);
      Rational f = frac(Rational(num, spec.order));
      if (abs(x - root_of_unity(f)) > eps_pow10(-10)) ok = false;
      lb.f.push_back(f);
    }
    if (ok) d.line_bundles.push_back(lb);
  }
  d.name = "[C" + std::to_string(spec.n) + "/G" + std::to_string(spec.order) + "]";
  d.validate();
  return d;
}

// (a, b)_orb; for non-compact data a must be compactly supported (over Hc).
inline Scalar chen_ruan_pairing(const OrbifoldDatum& d, const Vector& a, const Vector& b, bool a_compact_support) {
  if (!d.compact && !a_compact_support)
    throw DomainError("pairing of two non-compactly supported classes on a non-compact orbifold");
  return d.pair(a, b);
}

struct ConditionReport {
  bool uniqueness_opposite = true;
  bool uniqueness_dilaton = true;
  std::vector<std::pair<std::vector<std::size_t>, std::optional<Rational>>> groups;  // sectors, n_alpha
  std::vector<std::string> dilaton_failures;
};

// Groups sectors by v -> (exp(2 pi i f_v(xi)))_xi and tests the two uniqueness conditions.
inline ConditionReport condition_checks(const OrbifoldDatum& d) {
  ConditionReport r;
  std::map<std::vector<Rational>, std::vector<std::size_t>> groups;
  for (std::size_t v = 0; v < d.sectors.size(); ++v) {
    std::vector<Rational> key;
    for (const auto& l : d.line_bundles) key.push_back(frac(l.f[v]));
    groups[key].push_back(v);
  }
  for (const auto& [key, members] : groups) {
    Rational lo = d.sectors[members[0]].dim + 2 * d.sectors[members[0]].age, hi = lo;
    for (std::size_t v : members) {
      Rational x = d.sectors[v].dim + 2 * d.sectors[v].age;
      if (x < lo) lo = x;
      if (x > hi) hi = x;
    }
    bool ok = (hi - lo <= 1);
    for (std::size_t v : members) {
      Rational x = d.sectors[v].dim + 2 * d.sectors[v].age;
      if (x != lo && x != lo + 1) ok = false;
    }
    r.groups.push_back({members, ok ? std::optional<Rational>(lo) : std::nullopt});
    if (!ok) r.uniqueness_opposite = false;
  }
  for (std::size_t v = 1; v < d.sectors.size(); ++v) {
    if (d.sectors[v].age != 0) continue;
    bool sep = false;
    for (const auto& l : d.line_bundles)
      if (frac(l.f[v]) != 0) sep = true;
    if (!sep) {
      r.uniqueness_dilaton = false;
      r.dilaton_failures.push_back(d.sectors[v].label);
    }
  }
  return r;
}

}  // namespace orbi
