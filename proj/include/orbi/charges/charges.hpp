#pragma once

#include <orbi/galois/galois.hpp>
#include <orbi/qdm/qdm.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace orbi {

// sum over (s, k) of z^s (log z)^k f_{s,k}(tau, z), with s in [0,1) and f Laurent in z.
struct ChargeFunction {
  SeriesShape shape;
  std::string source;
  std::map<std::pair<Rational, int>, ScalarSeries> parts;

  explicit ChargeFunction(SeriesShape s = {}, std::string src = "") : shape(std::move(s)), source(std::move(src)) {}

  void add(const Rational& s, int k, const ScalarSeries& x) {
    auto it = parts.find({s, k});
    if (it == parts.end())
      parts.emplace(std::make_pair(s, k), x);
    else
      it->second += x;
  }
  ChargeFunction scaled(const Scalar& c) const {
    ChargeFunction r(shape, source);
    for (const auto& [key, x] : parts) r.parts.emplace(key, x.scaled(c));
    return r;
  }
  // Plain series when there is no fractional power or logarithm.
  ScalarSeries series() const {
    ScalarSeries r(shape);
    for (const auto& [key, x] : parts) {
      if (key.first != 0 || key.second != 0) {
        if (x.max_abs() == 0) continue;
        throw DomainError("charge has fractional z-powers or log z terms");
      }
      r += x;
    }
    return r;
  }
  // The tau-dependence when z drops out.
  ScalarSeries z_free(const Real& tol = eps_pow10(-10)) const {
    ScalarSeries s = series();
    ScalarSeries r(shape);
    for (const auto& [m, c] : s.terms()) {
      if (m.z == 0)
        r.add(m, c);
      else if (c.abs() > tol)
        throw DomainError("charge depends on z");
    }
    return r;
  }
};

inline Real distance(const ChargeFunction& a, const ChargeFunction& b) {
  Real r = 0;
  std::set<std::pair<Rational, int>> keys;
  for (const auto& [k, x] : a.parts) keys.insert(k);
  for (const auto& [k, x] : b.parts) keys.insert(k);
  for (const auto& k : keys) {
    auto ia = a.parts.find(k), ib = b.parts.find(k);
    if (ia == a.parts.end())
      r = rmax(r, ib->second.max_abs());
    else if (ib == b.parts.end())
      r = rmax(r, ia->second.max_abs());
    else
      r = rmax(r, (ia->second - ib->second.reshaped(ia->second.shape())).max_abs());
  }
  return r;
}

inline SeriesShape charge_shape(const QuantumDModule& m) {
  SeriesShape s = m.shape;
  s.zhi = std::max(s.zhi, m.datum.n + 1);
  return s;
}

// c(z) = (2 pi z)^{n/2} / (2 pi i)^n without the z-power.
inline Scalar charge_normalization(int n) {
  return Scalar(mp::pow(2 * pi(), Real(n) / 2)) / pow(two_pi_i(), n);
}

// Z(V) = c(z) (1, L z^{-mu} z^{rho} Psi(V)); compactly supported V pairs Ltilde z^{-mu} z^{rho} Psi_c(V) with 1.
inline ChargeFunction central_charge(const FramedSection& psi, const QuantumDModule& m, const FundamentalSolution& f) {
  const OrbifoldDatum& d = m.datum;
  const bool cs = psi.compact_support && !d.compact;
  if (!d.compact && !psi.compact_support)
    throw DomainError("central charge on a non-compact orbifold needs a compactly supported class");
  const auto& basis = cs ? d.Hc : d.H;
  if (psi.psi.size() != basis.size()) throw ShapeError("framed section has wrong length");
  SeriesShape sh = charge_shape(m);
  ChargeFunction out(sh, "pipeline");
  Vector p1 = d.pairing * d.unit_vector(d.unit());
  std::vector<ScalarSeries> comp;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    ScalarSeries s = cs ? f.Ltilde.map([&](const Mat& l) {
      Scalar x;
      for (std::size_t c = 0; c < l.rows(); ++c) x += l(c, j) * p1[c];
      return x;
    })
                        : f.L.map([&](const Mat& l) { return dot(p1, l.col(j)); });
    comp.push_back(s.reshaped(sh));
  }
  Mat rho = d.cup_matrix(d.c1, cs);
  Vector v = psi.psi;
  Scalar norm = charge_normalization(d.n);
  for (int k = 0; k <= 2 * d.n + 1; ++k) {
    if (max_abs(v) == 0) break;
    for (std::size_t j = 0; j < basis.size(); ++j) {
      if (v[j].near_zero(Real(0))) continue;
      Rational e = Rational(d.n) - basis[j].degree / 2;
      Integer fl = floor_int(e);
      out.add(e - Rational(fl), k, comp[j].shift_z(static_cast<int>(fl.convert_to<long>())).scaled(v[j] * norm));
    }
    v = rho * v;
    v = v * Scalar(Rational(1, k + 1));
  }
  return out;
}

// ---- potentials ----

struct PolyTerm {
  Scalar coeff;
  std::vector<int> exps;
};

struct Potentials {
  std::vector<std::string> variables;  // class names, one per exponent slot
  std::vector<PolyTerm> F0;
  std::map<std::string, std::vector<PolyTerm>> sectors;  // F_{0,(g^{-1})} keyed by the label of (g)
  std::vector<std::pair<Scalar, std::vector<long>>> F0_q;  // sum_d N_d Q^d
  std::optional<long> complete_through;
};

struct MissingPotentialError : DataError {
  using DataError::DataError;
};

inline ScalarSeries poly_series(const QuantumDModule& m, const Potentials& p, const std::vector<PolyTerm>& terms,
                                const SeriesShape& sh) {
  std::vector<std::optional<std::size_t>> slot;
  for (const auto& name : p.variables) slot.push_back(m.var_of_class(m.datum.h_index(name)));
  ScalarSeries s(sh);
  for (const auto& t : terms) {
    if (t.exps.size() != p.variables.size()) throw DataError("potential term has wrong number of exponents");
    std::vector<int> e(m.vars.size(), 0);
    bool zero = false;
    for (std::size_t k = 0; k < t.exps.size(); ++k) {
      if (t.exps[k] == 0) continue;
      if (!slot[k]) zero = true;
      else e[*slot[k]] += t.exps[k];
    }
    if (!zero) s.add(Monomial{e, 0}, t.coeff);
  }
  return s;
}

// Correlators <phi^a>_{0,|a|,0} = (prod a_l!) [t^a] F0 and <>_{0,0,d} = N_d.
inline CorrelatorTable table_from_potential(const OrbifoldDatum& d, const Potentials& p) {
  CorrelatorTable t;
  t.nef_rank = d.nef.size();
  t.divisor_reduced = true;
  long top = -1;
  for (const auto& term : p.F0) {
    std::vector<std::size_t> ins;
    Scalar fact(1);
    for (std::size_t k = 0; k < term.exps.size(); ++k)
      for (int r = 1; r <= term.exps[k]; ++r) {
        ins.push_back(d.h_index(p.variables.at(k)));
        fact *= Scalar(r);
      }
    top = std::max(top, static_cast<long>(ins.size()) - 3);
    t.set(ins, std::vector<long>(t.nef_rank, 0), term.coeff * fact);
  }
  for (const auto& [n, dd] : p.F0_q) {
    top = std::max(top, detail::total(dd) - 3);
    t.set({}, dd, n);
  }
  t.complete_through = p.complete_through ? *p.complete_through : top;
  return t;
}

// ---- closed forms ----

namespace detail {

inline ScalarSeries unit_exponential(const QuantumDModule& m, const SeriesShape& sh) {
  for (std::size_t v = 0; v < m.vars.size(); ++v)
    if (m.vars[v].kind == VarInfo::unit) {
      ScalarSeries x(sh);
      x.add(m.var_mono(v, -1), Scalar(-1));
      return series_exp(x);
    }
  return ScalarSeries::constant(sh, Scalar(1));
}

inline ScalarSeries coordinate(const QuantumDModule& m, std::size_t cls, const SeriesShape& sh) {
  ScalarSeries s(sh);
  if (auto v = m.var_of_class(cls)) s.add(m.var_mono(*v), Scalar(1));
  return s;
}

inline Scalar character_dim(const std::vector<Scalar>& chi) { return chi.at(0); }

}  // namespace detail

// e^{-t0/z} (dim rho/|G| + sum_{(g) != 1} Tr(g|rho) sin(pi f_g)/(|C(g)| pi) t^{(g)})
inline ChargeFunction charge_c2(const QuantumDModule& m, const std::vector<Scalar>& chi) {
  const OrbifoldDatum& d = m.datum;
  if (!d.group || d.n != 2 || !d.group->special_linear) throw DomainError("charge_c2 needs G in SL(2,C)");
  SeriesShape sh = charge_shape(m);
  ScalarSeries s = ScalarSeries::constant(sh, detail::character_dim(chi) / Scalar(d.group->order));
  for (std::size_t v = 1; v < d.sectors.size(); ++v) {
    Rational f = d.sectors[v].phases.at(0);
    Scalar a = chi.at(v) * Scalar(mp::sin(pi() * to_real(f)) / pi()) / Scalar(d.sectors[v].centralizer);
    s += detail::coordinate(m, d.sector_unit(v), sh).scaled(a);
  }
  ChargeFunction out(sh, "closed-form");
  out.add(Rational(0), 0, detail::unit_exponential(m, sh) * s);
  return out;
}

struct C3Coefficient {
  std::string sector;
  std::string kind;  // "A" (n_g = 1), "B" (n_g = 0)
  Scalar value;
};

inline std::vector<C3Coefficient> c3_coefficients(const OrbifoldDatum& d, const std::vector<Scalar>& chi) {
  std::vector<C3Coefficient> out;
  for (std::size_t v = 1; v < d.sectors.size(); ++v) {
    const Sector& s = d.sectors[v];
    if (s.dim == 1) {
      Rational f = 1;
      for (const auto& x : s.phases)
        if (x != 0 && x < f) f = x;
      out.push_back({s.label, "A", chi.at(v) * Scalar(mp::sin(pi() * to_real(f)) / pi())});
    } else if (s.dim == 0) {
      Real g = 1;
      for (const auto& x : s.phases) g *= gamma_fn(to_real(1 - x));
      out.push_back({s.label, "B", chi.at(v) / Scalar(g)});
    } else {
      throw DomainError("sector '" + s.label + "' is not isolated or a curve");
    }
  }
  return out;
}

// F_{0,(g^{-1})}(tau) for a sector (g).
inline ScalarSeries sector_potential(const QuantumDModule& m, std::size_t v, const Potentials& p,
                                     const SeriesShape& sh) {
  const OrbifoldDatum& d = m.datum;
  const Sector& s = d.sectors[v];
  if (s.age == 1) return detail::coordinate(m, d.sector_unit(v), sh).scaled(Scalar(Rational(1, s.centralizer)));
  auto it = p.sectors.find(s.label);
  if (it != p.sectors.end()) return poly_series(m, p, it->second, sh);
  if (!p.F0.empty()) {
    auto var = m.var_of_class(d.sector_unit(s.inv));
    if (!var) throw MissingPotentialError("coordinate of sector '" + d.sectors[s.inv].label + "' is not active");
    ScalarSeries f0 = poly_series(m, p, p.F0, sh);
    return f0.d(*var);
  }
  throw MissingPotentialError("no potential F_{0,(g^-1)} supplied for sector '" + s.label + "'");
}

// dim rho/|G| + sum_{n_g=1} A_g t^{(g)}/|C(g)| + sum_{n_g=0} B_g F_{0,(g^{-1})}(tau)
inline ChargeFunction charge_c3(const QuantumDModule& m, const std::vector<Scalar>& chi, const Potentials& p) {
  const OrbifoldDatum& d = m.datum;
  if (!d.group || d.n != 3 || !d.group->special_linear) throw DomainError("charge_c3 needs G in SL(3,C)");
  SeriesShape sh = charge_shape(m);
  ScalarSeries s = ScalarSeries::constant(sh, detail::character_dim(chi) / Scalar(d.group->order));
  auto coeffs = c3_coefficients(d, chi);
  for (std::size_t v = 1; v < d.sectors.size(); ++v) {
    const auto& c = coeffs[v - 1];
    if (c.value.near_zero(Real(0))) continue;
    if (c.kind == "A")
      s += detail::coordinate(m, d.sector_unit(v), sh).scaled(c.value / Scalar(d.sectors[v].centralizer));
    else
      s += sector_potential(m, v, p, sh).scaled(c.value);
  }
  ChargeFunction out(sh, "closed-form");
  out.add(Rational(0), 0, detail::unit_exponential(m, sh) * s);
  return out;
}

// ---- compact Calabi-Yau threefolds ----

struct Cy3Sheaf {
  enum Kind { pt, curve, surface, structure } kind = pt;
  long genus = 0;
  std::vector<Scalar> curve_class;  // over the nef basis
  Vector divisor;                   // surface class over H
  Scalar chi_surface;
};

inline Scalar integrate(const OrbifoldDatum& d, const Vector& x) { return d.pair(d.unit_vector(d.unit()), x); }

inline Vector tangent_ch(const OrbifoldDatum& d) {
  Vector ch(d.dim_h());
  for (const auto& p : d.sectors[0].tangent) ch += p.ch;
  return ch;
}

// F0 = (1/6) int tau^3 + supplied polynomial terms + sum_d N_d Q^d
inline ScalarSeries genus_zero_potential(const QuantumDModule& m, const Potentials& p, const SeriesShape& sh) {
  const OrbifoldDatum& d = m.datum;
  ScalarSeries f = poly_series(m, p, p.F0, sh);
  std::vector<std::size_t> div = m.vars_of(VarInfo::divisor);
  for (std::size_t a : div)
    for (std::size_t b : div)
      for (std::size_t c : div) {
        Vector x = d.cup(d.cup(d.unit_vector(m.vars[a].cls), d.unit_vector(m.vars[b].cls)), d.unit_vector(m.vars[c].cls));
        Scalar k = integrate(d, x) / Scalar(6);
        if (k.near_zero(Real(0))) continue;
        std::vector<int> e(m.vars.size(), 0);
        ++e[a];
        ++e[b];
        ++e[c];
        f.add(Monomial{e, 0}, k);
      }
  std::vector<std::size_t> qv = m.vars_of(VarInfo::q);
  for (const auto& [n, dd] : p.F0_q) {
    std::vector<int> e(m.vars.size(), 0);
    for (std::size_t a = 0; a < qv.size(); ++a) e[qv[a]] = static_cast<int>(dd.at(a));
    f.add(Monomial{e, 0}, n);
  }
  return f;
}

inline ChargeFunction cy3_sheaf_charge(const Cy3Sheaf& k, const QuantumDModule& m, const Potentials& p) {
  const OrbifoldDatum& d = m.datum;
  if (!d.compact || d.n != 3 || max_abs(d.c1) != 0) throw DomainError("needs a compact Calabi-Yau threefold");
  SeriesShape sh = charge_shape(m);
  ChargeFunction out(sh, "closed-form");
  const Scalar tpi = two_pi_i();
  std::vector<std::size_t> div = m.vars_of(VarInfo::divisor);
  auto tau_dot = [&](auto weight) {
    ScalarSeries s(sh);
    for (std::size_t v : div) s.add(m.var_mono(v), weight(m.vars[v]));
    return s;
  };
  ScalarSeries z(sh);
  switch (k.kind) {
    case Cy3Sheaf::pt:
      z = ScalarSeries::constant(sh, Scalar(1));
      break;
    case Cy3Sheaf::curve:
      z = ScalarSeries::constant(sh, Scalar(1 - k.genus)) -
          tau_dot([&](const VarInfo& v) { return k.curve_class.at(v.nef); }).scaled(Scalar(1) / tpi);
      break;
    case Cy3Sheaf::surface: {
      Vector s2 = d.cup(k.divisor, k.divisor);
      Scalar s3 = integrate(d, d.cup(s2, k.divisor));
      z = ScalarSeries::constant(sh, s3 / Scalar(8) + k.chi_surface / Scalar(24));
      z += tau_dot([&](const VarInfo& v) { return integrate(d, d.cup(d.unit_vector(v.cls), s2)) / Scalar(2); })
               .scaled(Scalar(1) / tpi);
      SeriesShape up = sh;
      ++up.order;
      ScalarSeries f0 = genus_zero_potential(m, p, up), ds(sh);
      for (std::size_t v : div) ds += coord_derivative(m, f0, v).reshaped(sh).scaled(k.divisor[m.vars[v].cls]);
      z += ds.scaled(Scalar(1) / (tpi * tpi));
      break;
    }
    case Cy3Sheaf::structure: {
      Vector ch = tangent_ch(d);
      Vector c2 = -d.graded_part(ch, 0, 2);
      Scalar chi = integrate(d, d.graded_part(ch, 0, 3)) * Scalar(2);
      z = ScalarSeries::constant(sh, -Scalar(zeta(3)) * chi / pow(tpi, 3));
      z -= tau_dot([&](const VarInfo& v) { return integrate(d, d.cup(d.unit_vector(v.cls), c2)) / Scalar(24); })
               .scaled(Scalar(1) / tpi);
      ScalarSeries f0 = genus_zero_potential(m, p, sh);
      ScalarSeries h = f0.scaled(Scalar(2));
      for (std::size_t v : div) h -= m.variable(v).reshaped(sh) * coord_derivative(m, f0, v);
      z += h.scaled(Scalar(1) / pow(tpi, 3));
      break;
    }
  }
  out.add(Rational(0), 0, z);
  return out;
}

// ---- integral periods ----

// (2 pi)^{-n/2} i^{-n} (J(tau,-1), A) on the locus where E = 0.
inline ScalarSeries integral_period(const FramedSection& a, const QuantumDModule& m, const FundamentalSolution& f,
                                    const Real& tol = eps_pow10(-10)) {
  const OrbifoldDatum& d = m.datum;
  if (euler_field(m).max_abs() > tol)
    throw DomainError("Euler field does not vanish on this locus; integral periods need E = 0");
  VectorSeries J = j_function(m, f);
  Scalar norm = Scalar(mp::pow(2 * pi(), -Real(d.n) / 2)) / pow(scalar_i(), d.n);
  Vector pa = d.pairing.transpose() * a.psi;
  ScalarSeries out(m.shape);
  for (const auto& [mo, c] : J.terms()) out.add(Monomial{mo.e, 0}, dot(pa, c) * norm);
  return out;
}

struct A0Result {
  FramedSection psi;
  Mat image;  // basis of Im (M - 1)^n
  bool in_image = false;
  std::size_t nilpotency = 0;  // smallest k with (M - 1)^k = 0
  bool sign_fixed = false;     // the sign is a convention, never chosen here
};

// +-Psi(O_pt) and the image of (M - 1)^n for the Galois action M of an ample line bundle.
inline A0Result a0_vector(const OrbifoldDatum& d, const GaloisCharacter& xi, const KClass& point) {
  Mat M = galois_on_sol(xi, d);
  Mat Nm = M - Mat::identity(d.dim_h());
  A0Result r;
  Mat p = Mat::identity(d.dim_h());
  for (std::size_t k = 1; k <= d.dim_h() + 1; ++k) {
    p = p * Nm;
    if (max_abs(p) < eps_pow10(-20)) {
      r.nilpotency = k;
      break;
    }
  }
  Mat pn = matpow(Nm, static_cast<std::size_t>(d.n));
  if (rank(pn) == 0)
    throw DomainError("(M - 1)^n vanishes: the line bundle is not ample enough for the A0 characterization");
  r.image = column_basis(pn);
  r.psi = psi_map(point, d);
  r.in_image = rank(hcat(r.image, Mat::column(r.psi.psi))) == r.image.cols();
  return r;
}

}  // namespace orbi
