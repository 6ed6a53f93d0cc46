#pragma once

#include <orbi/algebra/special.hpp>
#include <orbi/orbifold/datum.hpp>

#include <string>
#include <vector>

namespace orbi {

// Virtual K-class: either eigen-data of a (virtual) bundle on every sector, or a
// compactly supported class given by its Chern character over Hc.
struct KClass {
  bool compact_support = false;
  std::vector<std::vector<EigenPiece>> pieces;
  Vector tch_c;
};

struct IntegralityError : DomainError {
  using DomainError::DomainError;
};

namespace detail {

inline long piece_rank(const OrbifoldDatum& d, std::size_t v, const EigenPiece& p) {
  const Scalar& r = p.ch.at(d.sector_unit(v));
  if (!r.exact_rational() || denominator(r.exact_value().rational()) != 1)
    throw DataError("sector '" + d.sectors[v].label + "': eigenbundle rank is not an integer");
  return static_cast<long>(numerator(r.exact_value().rational()));
}

inline void check_bundle(const OrbifoldDatum& d, const KClass& v) {
  if (v.compact_support) throw DomainError("operation needs a bundle, not a compactly supported class");
  if (v.pieces.size() != d.sectors.size()) throw DataError("K-class is missing sector eigen-data");
}

// e^{c deg/2} scaling on classes of internal degree 2k: multiplies by w^k.
inline Vector degree_twist(const std::vector<BasisClass>& basis, const Vector& x, const Scalar& w) {
  Vector r = x;
  for (std::size_t i = 0; i < r.size(); ++i) {
    Rational k = basis[i].internal / 2;
    r[i] *= pow(w, static_cast<long>(numerator(k)));
  }
  return r;
}

}  // namespace detail

// ---- constructors ----

inline KClass zero_class(const OrbifoldDatum& d, bool compact_support = false) {
  KClass k;
  k.compact_support = compact_support;
  if (compact_support) k.tch_c = Vector(d.dim_hc());
  else k.pieces.resize(d.sectors.size());
  return k;
}

inline KClass trivial_bundle(const OrbifoldDatum& d) {
  KClass k = zero_class(d);
  for (std::size_t v = 0; v < d.sectors.size(); ++v) {
    Vector ch(d.dim_h());
    ch[d.sector_unit(v)] = Scalar(1);
    k.pieces[v].push_back({Rational(0), ch});
  }
  return k;
}

inline KClass tangent_bundle(const OrbifoldDatum& d) {
  KClass k = zero_class(d);
  for (std::size_t v = 0; v < d.sectors.size(); ++v) {
    if (d.sectors[v].tangent.empty()) throw DataError("sector '" + d.sectors[v].label + "' has no tangent data");
    k.pieces[v] = d.sectors[v].tangent;
  }
  return k;
}

// L_xi^{power}
inline KClass line_bundle_class(const OrbifoldDatum& d, const LineBundle& l, long power = 1) {
  KClass k = zero_class(d);
  Vector x = d.pullback(l.xi0) * Scalar(power);
  Vector ex = d.ring_exp(x);
  for (std::size_t v = 0; v < d.sectors.size(); ++v) {
    Vector ch(d.dim_h());
    for (std::size_t i : d.sectors[v].classes) ch[i] = ex[i];
    k.pieces[v].push_back({frac(l.f.at(v) * power), ch});
  }
  return k;
}

// O_0 (x) rho on [C^n/G] via the Koszul resolution; chi is the virtual character.
inline KClass skyscraper_class(const OrbifoldDatum& d, const std::vector<Scalar>& chi) {
  if (!d.group) throw DomainError("twisted skyscrapers need a group-action datum");
  KClass k = zero_class(d, true);
  for (std::size_t v = 0; v < d.sectors.size(); ++v) {
    Scalar c = chi.at(v);
    for (const auto& f : d.sectors[v].phases)
      if (f != 0) c *= Scalar(1) - root_of_unity_exact(-f);
    k.tch_c[d.sectors[v].compact.at(0)] = c;
  }
  return k;
}

// ---- ring operations ----

inline KClass operator+(const KClass& a, const KClass& b) {
  if (a.compact_support != b.compact_support) throw DomainError("cannot add bundle and compactly supported classes");
  KClass r = a;
  if (a.compact_support) {
    r.tch_c = a.tch_c + b.tch_c;
    return r;
  }
  for (std::size_t v = 0; v < r.pieces.size(); ++v)
    r.pieces[v].insert(r.pieces[v].end(), b.pieces[v].begin(), b.pieces[v].end());
  return r;
}
inline KClass operator*(long m, const KClass& a) {
  KClass r = a;
  if (a.compact_support) r.tch_c = a.tch_c * Scalar(m);
  else
    for (auto& sec : r.pieces)
      for (auto& p : sec) p.ch = p.ch * Scalar(m);
  return r;
}
inline KClass operator-(const KClass& a) { return -1 * a; }
inline KClass operator-(const KClass& a, const KClass& b) { return a + (-b); }

inline KClass dual(const OrbifoldDatum& d, const KClass& a) {
  detail::check_bundle(d, a);
  KClass r = a;
  for (auto& sec : r.pieces)
    for (auto& p : sec) {
      p.f = frac(-p.f);
      p.ch = detail::degree_twist(d.H, p.ch, Scalar(-1));
    }
  return r;
}

// a (x) b; at most one factor may be compactly supported.
inline Vector orbifold_chern_character(const KClass& v, const OrbifoldDatum& d);
inline KClass tensor(const OrbifoldDatum& d, const KClass& a, const KClass& b) {
  if (a.compact_support && b.compact_support) throw DomainError("tensor of two compactly supported classes");
  if (a.compact_support || b.compact_support) {
    const KClass& c = a.compact_support ? a : b;
    const KClass& e = a.compact_support ? b : a;
    KClass r = zero_class(d, true);
    r.tch_c = d.cup_c(c.tch_c, orbifold_chern_character(e, d));
    return r;
  }
  detail::check_bundle(d, a);
  detail::check_bundle(d, b);
  KClass r = zero_class(d);
  for (std::size_t v = 0; v < d.sectors.size(); ++v)
    for (const auto& p : a.pieces[v])
      for (const auto& q : b.pieces[v]) r.pieces[v].push_back({frac(p.f + q.f), d.cup(p.ch, q.ch)});
  return r;
}

// ---- characteristic classes ----

// tch(V) = sum_v sum_f e^{2 pi i f} ch((pr^*V)_{v,f}); over Hc for compactly supported V.
inline Vector orbifold_chern_character(const KClass& v, const OrbifoldDatum& d) {
  if (v.compact_support) return v.tch_c;
  detail::check_bundle(d, v);
  Vector r(d.dim_h());
  for (std::size_t s = 0; s < d.sectors.size(); ++s)
    for (const auto& p : v.pieces[s]) r += p.ch * root_of_unity_exact(p.f);
  return r;
}

namespace detail {

// Multiplicative class with per-piece log series log Q_f(x) = sum_k q_k x^k:
// sector value Q_f(0)^rank * exp(sum_k q_k k! ch_k).
template <class LogSeries>
Vector multiplicative_class(const OrbifoldDatum& d, const KClass& v, LogSeries log_series) {
  check_bundle(d, v);
  Vector out(d.dim_h());
  for (std::size_t s = 0; s < d.sectors.size(); ++s) {
    Scalar c0(1);
    Vector nil(d.dim_h());
    const int kmax = d.sectors[s].dim;
    for (const auto& p : v.pieces[s]) {
      auto [q0, q] = log_series(p.f, static_cast<std::size_t>(kmax));
      c0 *= pow(q0, piece_rank(d, s, p));
      Scalar fact(1);
      for (int k = 1; k <= kmax; ++k) {
        fact *= Scalar(k);
        nil += d.graded_part(p.ch, s, k) * (q[k] * fact);
      }
    }
    Vector e = d.ring_exp(nil);
    for (std::size_t i : d.sectors[s].classes) out[i] = e[i] * c0;
  }
  return out;
}

}  // namespace detail

inline Vector gamma_class(const KClass& v, const OrbifoldDatum& d) {
  return detail::multiplicative_class(d, v, [](const Rational& f, std::size_t kmax) {
    PowerSeries l = log_gamma_taylor(f, kmax);
    Scalar g0 = (f == 0) ? Scalar(1) : Scalar(gamma_fn(to_real(1 - f)));
    return std::pair<Scalar, PowerSeries>(g0, l);
  });
}

inline Vector todd_class(const KClass& v, const OrbifoldDatum& d) {
  return detail::multiplicative_class(d, v, [](const Rational& f, std::size_t kmax) {
    std::size_t m = kmax + 1;
    PowerSeries den(m + 1);
    if (f == 0) {
      // (1 - e^{-x})/x
      Scalar fact(1);
      for (std::size_t k = 0; k <= m; ++k) {
        fact *= Scalar(static_cast<long>(k + 1));
        den[k] = Scalar((k % 2 == 0) ? 1 : -1) / fact;
      }
      PowerSeries l = ps_log1(den, kmax);
      for (auto& c : l) c = -c;
      return std::pair<Scalar, PowerSeries>(Scalar(1), l);
    }
    // 1 - lambda e^{-x}
    Scalar lambda = root_of_unity_exact(-f);
    Scalar fact(1);
    den[0] = Scalar(1) - lambda;
    for (std::size_t k = 1; k <= m; ++k) {
      fact *= Scalar(static_cast<long>(k));
      den[k] = -lambda * Scalar((k % 2 == 0) ? 1 : -1) / fact;
    }
    PowerSeries l = ps_log1(den, kmax);
    for (auto& c : l) c = -c;
    return std::pair<Scalar, PowerSeries>(Scalar(1) / den[0], l);
  });
}

// Kawasaki-Riemann-Roch: integral over I X of tch(V) cup Todd(TX).
inline Scalar kawasaki_chi(const KClass& v, const OrbifoldDatum& d, const Real& tol = eps_pow10(-10)) {
  if (!d.compact && !v.compact_support) throw DomainError("chi on a non-compact orbifold needs a compactly supported class");
  Vector td = todd_class(tangent_bundle(d), d);
  Vector tch = orbifold_chern_character(v, d);
  Scalar x;
  if (v.compact_support) x = d.pair(d.cup_c(tch, td), d.all_units());
  else x = d.pair(d.cup(tch, td), d.all_units());
  Real rounded = mp::round(x.re());
  Real err = abs(x.value() - Complex(rounded));
  if (err > tol)
    throw IntegralityError("Euler characteristic " + format_real(x.re(), 20) + " + " + format_real(x.im(), 20) +
                           "i is not an integer");
  return Scalar(Rational(Integer(rounded.convert_to<Integer>())));
}

struct FramedSection {
  Vector psi;
  bool compact_support = false;
};

// Psi(V) = (2 pi)^{-n/2} Gamma(TX) cup (2 pi i)^{deg/2} inv^* tch(V)
inline FramedSection psi_map(const KClass& v, const OrbifoldDatum& d) {
  Vector gamma = gamma_class(tangent_bundle(d), d);
  Vector tch = orbifold_chern_character(v, d);
  const auto& basis = v.compact_support ? d.Hc : d.H;
  Vector t = detail::degree_twist(basis, d.inv_pull(tch, v.compact_support), two_pi_i());
  Scalar norm = Scalar(mp::pow(2 * pi(), -Real(d.n) / 2));
  Vector out = v.compact_support ? d.cup_c(t, gamma) : d.cup(gamma, t);
  return {out * norm, v.compact_support};
}

inline Mat exp_pi_i_rho(const OrbifoldDatum& d) {
  return exp_nilpotent(d.cup_matrix(d.c1) * Scalar(Complex(Real(0), pi())));
}
inline Mat exp_pi_i_mu(const OrbifoldDatum& d, bool compact_side = false) {
  const auto& B = compact_side ? d.Hc : d.H;
  Mat m(B.size(), B.size());
  for (std::size_t i = 0; i < B.size(); ++i) m(i, i) = Scalar(half_turn_power(B[i].degree / 2 - Rational(d.n, 2)));
  return m;
}

struct MukaiReport {
  Scalar lhs, rhs;
  Real residual;
  bool pass = false;
};

// (e^{pi i rho} Psi(V1), e^{pi i mu} Psi(V2))_orb against chi(V1 (x) V2^vee).
inline MukaiReport mukai_pairing_check(const KClass& v1, const KClass& v2, const OrbifoldDatum& d,
                                       const Real& tol = eps_pow10(-10)) {
  if (!d.compact) throw DomainError("Mukai pairing check needs a compact orbifold");
  MukaiReport r;
  Vector a = exp_pi_i_rho(d) * psi_map(v1, d).psi;
  Vector b = exp_pi_i_mu(d) * psi_map(v2, d).psi;
  r.lhs = d.pair(a, b);
  r.rhs = kawasaki_chi(tensor(d, v1, dual(d, v2)), d, tol);
  r.residual = (r.lhs - r.rhs).abs();
  r.pass = r.residual < tol;
  return r;
}

// Per-sector residual of the Gamma/Todd square-root identity for a bundle V.
inline std::vector<Real> sqrt_identity_residuals(const KClass& v, const OrbifoldDatum& d) {
  Vector g = gamma_class(v, d);
  Vector left = d.cup(detail::degree_twist(d.H, g, Scalar(-1)), d.inv_pull(g));
  Vector td = detail::degree_twist(d.H, todd_class(v, d), two_pi_i());
  std::vector<Real> res;
  for (std::size_t s = 0; s < d.sectors.size(); ++s) {
    Vector c1(d.dim_h());
    Rational age = 0;
    long twisted_rank = 0;
    for (const auto& p : v.pieces[s]) {
      c1 += d.graded_part(p.ch, s, 1);
      long rk = detail::piece_rank(d, s, p);
      age += p.f * rk;
      if (p.f != 0) twisted_rank += rk;
    }
    Vector e = d.ring_exp(c1 * Scalar(Complex(Real(0), pi())));
    Vector lhs = d.cup(left, e) * Scalar(half_turn_power(age));
    Vector rhs = td * pow(two_pi_i(), twisted_rank);
    Real m = 0;
    for (std::size_t i : d.sectors[s].classes) m = rmax(m, (lhs[i] - rhs[i]).abs());
    res.push_back(m);
  }
  return res;
}

}  // namespace orbi
