#pragma once

#include <orbi/charges/charges.hpp>

#include <map>
#include <string>
#include <vector>

namespace orbi {

// Tr(g | rho (x) sum_k (-1)^k Lambda^k Q^vee) restricted to the moving directions of g.
inline std::vector<Scalar> koszul_character(const OrbifoldDatum& d, const std::vector<Scalar>& chi) {
  if (!d.group) throw DomainError("Koszul characters need a group-action datum");
  std::vector<Scalar> out;
  for (std::size_t v = 0; v < d.sectors.size(); ++v) {
    std::vector<Scalar> e{Scalar(1)};  // elementary symmetric functions of the conjugate eigenvalues
    for (const auto& f : d.sectors[v].phases) {
      if (f == 0) continue;
      Scalar x = root_of_unity_exact(-f);
      e.push_back(Scalar(0));
      for (std::size_t k = e.size() - 1; k >= 1; --k) e[k] += e[k - 1] * x;
    }
    Scalar s;
    for (std::size_t k = 0; k < e.size(); ++k) s += (k % 2 == 0) ? e[k] : -e[k];
    out.push_back(chi.at(v) * s);
  }
  return out;
}

// Compactly supported ch of O_0 (x) rho: the Koszul trace on the top class of each sector.
inline KClass koszul_class(const OrbifoldDatum& d, const std::vector<Scalar>& chi) {
  KClass k = zero_class(d, true);
  auto tr = koszul_character(d, chi);
  for (std::size_t v = 0; v < d.sectors.size(); ++v) k.tch_c[d.sectors[v].compact.at(0)] = tr[v];
  return k;
}

struct FMCurve {
  std::string label;
  std::map<std::string, long> character;  // irreducible name -> multiplicity
  long dim = 0;
};

struct FMAssignment {
  std::vector<FMCurve> curves;
};

struct PredictionTerm {
  std::string name;  // "1", "t:<class>" or "F0:<sector>"
  Scalar coeff;
};

struct CurvePrediction {
  std::string label;
  std::vector<Scalar> chi;
  long dim = 0;
  ChargeFunction tau;  // -2 pi i Z(O_0 (x) rho)
  Scalar q;            // exp(-2 pi i dim rho/|G|)
  std::vector<PredictionTerm> terms;
  Real q_residual = 0;  // |exp(tau(0)) - q|
};

inline std::vector<Scalar> fm_character(const OrbifoldDatum& d, const FMCurve& c) {
  auto chi = d.group->virtual_character(c.character);
  if (!(chi.at(0) - Scalar(c.dim)).near_zero(eps_pow10(-20)))
    throw DataError("curve '" + c.label + "': dim does not match the character at the identity");
  return chi;
}

// tau_C = -2 pi i Z(O_0 (x) rho_C) and q_C for each exceptional curve C.
inline std::vector<CurvePrediction> predict_coordinate_change(const QuantumDModule& m, const FMAssignment& fm,
                                                              const Potentials& p) {
  const OrbifoldDatum& d = m.datum;
  if (!d.group || d.n != 3 || !d.group->special_linear) throw DomainError("prediction needs G in SL(3,C)");
  std::vector<CurvePrediction> out;
  const Scalar k = -two_pi_i();
  for (const auto& c : fm.curves) {
    CurvePrediction r;
    r.label = c.label;
    r.chi = fm_character(d, c);
    r.dim = c.dim;
    r.tau = charge_c3(m, r.chi, p).scaled(k);
    r.tau.source = "prediction";
    r.q = root_of_unity_exact(Rational(-c.dim, d.group->order));
    r.terms.push_back({"1", k * Scalar(Rational(c.dim, d.group->order))});
    auto coeffs = c3_coefficients(d, r.chi);
    for (std::size_t v = 1; v < d.sectors.size(); ++v) {
      const auto& cf = coeffs[v - 1];
      const Sector& s = d.sectors[v];
      if (cf.kind == "A" || s.age == 1)
        r.terms.push_back({"t:" + d.H[d.sector_unit(v)].name, k * cf.value / Scalar(s.centralizer)});
      else
        r.terms.push_back({"F0:" + s.label, k * cf.value});
    }
    ScalarSeries t0 = r.tau.series();
    Scalar c0 = t0.get(t0.unit_monomial()).value_or(Scalar(0));
    r.q_residual = abs(sexp(c0).value() - r.q.value());
    out.push_back(std::move(r));
  }
  return out;
}

// Y-side central charge Z^Y(E_C) = constant + slope tau_C, with the X-side class it should match.
struct YCharge {
  std::string label;
  Scalar constant, slope;
  std::map<std::string, long> x_character;
};

struct CrossrefEntry {
  std::string label;
  int sign = 0;  // +1 or -1 when Z^Y = sign Z^X, 0 when neither
  Real residual = 0;
};

inline std::vector<CrossrefEntry> crossref_central_charges(const QuantumDModule& m, const FundamentalSolution& f,
                                                           const std::vector<CurvePrediction>& pred,
                                                           const std::vector<YCharge>& y,
                                                           const Real& tol = eps_pow10(-10)) {
  const OrbifoldDatum& d = m.datum;
  std::vector<CrossrefEntry> out;
  for (const auto& yc : y) {
    const CurvePrediction* cp = nullptr;
    for (const auto& p : pred)
      if (p.label == yc.label) cp = &p;
    if (!cp) throw DataError("no predicted coordinate for curve '" + yc.label + "'");
    ScalarSeries zy = cp->tau.series().scaled(yc.slope);
    zy.add(zy.unit_monomial(), yc.constant);
    auto chi = d.group->virtual_character(yc.x_character);
    ScalarSeries zx = central_charge(psi_map(koszul_class(d, chi), d), m, f).z_free(tol);
    zy = zy.reshaped(zx.shape());
    Real plus = (zy - zx).max_abs(), minus = (zy + zx).max_abs();
    CrossrefEntry e{yc.label, 0, rmin(plus, minus)};
    if (plus < tol)
      e.sign = 1;
    else if (minus < tol)
      e.sign = -1;
    out.push_back(e);
  }
  return out;
}

}  // namespace orbi
