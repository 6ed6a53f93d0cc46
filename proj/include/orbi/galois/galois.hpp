#pragma once

#include <orbi/gamma/frame.hpp>

#include <map>
#include <numeric>
#include <string>
#include <vector>

namespace orbi {

// Orbifold line bundle data (xi_0, f_v); the zero element acts trivially.
struct GaloisCharacter {
  std::string label;
  Vector xi0;
  std::vector<Rational> f;
};

inline GaloisCharacter galois_zero(const OrbifoldDatum& d) {
  return {"0", Vector(d.dim_h()), std::vector<Rational>(d.sectors.size(), Rational(0))};
}
inline GaloisCharacter galois_character(const OrbifoldDatum& d, const std::string& line_bundle, long power = 1) {
  const LineBundle& l = d.line_bundle(line_bundle);
  GaloisCharacter g{power == 1 ? l.name : l.name + "^" + std::to_string(power), l.xi0 * Scalar(power), {}};
  for (const auto& f : l.f) g.f.push_back(frac(f * power));
  return g;
}
inline GaloisCharacter operator+(const GaloisCharacter& a, const GaloisCharacter& b) {
  GaloisCharacter r{a.label + "+" + b.label, a.xi0 + b.xi0, {}};
  for (std::size_t v = 0; v < a.f.size(); ++v) r.f.push_back(frac(a.f[v] + b.f[v]));
  return r;
}

// dG(xi): sector scaling by e^{2 pi i f_v}.
inline Mat galois_sector_scaling(const GaloisCharacter& x, const OrbifoldDatum& d, bool compact_side = false) {
  const auto& B = compact_side ? d.Hc : d.H;
  Mat m(B.size(), B.size());
  for (std::size_t i = 0; i < B.size(); ++i) m(i, i) = root_of_unity_exact(x.f.at(B[i].sector));
  return m;
}

// (+)_v e^{-2 pi i xi_0} e^{2 pi i f_v} at z = 1.
inline Mat galois_on_sol(const GaloisCharacter& x, const OrbifoldDatum& d, bool compact_side = false) {
  Mat n = d.cup_matrix(x.xi0, compact_side) * (-two_pi_i());
  return galois_sector_scaling(x, d, compact_side) * exp_nilpotent(n);
}

// Matrix of (e^{pi i rho} a, e^{pi i mu} b)_orb, rows over Hc and columns over H.
inline Mat sol_pairing_matrix(const OrbifoldDatum& d) {
  Mat rho_c = exp_nilpotent(d.cup_matrix(d.c1, true) * Scalar(Complex(Real(0), pi())));
  return rho_c.transpose() * d.pairing * exp_pi_i_mu(d);
}

// M = (-1)^n e^{-2 pi i rho} (+)_v e^{2 pi i age_v}
inline Mat z_monodromy(const OrbifoldDatum& d, bool compact_side = false) {
  const auto& B = compact_side ? d.Hc : d.H;
  Mat ages(B.size(), B.size());
  Scalar sign((d.n % 2 == 0) ? 1 : -1);
  for (std::size_t i = 0; i < B.size(); ++i) ages(i, i) = sign * root_of_unity_exact(d.sectors[B[i].sector].age);
  return exp_nilpotent(d.cup_matrix(d.c1, compact_side) * (-two_pi_i())) * ages;
}

// Smallest k0 with dG(xi)^{k0} = 1.
inline long galois_period(const GaloisCharacter& x) {
  long k = 1;
  for (const auto& f : x.f) k = std::lcm(k, static_cast<long>(denominator(f).convert_to<long>()));
  return k;
}

struct TensorCheckReport {
  Vector lhs, rhs;
  Real residual;
  bool pass = false;
};

// Psi(L^vee (x) V) against G(xi) Psi(V).
inline TensorCheckReport tensor_line_bundle_check(const GaloisCharacter& x, const KClass& v, const OrbifoldDatum& d,
                                                  const Real& tol = eps_pow10(-10)) {
  KClass l = line_bundle_class(d, LineBundle{x.label, x.xi0, x.f});
  KClass lv = tensor(d, dual(d, l), v);
  TensorCheckReport r;
  r.lhs = psi_map(lv, d).psi;
  r.rhs = galois_on_sol(x, d, v.compact_support) * psi_map(v, d).psi;
  r.residual = max_abs(r.lhs - r.rhs);
  r.pass = r.residual < tol;
  return r;
}

// ---- externally supplied transforms ----

struct ExternalTransform {
  std::size_t rows = 0, cols = 0;
  std::map<long, Mat> terms;  // U(z) = sum_k terms[k] z^k
};

struct CheckResult {
  std::string name;
  bool applicable = true;
  bool pass = false;
  Real residual = 0;
  std::string note;
};

struct TransformReport {
  std::vector<CheckResult> checks;
  bool pass() const {
    for (const auto& c : checks)
      if (c.applicable && !c.pass) return false;
    return true;
  }
};

struct PullbackPair {
  Vector alpha1, alpha2;  // untwisted classes on X1 and X2
};

inline TransformReport validate_transform(const ExternalTransform& u, const OrbifoldDatum& d1,
                                          const OrbifoldDatum& d2, const std::vector<PullbackPair>& pairs,
                                          const Real& tol = eps_pow10(-10)) {
  if (u.rows != d2.dim_h() || u.cols != d1.dim_h()) throw ShapeError("transform shape does not match the data");
  for (const auto& [k, m] : u.terms)
    if (m.rows() != u.rows || m.cols() != u.cols) throw ShapeError("transform coefficient has wrong shape");
  TransformReport rep;

  CheckResult rho{"rho", true, false, 0, "U rho_1 = rho_2 U"};
  Mat r1 = d1.cup_matrix(d1.c1), r2 = d2.cup_matrix(d2.c1);
  for (const auto& [k, m] : u.terms) rho.residual = rmax(rho.residual, max_abs(m * r1 - r2 * m));
  rho.pass = rho.residual < tol;
  rep.checks.push_back(rho);

  CheckResult fpart{"f-part", true, false, 0, "U H_f(X1) = H_f(X2)"};
  CheckResult degree{"degree", true, false, 0, "U = z^{-mu_2} U_coh z^{mu_1}"};
  for (const auto& [k, m] : u.terms)
    for (std::size_t i = 0; i < u.rows; ++i)
      for (std::size_t j = 0; j < u.cols; ++j) {
        Real a = m(i, j).abs();
        if (a == 0) continue;
        if (frac(d2.H[i].degree / 2) != frac(d1.H[j].degree / 2)) fpart.residual = rmax(fpart.residual, a);
        if ((d1.H[j].degree - d2.H[i].degree) / 2 != Rational(k)) degree.residual = rmax(degree.residual, a);
      }
  fpart.pass = fpart.residual < tol;
  degree.pass = degree.residual < tol;
  rep.checks.push_back(fpart);
  rep.checks.push_back(degree);

  CheckResult pairing{"pairing", d1.compact && d2.compact, false, 0, "(U f(-z), U g(z)) = (f(-z), g(z))"};
  if (pairing.applicable) {
    std::map<long, Mat> acc;
    for (const auto& [k, a] : u.terms)
      for (const auto& [l, b] : u.terms) {
        Mat t = a.transpose() * d2.pairing * b * Scalar((k % 2 == 0) ? 1 : -1);
        auto it = acc.find(k + l);
        if (it == acc.end())
          acc.emplace(k + l, t);
        else
          it->second += t;
      }
    if (acc.find(0) == acc.end()) acc.emplace(0, Mat(u.cols, u.cols));
    for (auto& [p, m] : acc) {
      if (p == 0) m -= d1.pairing;
      pairing.residual = rmax(pairing.residual, max_abs(m));
    }
    pairing.pass = pairing.residual < tol;
  } else {
    pairing.note = "skipped: needs compact data on both sides";
  }
  rep.checks.push_back(pairing);

  CheckResult pull{"pullback", !pairs.empty(), false, 0, "U (pi_1^* a) = (pi_2^* a) U"};
  for (const auto& pr : pairs) {
    Mat a1 = d1.cup_matrix(pr.alpha1), a2 = d2.cup_matrix(pr.alpha2);
    for (const auto& [k, m] : u.terms) pull.residual = rmax(pull.residual, max_abs(m * a1 - a2 * m));
  }
  pull.pass = pull.residual < tol;
  if (pairs.empty()) pull.note = "skipped: no pullback pairs supplied";
  rep.checks.push_back(pull);

  rep.checks.push_back({"F_tau", false, false, 0,
                        "not checked: needs the global family of semi-infinite subspaces"});
  return rep;
}

}  // namespace orbi
