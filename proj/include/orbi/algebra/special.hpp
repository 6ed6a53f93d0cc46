#pragma once

#include <orbi/algebra/scalar.hpp>

#include <vector>

namespace orbi {

// B_0..B_n with B_1 = -1/2.
inline std::vector<Rational> bernoulli_numbers(std::size_t n) {
  std::vector<Rational> b(n + 1);
  std::vector<Rational> a(n + 1);
  // Akiyama-Tanigawa
  for (std::size_t m = 0; m <= n; ++m) {
    a[m] = Rational(1, static_cast<long>(m + 1));
    for (std::size_t j = m; j >= 1; --j) a[j - 1] = static_cast<long>(j) * (a[j - 1] - a[j]);
    b[m] = a[0];
  }
  if (n >= 1) b[1] = Rational(-1, 2);
  return b;
}

inline const std::vector<Rational>& bernoulli_table() {
  static const std::vector<Rational> table = bernoulli_numbers(200);
  return table;
}

namespace detail {
inline std::size_t em_terms() { return precision_digits() / 2 + 12; }
inline long em_shift() { return static_cast<long>(precision_digits()) + 12; }
}  // namespace detail

// Hurwitz zeta(s, a) for integer s >= 2 and rational a > 0, Euler-Maclaurin.
inline Real hurwitz_zeta(unsigned s, const Rational& a) {
  if (s < 2) throw DomainError("hurwitz_zeta needs s >= 2");
  if (a <= 0) throw DomainError("hurwitz_zeta needs a > 0");
  const long N = detail::em_shift();
  const std::size_t M = detail::em_terms();
  const auto& B = bernoulli_table();
  if (2 * M >= B.size()) throw DomainError("precision too high for Bernoulli table");
  Real ar = to_real(a), sum = 0;
  for (long j = 0; j < N; ++j) sum += mp::pow(ar + j, -static_cast<int>(s));
  Real x = ar + N;
  sum += mp::pow(x, 1 - static_cast<int>(s)) / (s - 1);
  sum += mp::pow(x, -static_cast<int>(s)) / 2;
  // rising factorial s(s+1)...(s+2k-2) / (2k)!
  Real coeff = s, xp = mp::pow(x, -static_cast<int>(s) - 1), x2 = 1 / (x * x), fact = 2;
  for (std::size_t k = 1; k <= M; ++k) {
    sum += to_real(B[2 * k]) * coeff / fact * xp;
    coeff *= Real(s + 2 * k - 1) * Real(s + 2 * k);
    fact *= Real(2 * k + 1) * Real(2 * k + 2);
    xp *= x2;
  }
  return sum;
}

// psi^{(k)}(a) at rational a > 0.
inline Real polygamma(unsigned k, const Rational& a) {
  if (a <= 0) throw DomainError("polygamma needs a > 0");
  if (k == 0) {
    const long N = detail::em_shift();
    const std::size_t M = detail::em_terms();
    const auto& B = bernoulli_table();
    Real ar = to_real(a), shift = 0;
    for (long j = 0; j < N; ++j) shift += 1 / (ar + j);
    Real x = ar + N;
    Real s = mp::log(x) - 1 / (2 * x);
    Real x2 = 1 / (x * x), xp = x2;
    for (std::size_t j = 1; j <= M; ++j) {
      s -= to_real(B[2 * j]) / (2 * j) * xp;
      xp *= x2;
    }
    return s - shift;
  }
  Real f = 1;
  for (unsigned j = 2; j <= k; ++j) f *= j;
  Real z = f * hurwitz_zeta(k + 1, a);
  return (k % 2 == 1) ? z : Real(-z);
}

// ---- one-variable truncated power series on coefficient vectors ----

using PowerSeries = std::vector<Scalar>;

inline PowerSeries ps_mul(const PowerSeries& a, const PowerSeries& b, std::size_t kmax) {
  PowerSeries r(kmax + 1);
  for (std::size_t i = 0; i < a.size() && i <= kmax; ++i)
    for (std::size_t j = 0; j < b.size() && i + j <= kmax; ++j) r[i + j] += a[i] * b[j];
  return r;
}

// exp of a series with zero constant term
inline PowerSeries ps_exp(const PowerSeries& a, std::size_t kmax) {
  PowerSeries r(kmax + 1);
  r[0] = 1;
  // r' = a' r
  for (std::size_t n = 1; n <= kmax; ++n) {
    Scalar s;
    for (std::size_t k = 1; k <= n && k < a.size(); ++k) s += Scalar(static_cast<long>(k)) * a[k] * r[n - k];
    r[n] = s / Scalar(static_cast<long>(n));
  }
  return r;
}

inline PowerSeries ps_inv(const PowerSeries& a, std::size_t kmax) {
  if (a.empty() || a[0].near_zero(Real(0))) throw DomainError("series inverse needs nonzero constant");
  PowerSeries r(kmax + 1);
  r[0] = Scalar(1) / a[0];
  for (std::size_t n = 1; n <= kmax; ++n) {
    Scalar s;
    for (std::size_t k = 1; k <= n && k < a.size(); ++k) s += a[k] * r[n - k];
    r[n] = -s * r[0];
  }
  return r;
}

// log of a series, constant term dropped (returns log(a/a0)).
inline PowerSeries ps_log1(const PowerSeries& a, std::size_t kmax) {
  PowerSeries u(kmax + 1);
  for (std::size_t k = 0; k <= kmax && k < a.size(); ++k) u[k] = a[k] / a[0];
  // l' = u'/u
  PowerSeries du(kmax + 1);
  for (std::size_t k = 1; k <= kmax; ++k) du[k - 1] = Scalar(static_cast<long>(k)) * u[k];
  PowerSeries q = ps_mul(du, ps_inv(u, kmax), kmax);
  PowerSeries r(kmax + 1);
  for (std::size_t k = 1; k <= kmax; ++k) r[k] = q[k - 1] / Scalar(static_cast<long>(k));
  return r;
}

// Coefficients of log Gamma(1-f+x) = log Gamma(1-f) + sum_k psi^{(k-1)}(1-f) x^k / k!.
inline PowerSeries log_gamma_taylor(const Rational& f, std::size_t kmax) {
  if (f < 0 || f >= 1) throw DomainError("gamma_taylor needs f in [0,1)");
  Rational a = 1 - f;
  PowerSeries r(kmax + 1);
  r[0] = Scalar(mp::log(gamma_fn(to_real(a))));
  Real fact = 1;
  for (std::size_t k = 1; k <= kmax; ++k) {
    fact *= k;
    r[k] = Scalar(polygamma(static_cast<unsigned>(k - 1), a) / fact);
  }
  return r;
}

// Taylor coefficients of Gamma(1-f+x).
inline PowerSeries gamma_taylor(const Rational& f, std::size_t kmax) {
  PowerSeries l = log_gamma_taylor(f, kmax);
  Scalar c0 = (f == 0) ? Scalar(1) : Scalar(gamma_fn(to_real(1 - f)));
  l[0] = Scalar();
  PowerSeries e = ps_exp(l, kmax);
  for (auto& c : e) c *= c0;
  return e;
}

}  // namespace orbi
