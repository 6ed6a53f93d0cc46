#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace orbi {

namespace mp = boost::multiprecision;

using Real = mp::number<mp::mpfr_float_backend<0>, mp::et_off>;
using Rational = mp::number<mp::gmp_rational, mp::et_off>;
using Integer = mp::number<mp::gmp_int, mp::et_off>;

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// ---- precision ----------------------------------------------------------

inline unsigned& precision_digits_ref() {
  static unsigned digits = 64;
  return digits;
}
inline unsigned precision_digits() { return precision_digits_ref(); }

// Working precision carries a few guard digits over the requested P.
inline void set_precision(unsigned digits) {
  if (digits < 16) throw DomainError("precision must be at least 16 digits");
  precision_digits_ref() = digits;
  Real::default_precision(digits + 8);
}

inline const bool precision_initialized_ = (set_precision(64), true);

// ---- reals --------------------------------------------------------------

inline Real to_real(const Rational& q) {
  Real r;
  mpfr_set_q(r.backend().data(), q.backend().data(), MPFR_RNDN);
  return r;
}
inline Real pi() {
  Real r;
  mpfr_const_pi(r.backend().data(), MPFR_RNDN);
  return r;
}
inline Real euler_gamma() {
  Real r;
  mpfr_const_euler(r.backend().data(), MPFR_RNDN);
  return r;
}
inline Real zeta(unsigned long k) {
  Real r;
  mpfr_zeta_ui(r.backend().data(), k, MPFR_RNDN);
  return r;
}
inline Real gamma_fn(const Real& x) {
  Real r;
  mpfr_gamma(r.backend().data(), x.backend().data(), MPFR_RNDN);
  return r;
}
inline Real rmax(const Real& a, const Real& b) { return a < b ? b : a; }
inline Real rmin(const Real& a, const Real& b) { return a < b ? a : b; }

inline Real eps_pow10(int e) { return mp::pow(Real(10), e); }

inline std::string format_real(const Real& r, unsigned digits = 0) {
  if (digits == 0) digits = precision_digits();
  if (r == 0) return "0";
  return r.str(static_cast<std::streamsize>(digits), std::ios_base::scientific);
}

inline std::string format_rational(const Rational& q) {
  if (denominator(q) == 1) return numerator(q).str();
  return numerator(q).str() + "/" + denominator(q).str();
}

inline Rational parse_rational(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rational(Integer(s));
    Integer p(s.substr(0, slash)), q(s.substr(slash + 1));
    if (q == 0) throw DataError("zero denominator in '" + s + "'");
    return Rational(p, q);
  } catch (const std::runtime_error&) {
    throw DataError("not a rational: '" + s + "'");
  }
}

inline Rational frac(const Rational& q) {
  Integer n = numerator(q), d = denominator(q);
  Integer r = n % d;
  if (r < 0) r += d;
  return Rational(r, d);
}

inline Integer floor_int(const Rational& q) {
  Integer n = numerator(q), d = denominator(q);
  Integer r = n / d;
  if (n % d < 0) r -= 1;
  return r;
}

// ---- complex ------------------------------------------------------------

struct Complex {
  Real re{0}, im{0};

  Complex() = default;
  Complex(int x) : re(x), im(0) {}
  Complex(Real r) : re(std::move(r)), im(0) {}
  Complex(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}

  Complex& operator+=(const Complex& o) { re += o.re; im += o.im; return *this; }
  Complex& operator-=(const Complex& o) { re -= o.re; im -= o.im; return *this; }
  Complex& operator*=(const Complex& o) {
    Real r = re * o.re - im * o.im;
    im = re * o.im + im * o.re;
    re = std::move(r);
    return *this;
  }
  Complex& operator/=(const Complex& o) {
    Real d = o.re * o.re + o.im * o.im;
    if (d == 0) throw DomainError("complex division by zero");
    Real r = (re * o.re + im * o.im) / d;
    im = (im * o.re - re * o.im) / d;
    re = std::move(r);
    return *this;
  }
  friend Complex operator+(Complex a, const Complex& b) { return a += b; }
  friend Complex operator-(Complex a, const Complex& b) { return a -= b; }
  friend Complex operator*(Complex a, const Complex& b) { return a *= b; }
  friend Complex operator/(Complex a, const Complex& b) { return a /= b; }
  friend Complex operator-(const Complex& a) { return {-a.re, -a.im}; }

  Complex conj() const { return {re, -im}; }
};

inline Complex I() { return {Real(0), Real(1)}; }
inline Real abs(const Complex& z) { return mp::sqrt(z.re * z.re + z.im * z.im); }
inline Complex exp(const Complex& z) {
  Real m = mp::exp(z.re);
  return {m * mp::cos(z.im), m * mp::sin(z.im)};
}
// Principal branch, arg in (-pi, pi].
inline Complex log(const Complex& z) {
  if (z.re == 0 && z.im == 0) throw DomainError("log of zero");
  return {mp::log(abs(z)), mp::atan2(z.im, z.re)};
}
inline Complex pow(const Complex& z, long k) {
  if (k < 0) return Complex(1) / pow(z, -k);
  Complex r(1), b = z;
  while (k) {
    if (k & 1) r *= b;
    b *= b;
    k >>= 1;
  }
  return r;
}
// z^c = exp(c log z) with the principal logarithm.
inline Complex cpow(const Complex& z, const Complex& c) { return exp(c * log(z)); }

// e^{2 pi i q}; quarter turns are returned exactly.
inline Complex root_of_unity(const Rational& q) {
  Rational f = frac(q);
  if (f == 0) return Complex(1);
  if (f == Rational(1, 2)) return Complex(-1);
  if (f == Rational(1, 4)) return I();
  if (f == Rational(3, 4)) return -I();
  Real t = 2 * pi() * to_real(f);
  return {mp::cos(t), mp::sin(t)};
}
// e^{pi i q}
inline Complex half_turn_power(const Rational& q) { return root_of_unity(q / 2); }

// ---- cyclotomic exact tag ---------------------------------------------------

// Rational combination of powers of zeta_m = e^{2 pi i/m}.
class Cyclotomic {
 public:
  Cyclotomic() = default;
  explicit Cyclotomic(const Rational& q) {
    if (q != 0) c_[0] = q;
  }
  static Cyclotomic root(long k, long m) {
    if (m <= 0) throw DomainError("conductor must be positive");
    Cyclotomic r;
    r.m_ = m;
    long kk = ((k % m) + m) % m;
    r.c_[kk] = 1;
    r.normalize();
    return r;
  }

  long conductor() const { return m_; }
  const std::map<long, Rational>& terms() const { return c_; }
  bool is_zero() const { return c_.empty(); }
  bool is_rational() const { return c_.empty() || (c_.size() == 1 && c_.begin()->first == 0); }
  Rational rational() const {
    if (!is_rational()) throw DomainError("cyclotomic value is not rational");
    return c_.empty() ? Rational(0) : c_.begin()->second;
  }
  bool is_monomial() const { return c_.size() == 1; }

  Complex numeric() const {
    Complex s;
    for (const auto& [k, q] : c_) s += root_of_unity(Rational(k, m_)) * Complex(to_real(q));
    return s;
  }

  Cyclotomic conj() const {
    Cyclotomic r;
    r.m_ = m_;
    for (const auto& [k, q] : c_) r.c_[(m_ - k) % m_] += q;
    r.normalize();
    return r;
  }

  Cyclotomic& operator+=(const Cyclotomic& o) {
    long m = std::lcm(m_, o.m_);
    Cyclotomic a = lift(m), b = o.lift(m);
    for (const auto& [k, q] : b.c_) a.c_[k] += q;
    a.normalize();
    return *this = a;
  }
  Cyclotomic operator-() const {
    Cyclotomic r = *this;
    for (auto& [k, q] : r.c_) q = -q;
    return r;
  }
  Cyclotomic& operator-=(const Cyclotomic& o) { return *this += -o; }
  Cyclotomic& operator*=(const Cyclotomic& o) {
    long m = std::lcm(m_, o.m_);
    Cyclotomic a = lift(m), b = o.lift(m), r;
    r.m_ = m;
    for (const auto& [k1, q1] : a.c_)
      for (const auto& [k2, q2] : b.c_) r.c_[(k1 + k2) % m] += q1 * q2;
    r.normalize();
    return *this = r;
  }
  // a^{-1} = prod_{sigma != 1} sigma(a) / N(a)
  std::optional<Cyclotomic> inverse() const {
    if (is_zero()) return std::nullopt;
    Cyclotomic num(Rational(1));
    for (long k = 2; k < m_; ++k)
      if (std::gcd(k, m_) == 1) num *= galois(k);
    Cyclotomic norm = num * *this;
    Rational n = norm.rational();
    for (auto& [k, q] : num.c_) q /= n;
    return num;
  }
  // zeta -> zeta^k for k prime to the conductor
  Cyclotomic galois(long k) const {
    Cyclotomic r;
    r.m_ = m_;
    for (const auto& [j, q] : c_) r.c_[(j * k) % m_] += q;
    r.normalize();
    return r;
  }
  friend Cyclotomic operator+(Cyclotomic a, const Cyclotomic& b) { return a += b; }
  friend Cyclotomic operator-(Cyclotomic a, const Cyclotomic& b) { return a -= b; }
  friend Cyclotomic operator*(Cyclotomic a, const Cyclotomic& b) { return a *= b; }

  std::string str() const {
    if (c_.empty()) return "0";
    std::string s;
    for (const auto& [k, q] : c_) {
      if (!s.empty()) s += " + ";
      s += "(" + format_rational(q) + ")";
      if (k != 0) s += "*z" + std::to_string(m_) + "^" + std::to_string(k);
    }
    return s;
  }

 private:
  Cyclotomic lift(long m) const {
    Cyclotomic r;
    r.m_ = m;
    long s = m / m_;
    for (const auto& [k, q] : c_) r.c_[k * s] = q;
    return r;
  }
  // Coefficients of the m-th cyclotomic polynomial, lowest degree first.
  static const std::vector<long>& cyclotomic_poly(long m) {
    static std::map<long, std::vector<long>> cache;
    auto it = cache.find(m);
    if (it != cache.end()) return it->second;
    std::vector<long> p(static_cast<std::size_t>(m) + 1, 0);
    p[0] = -1;
    p[static_cast<std::size_t>(m)] = 1;
    for (long d = 1; d < m; ++d) {
      if (m % d) continue;
      const auto& f = cyclotomic_poly(d);
      std::vector<long> q(p.size() - f.size() + 1, 0);
      for (std::size_t i = p.size(); i-- >= f.size();) {
        long c = p[i];
        std::size_t sh = i - (f.size() - 1);
        q[sh] = c;
        for (std::size_t j = 0; j < f.size(); ++j) p[sh + j] -= c * f[j];
        if (i == f.size() - 1) break;
      }
      p = q;
      while (p.size() > 1 && p.back() == 0) p.pop_back();
    }
    return cache.emplace(m, p).first->second;
  }
  // Power basis 1, zeta, ..., zeta^{phi(m)-1}, then the smallest conductor reachable by exponent gcd.
  void normalize() {
    for (auto it = c_.begin(); it != c_.end();) it = (it->second == 0) ? c_.erase(it) : std::next(it);
    if (m_ > 1) {
      const auto& f = cyclotomic_poly(m_);
      const long deg = static_cast<long>(f.size()) - 1;
      while (!c_.empty() && c_.rbegin()->first >= deg) {
        auto [k, q] = *c_.rbegin();
        c_.erase(k);
        for (long j = 0; j < deg; ++j)
          if (f[static_cast<std::size_t>(j)]) c_[k - deg + j] -= q * f[static_cast<std::size_t>(j)];
        for (auto it = c_.begin(); it != c_.end();) it = (it->second == 0) ? c_.erase(it) : std::next(it);
      }
    }
    long g = m_;
    for (const auto& [k, q] : c_) g = std::gcd(g, k);
    if (c_.empty()) g = m_;
    if (g > 1) {
      std::map<long, Rational> r;
      for (const auto& [k, q] : c_) r[k / g] = q;
      c_.swap(r);
      m_ /= g;
      if (m_ != 1) normalize();
    }
  }

  long m_ = 1;
  std::map<long, Rational> c_;
};

// ---- Scalar -------------------------------------------------------------

// Complex value with an optional exact cyclotomic tag.
class Scalar {
 public:
  Scalar() : ex_(Cyclotomic()) {}
  Scalar(int k) : v_(k), ex_(Cyclotomic(Rational(k))) {}
  Scalar(long k) : v_(Real(k)), ex_(Cyclotomic(Rational(k))) {}
  Scalar(const Rational& q) : v_(to_real(q)), ex_(Cyclotomic(q)) {}
  Scalar(const Cyclotomic& c) : v_(c.numeric()), ex_(c) {}
  Scalar(const Real& r) : v_(r) {}
  Scalar(const Complex& z) : v_(z) {}

  static Scalar rational(long p, long q) { return Scalar(Rational(p, q)); }

  const Complex& value() const { return v_; }
  const Real& re() const { return v_.re; }
  const Real& im() const { return v_.im; }
  bool exact() const { return ex_.has_value(); }
  const Cyclotomic& exact_value() const { return *ex_; }
  bool exact_rational() const { return ex_ && ex_->is_rational(); }
  Scalar numeric() const { return Scalar(v_); }

  Scalar conj() const {
    Scalar r(v_.conj());
    if (ex_) r.ex_ = ex_->conj();
    return r;
  }
  Real abs() const { return orbi::abs(v_); }
  bool near_zero(const Real& tol) const {
    if (ex_ && ex_->is_zero()) return true;
    return abs() <= tol;
  }

  Scalar& operator+=(const Scalar& o) {
    v_ += o.v_;
    if (ex_ && o.ex_) *ex_ += *o.ex_;
    else ex_.reset();
    return *this;
  }
  Scalar& operator-=(const Scalar& o) {
    v_ -= o.v_;
    if (ex_ && o.ex_) *ex_ -= *o.ex_;
    else ex_.reset();
    return *this;
  }
  Scalar& operator*=(const Scalar& o) {
    if ((ex_ && ex_->is_zero()) || (o.ex_ && o.ex_->is_zero())) return *this = Scalar();
    v_ *= o.v_;
    if (ex_ && o.ex_) *ex_ *= *o.ex_;
    else ex_.reset();
    return *this;
  }
  Scalar& operator/=(const Scalar& o) {
    if (ex_ && ex_->is_zero() && !(o.ex_ && o.ex_->is_zero())) return *this;
    v_ /= o.v_;
    std::optional<Cyclotomic> inv;
    if (ex_ && o.ex_) inv = o.ex_->inverse();
    if (inv) *ex_ *= *inv;
    else ex_.reset();
    return *this;
  }
  friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
  friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }
  friend Scalar operator*(Scalar a, const Scalar& b) { return a *= b; }
  friend Scalar operator/(Scalar a, const Scalar& b) { return a /= b; }
  friend Scalar operator-(const Scalar& a) {
    Scalar r(-a.v_);
    if (a.ex_) r.ex_ = -*a.ex_;
    return r;
  }

 private:
  Complex v_;
  std::optional<Cyclotomic> ex_;
};

inline Scalar scalar_i() { return Scalar(Cyclotomic::root(1, 4)); }
inline Scalar scalar_pi() { return Scalar(pi()); }
inline Scalar two_pi_i() { return Scalar(Complex(Real(0), 2 * pi())); }
inline Scalar root_of_unity_exact(const Rational& q) {
  Rational f = frac(q);
  long m = static_cast<long>(denominator(f));
  long k = static_cast<long>(numerator(f));
  return Scalar(Cyclotomic::root(k, m));
}
inline Scalar sexp(const Scalar& s) { return Scalar(exp(s.value())); }
inline Scalar pow(const Scalar& s, long k) {
  if (k < 0) return Scalar(1) / pow(s, -k);
  Scalar r(1), b = s;
  while (k) {
    if (k & 1) r *= b;
    b *= b;
    k >>= 1;
  }
  return r;
}

}  // namespace orbi
