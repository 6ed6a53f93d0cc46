#pragma once

#include <orbi/algebra/scalar.hpp>

#include <vector>

namespace orbi {

using Vector = std::vector<Scalar>;

inline Vector& operator+=(Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw ShapeError("vector length mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}
inline Vector& operator-=(Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw ShapeError("vector length mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}
inline Vector operator+(Vector a, const Vector& b) { return a += b; }
inline Vector operator-(Vector a, const Vector& b) { return a -= b; }
inline Vector operator-(Vector a) {
  for (auto& x : a) x = -x;
  return a;
}
inline Vector operator*(Vector a, const Scalar& s) {
  for (auto& x : a) x *= s;
  return a;
}
inline Vector operator*(const Scalar& s, Vector a) { return std::move(a) * s; }

template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : r_(r), c_(c), a_(r * c) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }
  static Matrix diagonal(const std::vector<T>& d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }
  static Matrix column(const std::vector<T>& v) {
    Matrix m(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
    return m;
  }

  std::size_t rows() const { return r_; }
  std::size_t cols() const { return c_; }
  T& operator()(std::size_t i, std::size_t j) { return a_[i * c_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return a_[i * c_ + j]; }

  std::vector<T> col(std::size_t j) const {
    std::vector<T> v(r_);
    for (std::size_t i = 0; i < r_; ++i) v[i] = (*this)(i, j);
    return v;
  }
  void set_col(std::size_t j, const std::vector<T>& v) {
    for (std::size_t i = 0; i < r_; ++i) (*this)(i, j) = v[i];
  }

  Matrix transpose() const {
    Matrix t(c_, r_);
    for (std::size_t i = 0; i < r_; ++i)
      for (std::size_t j = 0; j < c_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Matrix& operator+=(const Matrix& o) {
    check_same(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    check_same(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
    return *this;
  }
  Matrix& operator*=(const T& s) {
    for (auto& x : a_) x *= s;
    return *this;
  }
  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, const T& s) { return a *= s; }
  friend Matrix operator*(const T& s, Matrix a) { return a *= s; }
  friend Matrix operator-(Matrix a) {
    for (auto& x : a.a_) x = -x;
    return a;
  }
  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.c_ != b.r_) throw ShapeError("matrix product shape mismatch");
    Matrix r(a.r_, b.c_);
    for (std::size_t i = 0; i < a.r_; ++i)
      for (std::size_t k = 0; k < a.c_; ++k) {
        const T& x = a(i, k);
        if (is_exact_zero(x)) continue;
        for (std::size_t j = 0; j < b.c_; ++j) r(i, j) += x * b(k, j);
      }
    return r;
  }
  friend std::vector<T> operator*(const Matrix& a, const std::vector<T>& v) {
    if (a.c_ != v.size()) throw ShapeError("matrix-vector shape mismatch");
    std::vector<T> r(a.r_);
    for (std::size_t i = 0; i < a.r_; ++i)
      for (std::size_t k = 0; k < a.c_; ++k)
        if (!is_exact_zero(a(i, k))) r[i] += a(i, k) * v[k];
    return r;
  }

  bool is_zero_exact() const {
    for (const auto& x : a_)
      if (!is_exact_zero(x)) return false;
    return true;
  }

 private:
  static bool is_exact_zero(const Scalar& x) { return x.exact() && x.exact_value().is_zero(); }
  void check_same(const Matrix& o) const {
    if (r_ != o.r_ || c_ != o.c_) throw ShapeError("matrix shape mismatch");
  }
  std::size_t r_ = 0, c_ = 0;
  std::vector<T> a_;
};

using Mat = Matrix<Scalar>;

inline Real max_abs(const Mat& m) {
  Real r = 0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r = rmax(r, m(i, j).abs());
  return r;
}
inline Real max_abs(const Vector& v) {
  Real r = 0;
  for (const auto& x : v) r = rmax(r, x.abs());
  return r;
}
inline Vector vadd(Vector a, const Vector& b) {
  if (a.size() != b.size()) throw ShapeError("vector length mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}
inline Vector vsub(Vector a, const Vector& b) {
  if (a.size() != b.size()) throw ShapeError("vector length mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}
inline Vector vscale(Vector a, const Scalar& s) {
  for (auto& x : a) x *= s;
  return a;
}
inline Scalar dot(const Vector& a, const Vector& b) {
  Scalar s;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
inline Mat conj(const Mat& m) {
  Mat r(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = m(i, j).conj();
  return r;
}

// Pivot tolerance 10^{-P/2}.
inline Real pivot_tolerance() { return eps_pow10(-static_cast<int>(precision_digits() / 2)); }

struct RowEchelon {
  Mat r;                              // reduced row echelon form
  std::vector<std::size_t> pivots;    // pivot columns
};

// Gauss-Jordan with partial pivoting; entries below tol count as zero.
inline RowEchelon rref(Mat a, const Real& tol = pivot_tolerance()) {
  RowEchelon out;
  std::size_t row = 0;
  for (std::size_t c = 0; c < a.cols() && row < a.rows(); ++c) {
    std::size_t best = row;
    Real bv = a(row, c).abs();
    for (std::size_t i = row + 1; i < a.rows(); ++i) {
      Real v = a(i, c).abs();
      if (v > bv) { bv = v; best = i; }
    }
    if (bv <= tol) {
      for (std::size_t i = row; i < a.rows(); ++i) a(i, c) = Scalar();
      continue;
    }
    if (best != row)
      for (std::size_t j = 0; j < a.cols(); ++j) std::swap(a(row, j), a(best, j));
    Scalar p = a(row, c);
    for (std::size_t j = 0; j < a.cols(); ++j) a(row, j) /= p;
    for (std::size_t i = 0; i < a.rows(); ++i) {
      if (i == row) continue;
      Scalar f = a(i, c);
      if (f.near_zero(Real(0))) continue;
      for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) -= f * a(row, j);
      a(i, c) = Scalar();
    }
    out.pivots.push_back(c);
    ++row;
  }
  out.r = std::move(a);
  return out;
}

inline std::size_t rank(const Mat& a, const Real& tol = pivot_tolerance()) {
  return rref(a, tol).pivots.size();
}

// Basis of the null space as columns.
inline Mat nullspace(const Mat& a, const Real& tol = pivot_tolerance()) {
  RowEchelon e = rref(a, tol);
  std::vector<bool> is_pivot(a.cols(), false);
  for (auto p : e.pivots) is_pivot[p] = true;
  std::vector<std::size_t> free;
  for (std::size_t j = 0; j < a.cols(); ++j)
    if (!is_pivot[j]) free.push_back(j);
  Mat n(a.cols(), free.size());
  for (std::size_t k = 0; k < free.size(); ++k) {
    n(free[k], k) = Scalar(1);
    for (std::size_t i = 0; i < e.pivots.size(); ++i) n(e.pivots[i], k) = -e.r(i, free[k]);
  }
  return n;
}

// Columns of a forming a basis of its column space (first independent ones).
inline Mat column_basis(const Mat& a, const Real& tol = pivot_tolerance()) {
  RowEchelon e = rref(a, tol);
  Mat b(a.rows(), e.pivots.size());
  for (std::size_t k = 0; k < e.pivots.size(); ++k) b.set_col(k, a.col(e.pivots[k]));
  return b;
}

inline Mat hcat(const Mat& a, const Mat& b) {
  if (a.cols() == 0) return b;
  if (b.cols() == 0) return a;
  if (a.rows() != b.rows()) throw ShapeError("hcat row mismatch");
  Mat r(a.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = a(i, j);
    for (std::size_t j = 0; j < b.cols(); ++j) r(i, a.cols() + j) = b(i, j);
  }
  return r;
}

inline Mat inverse(const Mat& a) {
  if (a.rows() != a.cols()) throw ShapeError("inverse of non-square matrix");
  std::size_t n = a.rows();
  RowEchelon e = rref(hcat(a, Mat::identity(n)));
  if (e.pivots.size() < n || e.pivots[n - 1] != n - 1) throw DomainError("singular matrix");
  Mat r(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) r(i, j) = e.r(i, n + j);
  return r;
}

inline Scalar determinant(Mat a) {
  if (a.rows() != a.cols()) throw ShapeError("determinant of non-square matrix");
  std::size_t n = a.rows();
  Scalar det(1);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t best = c;
    for (std::size_t i = c + 1; i < n; ++i)
      if (a(i, c).abs() > a(best, c).abs()) best = i;
    if (a(best, c).near_zero(Real(0))) return Scalar();
    if (best != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(c, j), a(best, j));
      det = -det;
    }
    det *= a(c, c);
    for (std::size_t i = c + 1; i < n; ++i) {
      Scalar f = a(i, c) / a(c, c);
      for (std::size_t j = c; j < n; ++j) a(i, j) -= f * a(c, j);
    }
  }
  return det;
}

// Solve a x = b for square invertible a.
inline Vector solve(const Mat& a, const Vector& b) { return inverse(a) * b; }

// exp(N) for nilpotent N (series terminates).
inline Mat exp_nilpotent(const Mat& n) {
  std::size_t d = n.rows();
  Mat r = Mat::identity(d), term = Mat::identity(d);
  for (std::size_t k = 1; k <= d; ++k) {
    term = term * n * Scalar(Rational(1, static_cast<long>(k)));
    r += term;
  }
  return r;
}

// log(U) for unipotent U.
inline Mat log_unipotent(const Mat& u) {
  std::size_t d = u.rows();
  Mat n = u - Mat::identity(d), r(d, d), term = Mat::identity(d);
  for (std::size_t k = 1; k <= d; ++k) {
    term = term * n;
    Scalar c = Scalar(Rational((k % 2 == 1) ? 1 : -1, static_cast<long>(k)));
    r += term * c;
  }
  return r;
}

inline Mat matpow(const Mat& a, std::size_t k) {
  Mat r = Mat::identity(a.rows());
  for (std::size_t i = 0; i < k; ++i) r = r * a;
  return r;
}

inline Mat commutator(const Mat& a, const Mat& b) { return a * b - b * a; }

// Dimension of the intersection of the column spans of a and b.
inline Mat intersect_spans(const Mat& a, const Mat& b) {
  // x with a x1 = b x2  ->  null space of [a | -b]
  Mat n = nullspace(hcat(a, -b));
  Mat x1(a.cols(), n.cols());
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t j = 0; j < n.cols(); ++j) x1(i, j) = n(i, j);
  return column_basis(a * x1);
}

}  // namespace orbi
