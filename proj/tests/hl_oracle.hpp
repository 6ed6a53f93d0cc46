#pragma once

#include <orbi/lefschetz/hl.hpp>

#include <algorithm>
#include <random>
#include <utility>
#include <vector>

namespace orbi::oracle {

inline Mat random_int_matrix(std::mt19937& rng, std::size_t r, std::size_t c, long lo, long hi) {
  std::uniform_int_distribution<long> u(lo, hi);
  Mat m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = Scalar(u(rng));
  return m;
}

inline GradedNilpotentPair random_pair(std::mt19937& rng) {
  std::uniform_int_distribution<int> dim(1, 5), deg(0, 4), odd(0, 3), entry(-2, 2);
  GradedNilpotentPair p;
  std::size_t n = dim(rng);
  bool shifted = odd(rng) == 0;
  for (std::size_t i = 0; i < n; ++i) p.degrees.push_back(Rational(2 * deg(rng) + (shifted && i % 2 ? 1 : 0)));
  p.omega = Mat(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (p.degrees[i] == p.degrees[j] + 2) p.omega(i, j) = Scalar(static_cast<long>(entry(rng)));
  return p;
}

// Same grading, fresh random omega.
inline GradedNilpotentPair reroll_omega(GradedNilpotentPair q, std::mt19937& rng) {
  std::uniform_int_distribution<int> entry(-2, 2);
  for (std::size_t i = 0; i < q.dim(); ++i)
    for (std::size_t j = 0; j < q.dim(); ++j)
      if (q.degrees[i] == q.degrees[j] + 2) q.omega(i, j) = Scalar(static_cast<long>(entry(rng)));
  return q;
}

// Random invertible matrix preserving the grading.
inline Mat random_graded_invertible(std::mt19937& rng, const std::vector<Rational>& degrees) {
  const std::size_t n = degrees.size();
  for (;;) {
    Mat g = random_int_matrix(rng, n, n, -3, 3);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (degrees[i] != degrees[j]) g(i, j) = Scalar(0);
    if (determinant(g).abs() > Real(0.5)) return g;
  }
}

inline GradedNilpotentPair conjugate(const GradedNilpotentPair& p, const Mat& g) {
  return {p.degrees, g * p.omega * inverse(g)};
}

// Number of strings per (length, center) from ranks of omega^k between degree spaces.
inline std::vector<std::pair<int, Rational>> rank_oracle(const GradedNilpotentPair& p) {
  auto r = [&](const Rational& deg, int k) -> long {
    Mat src = p.degree_space(deg), dst = p.degree_space(deg + 2 * k);
    if (src.cols() == 0 || dst.cols() == 0) return 0;
    if (k == 0) return static_cast<long>(src.cols());
    return static_cast<long>(rank(dst.transpose() * matpow(p.omega, static_cast<std::size_t>(k)) * src));
  };
  std::vector<std::pair<int, Rational>> out;
  for (const auto& deg : p.distinct_degrees())
    for (int len = 1; len <= static_cast<int>(p.dim()); ++len) {
      long count = r(deg, len - 1) - r(deg, len) - r(deg - 2, len) + r(deg - 2, len + 1);
      for (long c = 0; c < count; ++c) out.push_back({len - 1, deg + Rational(len - 1)});
    }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second > b.second;
  });
  return out;
}

// Brute force: does some graded phi with phi w1 = w2 phi have full rank?
inline bool intertwiner_exists(const GradedNilpotentPair& p, const GradedNilpotentPair& q, std::mt19937& rng) {
  const std::size_t n = p.dim();
  std::vector<std::pair<std::size_t, std::size_t>> slots;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (q.degrees[i] == p.degrees[j]) slots.push_back({i, j});
  if (slots.empty()) return n == 0;
  Mat sys(n * n, slots.size());
  for (std::size_t s = 0; s < slots.size(); ++s) {
    Mat e(n, n);
    e(slots[s].first, slots[s].second) = Scalar(1);
    Mat c = e * p.omega - q.omega * e;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) sys(i * n + j, s) = c(i, j);
  }
  Mat ker = nullspace(sys);
  std::uniform_int_distribution<long> u(-50, 50);
  for (int attempt = 0; attempt < 4; ++attempt) {
    Mat phi(n, n);
    for (std::size_t k = 0; k < ker.cols(); ++k) {
      Scalar w(u(rng));
      for (std::size_t s = 0; s < slots.size(); ++s) phi(slots[s].first, slots[s].second) += w * ker(s, k);
    }
    if (rank(phi) == n) return true;
  }
  return false;
}


// Direct sum of omega-strings centered at n or n + 1.
inline GradedNilpotentPair random_bicentric(std::mt19937& rng) {
  std::uniform_int_distribution<int> blocks(1, 3), len(1, 3), center(0, 1), base(2, 4);
  Rational n = base(rng);
  GradedNilpotentPair p;
  std::vector<std::pair<std::size_t, std::size_t>> links;
  int nb = blocks(rng);
  for (int b = 0; b < nb; ++b) {
    int l = len(rng);
    Rational c = n + center(rng);
    for (int k = 0; k < l; ++k) {
      if (k > 0) links.push_back({p.degrees.size(), p.degrees.size() - 1});
      p.degrees.push_back(c - (l - 1) + 2 * k);
    }
  }
  p.omega = Mat(p.dim(), p.dim());
  for (const auto& [i, j] : links) p.omega(i, j) = Scalar(1);
  return p;
}

}  // namespace orbi::oracle
