#pragma once

#include <orbi/orbifold/datum.hpp>

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace orbi {

// Graded vector space with a degree +2 nilpotent operator.
struct GradedNilpotentPair {
  std::vector<Rational> degrees;
  Mat omega;

  std::size_t dim() const { return degrees.size(); }

  void validate() const {
    if (omega.rows() != dim() || omega.cols() != dim()) throw ShapeError("omega must be square of size dim V");
    for (std::size_t i = 0; i < dim(); ++i)
      for (std::size_t j = 0; j < dim(); ++j)
        if (!omega(i, j).near_zero(Real(0)) && degrees[i] != degrees[j] + 2)
          throw ShapeError("omega is not homogeneous of degree 2");
  }

  std::vector<Rational> distinct_degrees() const {
    std::set<Rational> s(degrees.begin(), degrees.end());
    return {s.begin(), s.end()};
  }
  // Inclusion of the degree-p subspace, as columns.
  Mat degree_space(const Rational& p) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < dim(); ++i)
      if (degrees[i] == p) idx.push_back(i);
    Mat m(dim(), idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) m(idx[k], k) = Scalar(1);
    return m;
  }
};

struct JordanBlock {
  int a = 0;         // string omega^0..omega^a phi
  Rational lambda;   // center; deg phi = lambda - a
  Vector generator;

  bool operator<(const JordanBlock& o) const {
    if (a != o.a) return a > o.a;
    return lambda > o.lambda;
  }
};

struct JordanType {
  std::vector<JordanBlock> blocks;

  std::vector<std::pair<int, Rational>> signature() const {
    std::vector<std::pair<int, Rational>> s;
    for (const auto& b : blocks) s.push_back({b.a, b.lambda});
    return s;
  }
  std::vector<int> ungraded() const {
    std::vector<int> s;
    for (const auto& b : blocks) s.push_back(b.a);
    std::sort(s.rbegin(), s.rend());
    return s;
  }
};

namespace detail {

// Columns spanning {x in span(sub) : A x = 0}.
inline Mat kernel_within(const Mat& a, const Mat& sub) {
  if (sub.cols() == 0) return sub;
  Mat n = nullspace(a * sub);
  return sub * n;
}

// Columns of cand extending the span of base, chosen greedily in order.
inline Mat complement_within(const Mat& base, const Mat& cand) {
  Mat cur = base;
  Mat out(cand.rows(), 0);
  std::size_t r = cur.cols() ? rank(cur) : 0;
  for (std::size_t j = 0; j < cand.cols(); ++j) {
    Mat c = Mat::column(cand.col(j));
    Mat trial = hcat(cur, c);
    std::size_t rt = rank(trial);
    if (rt > r) {
      cur = trial;
      out = hcat(out, c);
      r = rt;
    }
  }
  return out;
}

}  // namespace detail

// Jordan strings with homogeneous generators from kernel/image data of omega^k.
inline JordanType jordan_type(const GradedNilpotentPair& p) {
  p.validate();
  const std::size_t n = p.dim();
  std::vector<Mat> powers{Mat::identity(n)};
  for (std::size_t k = 1; k <= n + 2; ++k) powers.push_back(powers.back() * p.omega);
  JordanType t;
  for (const auto& deg : p.distinct_degrees()) {
    Mat vp = p.degree_space(deg);
    Mat vprev = p.degree_space(deg - 2);
    for (std::size_t a = 0; a <= n; ++a) {
      Mat top = detail::kernel_within(powers[a + 1], vp);
      if (top.cols() == 0) continue;
      Mat lower = detail::kernel_within(powers[a], vp);
      Mat from_prev = p.omega * detail::kernel_within(powers[a + 2], vprev);
      Mat base = hcat(lower, from_prev);
      if (base.cols() > 0) base = column_basis(base);
      Mat gens = detail::complement_within(base, top);
      for (std::size_t j = 0; j < gens.cols(); ++j)
        t.blocks.push_back({static_cast<int>(a), deg + Rational(static_cast<long>(a)), gens.col(j)});
    }
  }
  std::stable_sort(t.blocks.begin(), t.blocks.end());
  std::size_t total = 0;
  for (const auto& b : t.blocks) total += b.a + 1;
  if (total != n) throw DomainError("Jordan string extraction lost dimensions (ill-conditioned input)");
  return t;
}

// Basis of V made of the strings omega^j phi, as columns.
inline Mat string_basis(const GradedNilpotentPair& p, const JordanType& t) {
  Mat b(p.dim(), 0);
  for (const auto& blk : t.blocks) {
    Vector v = blk.generator;
    for (int j = 0; j <= blk.a; ++j) {
      b = hcat(b, Mat::column(v));
      v = p.omega * v;
    }
  }
  return b;
}

struct BicentricSplit {
  Rational n;
  std::vector<std::size_t> v0, v1;  // indices of blocks with center n and n+1
};

inline std::optional<BicentricSplit> is_bicentric_hl(const GradedNilpotentPair& p, const JordanType& t) {
  std::set<Rational> centers;
  for (const auto& b : t.blocks) centers.insert(b.lambda);
  if (centers.size() > 2) return std::nullopt;
  BicentricSplit s;
  if (centers.empty()) return s;
  s.n = *centers.begin();
  if (centers.size() == 2 && *centers.rbegin() != s.n + 1) return std::nullopt;
  for (std::size_t i = 0; i < t.blocks.size(); ++i) (t.blocks[i].lambda == s.n ? s.v0 : s.v1).push_back(i);
  (void)p;
  return s;
}
inline std::optional<BicentricSplit> is_bicentric_hl(const GradedNilpotentPair& p) {
  return is_bicentric_hl(p, jordan_type(p));
}

// Increasing filtration W_k = sum_j ker omega^{j+1} cap im omega^{j-k}, as column bases.
inline std::map<int, Mat> weight_filtration(const GradedNilpotentPair& p) {
  const std::size_t n = p.dim();
  std::vector<Mat> powers{Mat::identity(n)};
  for (std::size_t k = 1; k <= n + 1; ++k) powers.push_back(powers.back() * p.omega);
  const int m = static_cast<int>(n);
  std::map<int, Mat> w;
  for (int k = -m; k <= m; ++k) {
    Mat acc(n, 0);
    for (int j = std::max(0, k); j <= m; ++j) {
      if (j - k > m) continue;
      Mat ker = nullspace(powers[j + 1]);
      Mat im = column_basis(powers[j - k]);
      if (ker.cols() == 0 || im.cols() == 0) continue;
      Mat x = intersect_spans(ker, im);
      if (x.cols()) acc = hcat(acc, x);
    }
    w[k] = acc.cols() ? column_basis(acc) : acc;
  }
  return w;
}

// Checks omega W_k in W_{k-2} and omega^i : Gr_i -> Gr_{-i} bijective; returns max violation count.
inline bool weight_filtration_valid(const GradedNilpotentPair& p, const std::map<int, Mat>& w) {
  const std::size_t n = p.dim();
  auto dimw = [&](int k) -> std::size_t {
    auto it = w.find(k);
    if (it == w.end()) return k < w.begin()->first ? 0 : n;
    return it->second.cols();
  };
  auto basis = [&](int k) -> Mat {
    auto it = w.find(k);
    if (it == w.end()) return k < w.begin()->first ? Mat(n, 0) : Mat::identity(n);
    return it->second;
  };
  for (const auto& [k, wk] : w) {
    if (k - 1 >= w.begin()->first && dimw(k - 1) > wk.cols()) return false;
    Mat img = p.omega * wk;
    Mat lower = basis(k - 2);
    if (img.cols() && rank(hcat(lower, img)) != lower.cols()) return false;
  }
  for (int i = 1; i <= static_cast<int>(n); ++i) {
    // omega^i maps W_i onto W_{-i} modulo W_{-i-1}, and kills exactly W_{i-1} modulo that
    Mat wi = basis(i), wm = basis(-i - 1);
    Mat pi = matpow(p.omega, static_cast<std::size_t>(i));
    Mat img = pi * wi;
    std::size_t gr_i = dimw(i) - dimw(i - 1), gr_mi = dimw(-i) - dimw(-i - 1);
    if (gr_i != gr_mi) return false;
    std::size_t r = img.cols() ? rank(hcat(wm, img)) : wm.cols();
    if (r - wm.cols() != gr_mi) return false;
  }
  return true;
}

inline bool hl_coarse_check(const OrbifoldDatum& d) {
  for (const auto& s : d.sectors)
    if (s.age != d.sectors[s.inv].age) return false;
  return true;
}

struct GenHLEntry {
  Rational f;
  std::vector<Rational> values;
  std::optional<Rational> n_f;
};

// For each fractional age f: is there n_f with n_v + 2 age_v in {n_f, n_f + 1}?
inline std::vector<GenHLEntry> gen_hl_coarse_check(const OrbifoldDatum& d) {
  std::map<Rational, std::vector<Rational>> groups;
  for (const auto& s : d.sectors) groups[frac(s.age)].push_back(s.dim + 2 * s.age);
  std::vector<GenHLEntry> out;
  for (auto& [f, vals] : groups) {
    GenHLEntry e{f, vals, std::nullopt};
    Rational lo = *std::min_element(vals.begin(), vals.end());
    bool ok = true;
    for (const auto& x : vals)
      if (x != lo && x != lo + 1) ok = false;
    if (ok) e.n_f = lo;
    out.push_back(e);
  }
  return out;
}

struct WitnessResult {
  std::optional<Mat> phi;
  std::string diagnostic;
};

// Graded phi with phi omega1 = omega2 phi, built by matching Jordan strings.
inline WitnessResult graded_iso_witness(const GradedNilpotentPair& p1, const GradedNilpotentPair& p2) {
  WitnessResult r;
  if (p1.dim() != p2.dim()) {
    r.diagnostic = "dimensions differ";
    return r;
  }
  std::vector<Rational> d1 = p1.degrees, d2 = p2.degrees;
  std::sort(d1.begin(), d1.end());
  std::sort(d2.begin(), d2.end());
  if (d1 != d2) {
    r.diagnostic = "graded dimensions differ";
    return r;
  }
  JordanType t1 = jordan_type(p1), t2 = jordan_type(p2);
  if (t1.ungraded() != t2.ungraded()) {
    r.diagnostic = "ungraded Jordan types differ; no intertwiner exists";
    return r;
  }
  bool bic = is_bicentric_hl(p1, t1).has_value();
  if (t1.signature() != t2.signature()) {
    r.diagnostic = bic ? "graded Jordan types differ although the first pair is bicentric"
                       : "graded Jordan types differ and the first pair is not bicentric";
    return r;
  }
  Mat b1 = string_basis(p1, t1), b2 = string_basis(p2, t2);
  r.phi = b2 * inverse(b1);
  r.diagnostic = bic ? "witness from matched strings" : "witness from matched strings (first pair not bicentric)";
  return r;
}

}  // namespace orbi
