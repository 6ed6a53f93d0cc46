#include "hl_oracle.hpp"
#include "support.hpp"

#include <algorithm>
#include <numeric>

using namespace orbi;
using namespace orbi::oracle;

TEST_CASE("jordan_type against rank counts and intertwiner search on 200 random pairs") {
  std::mt19937 rng(2024);
  int with_iso = 0, without = 0;
  for (int trial = 0; trial < 200; ++trial) {
    GradedNilpotentPair p = random_pair(rng);
    GradedNilpotentPair q = trial % 2 == 0 ? conjugate(p, random_graded_invertible(rng, p.degrees)) : reroll_omega(p, rng);
    JordanType tp = jordan_type(p), tq = jordan_type(q);
    CHECK(tp.signature() == rank_oracle(p));
    CHECK(tq.signature() == rank_oracle(q));
    bool same = tp.signature() == tq.signature();
    bool exists = intertwiner_exists(p, q, rng);
    CHECK(same == exists);
    (exists ? with_iso : without)++;
    WitnessResult w = graded_iso_witness(p, q);
    CHECK(w.phi.has_value() == same);
    if (w.phi) {
      CHECK(max_abs(*w.phi * p.omega - q.omega * *w.phi) < tol());
      CHECK(rank(*w.phi) == p.dim());
    }
    CHECK(weight_filtration_valid(p, weight_filtration(p)));
  }
  CHECK(with_iso >= 100);
  CHECK(without > 0);
}

TEST_CASE("Jordan type is independent of basis order") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    GradedNilpotentPair p = random_pair(rng);
    std::vector<std::size_t> perm(p.dim());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    GradedNilpotentPair q;
    q.omega = Mat(p.dim(), p.dim());
    for (std::size_t i = 0; i < p.dim(); ++i) {
      q.degrees.push_back(p.degrees[perm[i]]);
      for (std::size_t j = 0; j < p.dim(); ++j) q.omega(i, j) = p.omega(perm[i], perm[j]);
    }
    CHECK(jordan_type(p).signature() == jordan_type(q).signature());
  }
}

TEST_CASE("witnesses for 50 random bicentric pairs") {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    GradedNilpotentPair p = random_bicentric(rng);
    REQUIRE(is_bicentric_hl(p).has_value());
    GradedNilpotentPair q = conjugate(p, random_graded_invertible(rng, p.degrees));
    WitnessResult w = graded_iso_witness(p, q);
    REQUIRE(w.phi.has_value());
    CHECK(max_abs(*w.phi * p.omega - q.omega * *w.phi) < tol());
    CHECK(rank(*w.phi) == p.dim());
    for (std::size_t i = 0; i < p.dim(); ++i)
      for (std::size_t j = 0; j < p.dim(); ++j)
        if (p.degrees[i] != p.degrees[j]) CHECK((*w.phi)(i, j).abs() < tol());
  }
}

TEST_CASE("distinct graded types have no witness") {
  auto p = io::load_pair(fixture("hl_bicentric.json"));
  auto q = io::load_pair(fixture("hl_tricentric.json"));
  CHECK(is_bicentric_hl(p).has_value());
  CHECK(!is_bicentric_hl(q).has_value());
  WitnessResult w = graded_iso_witness(p, q);
  CHECK(!w.phi.has_value());
}

TEST_CASE("hard Lefschetz for an ample class on compact data") {
  for (const char* f : {"p1.json", "p2.json", "quintic.json"}) {
    auto d = load(f).datum;
    auto p = io::datum_pair(d, d.line_bundle("O(1)").xi0);
    JordanType t = jordan_type(p);
    REQUIRE(t.blocks.size() == 1);
    CHECK(t.blocks[0].lambda == d.n);
  }
}

TEST_CASE("gen-HL coarse data") {
  auto d = load("c2z3.json").datum;
  for (const auto& e : gen_hl_coarse_check(d)) CHECK(e.n_f.has_value());
  auto c3 = load("c3z3.json").datum;
  bool all = true;
  for (const auto& e : gen_hl_coarse_check(c3)) all = all && e.n_f.has_value();
  CHECK(!all);
}
