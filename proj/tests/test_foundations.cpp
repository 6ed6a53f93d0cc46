#include "hl_oracle.hpp"
#include "support.hpp"

using namespace orbi;
using orbi::oracle::random_int_matrix;

// ---- algebra ----

TEST_CASE("cyclotomic sums of roots of unity vanish") {
  for (long m = 2; m <= 7; ++m) {
    Scalar s;
    for (long k = 0; k < m; ++k) s += root_of_unity_exact(Rational(k, m));
    CHECK(s.exact());
    CHECK(s.exact_value().is_zero());
    CHECK(s.abs() < tol());
  }
  Scalar z = root_of_unity_exact(Rational(1, 3));
  CHECK(near(z + z * z, Scalar(-1)));
  CHECK(near(pow(z, 3), Scalar(1)));
}

TEST_CASE("exact and numeric arithmetic agree") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<long> k(-20, 20), m(1, 12);
  for (int trial = 0; trial < 50; ++trial) {
    Scalar a = root_of_unity_exact(Rational(k(rng), m(rng))) * Scalar(Rational(k(rng), m(rng)));
    Scalar b = root_of_unity_exact(Rational(k(rng), m(rng))) + Scalar(Rational(k(rng), m(rng)));
    Complex num = a.value() * b.value() + a.value();
    CHECK(near(a * b + a, Scalar(num)));
  }
}

TEST_CASE("linear algebra on random rational matrices") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Mat a = random_int_matrix(rng, 4, 4, -3, 3);
    if (determinant(a).abs() < tol()) continue;
    CHECK(max_abs(a * inverse(a) - Mat::identity(4)) < tol());
  }
  Mat b(3, 3);
  b(0, 0) = Scalar(1);
  b(0, 1) = Scalar(2);
  b(1, 0) = Scalar(2);
  b(1, 1) = Scalar(4);
  CHECK(rank(b) == 1);
  Mat n = nullspace(b);
  CHECK(n.cols() == 2);
  CHECK(max_abs(b * n) < tol());
}

TEST_CASE("exp_nilpotent and log_unipotent are inverse") {
  Mat n(3, 3);
  n(1, 0) = Scalar(2);
  n(2, 1) = Scalar(Rational(1, 3));
  n(2, 0) = Scalar(5);
  CHECK(max_abs(log_unipotent(exp_nilpotent(n)) - n) < tol());
}

TEST_CASE("series exponential inverts") {
  SeriesShape sh{{"x", "y"}, 6, -6, 1};
  ScalarSeries x(sh);
  x.add(Monomial{{1, 0}, 0}, Scalar(2));
  x.add(Monomial{{0, 1}, -1}, Scalar(Rational(1, 3)));
  ScalarSeries one = series_exp(x) * series_exp(x.scaled(Scalar(-1)));
  one.add(one.unit_monomial(), Scalar(-1));
  CHECK(one.max_abs() < tol());
}

TEST_CASE("special functions match classical values") {
  CHECK(near_real(hurwitz_zeta(2, Rational(1)), pi() * pi() / 6));
  CHECK(near_real(hurwitz_zeta(4, Rational(1)), mp::pow(pi(), 4) / 90));
  // Gamma(1/2)^2 = pi
  CHECK(near_real(mp::pow(gamma_fn(Real(1) / 2), 2), pi()));
  // Gamma(1 + x) = exp(-gamma x + sum zeta(k)(-x)^k/k)
  PowerSeries g = gamma_taylor(Rational(0), 4);
  CHECK(near(g[1], Scalar(-euler_gamma())));
  CHECK(near(g[2], Scalar((euler_gamma() * euler_gamma() + zeta(2)) / 2)));
}

// ---- orbifold data ----

TEST_CASE("inertia of cyclic quotients") {
  for (long n = 2; n <= 4; ++n) {
    auto d = load("c2z" + std::to_string(n) + ".json").datum;
    CHECK(d.sectors.size() == static_cast<std::size_t>(n));
    for (std::size_t v = 1; v < d.sectors.size(); ++v) {
      CHECK(d.sectors[v].age == 1);
      CHECK(d.sectors[v].dim == 0);
      CHECK(d.sectors[v].centralizer == n);
    }
    CHECK(hl_coarse_check(d));
  }
  auto d = load("c3z3.json").datum;
  CHECK(d.sectors[1].age == 1);
  CHECK(d.sectors[2].age == 2);
  CHECK(d.sectors[1].inv == 2);
  CHECK(!hl_coarse_check(d));
}

TEST_CASE("character tables are orthonormal") {
  for (const char* f : {"c2z2.json", "c2z3.json", "c2z4.json", "c3z3.json"}) {
    auto d = load(f).datum;
    const auto& g = *d.group;
    for (const auto& a : g.characters)
      for (const auto& b : g.characters) CHECK(near(g.inner(a.values, b.values), Scalar(a.name == b.name ? 1 : 0)));
  }
}

TEST_CASE("compact datum loads with its ring structure") {
  auto ld = load("quintic.json");
  const auto& d = ld.datum;
  Vector h = d.unit_vector(d.h_index("H"));
  CHECK(near(integrate(d, d.cup(d.cup(h, h), h)), Scalar(5)));
  CHECK(d.nef.size() == 1);
}

// ---- gamma frame ----

TEST_CASE("Riemann-Roch on P1 against k + 1") {
  auto ld = load("p1.json");
  for (long k = -5; k <= 5; ++k) {
    Scalar x = kawasaki_chi(io::parse_kclass(ld, "O(" + std::to_string(k) + ")"), ld.datum);
    CHECK(near(x, Scalar(k + 1)));
  }
}

TEST_CASE("Riemann-Roch on P2 against the binomial oracle") {
  auto ld = load("p2.json");
  for (long k = -4; k <= 4; ++k) {
    Scalar x = kawasaki_chi(io::parse_kclass(ld, "O(" + std::to_string(k) + ")"), ld.datum);
    CHECK(near(x, Scalar(Rational((k + 1) * (k + 2), 2))));
  }
  CHECK(near(kawasaki_chi(io::parse_kclass(ld, "O_pt"), ld.datum), Scalar(1)));
}

TEST_CASE("Euler characteristics of quintic sheaves") {
  auto ld = load("quintic.json");
  // chi(O(k)) = 5k(k^2+5)/6 on the quintic
  for (long k = -2; k <= 3; ++k) {
    Scalar x = kawasaki_chi(io::parse_kclass(ld, "O(" + std::to_string(k) + ")"), ld.datum);
    CHECK(near(x, Scalar(Rational(5 * k * (k * k + 5), 6))));
  }
  CHECK(near(kawasaki_chi(io::parse_kclass(ld, "O_pt"), ld.datum), Scalar(1)));
  CHECK(near(kawasaki_chi(io::parse_kclass(ld, "O_line"), ld.datum), Scalar(1)));
}

TEST_CASE("non-integral Euler characteristic raises an integrality error") {
  auto ld = load("p1.json");
  ld.sheaves["half"] = io::json::parse(R"({"pieces": [{"ch": {"omega": "1/2"}}]})");
  CHECK_THROWS_AS(kawasaki_chi(io::parse_kclass(ld, "half"), ld.datum), IntegralityError);
}

TEST_CASE("Gamma class of P1") {
  auto ld = load("p1.json");
  Vector g = gamma_class(tangent_bundle(ld.datum), ld.datum);
  CHECK(near(g[ld.datum.h_index("omega")], Scalar(-2 * euler_gamma())));
}

TEST_CASE("Mukai identity on P1 line bundles") {
  auto ld = load("p1.json");
  for (long a = -2; a <= 3; ++a)
    for (long b = -2; b <= 3; ++b) {
      auto r = mukai_pairing_check(io::parse_kclass(ld, "O(" + std::to_string(a) + ")"),
                                   io::parse_kclass(ld, "O(" + std::to_string(b) + ")"), ld.datum);
      CHECK(r.pass);
      CHECK(near(r.rhs, Scalar(a - b + 1)));
    }
}

TEST_CASE("square-root identity sector-wise") {
  for (const char* f : {"p1.json", "p2.json", "quintic.json", "c2z2.json", "c2z3.json", "c2z4.json", "c3z3.json"}) {
    auto d = load(f).datum;
    for (const Real& r : sqrt_identity_residuals(tangent_bundle(d), d)) CHECK(r < tol());
  }
}

TEST_CASE("Koszul traces agree with the skyscraper classes") {
  for (const char* f : {"c2z2.json", "c2z3.json", "c2z4.json", "c3z3.json"}) {
    auto d = load(f).datum;
    for (const auto& ch : d.group->characters) {
      KClass a = koszul_class(d, ch.values), b = skyscraper_class(d, ch.values);
      CHECK(max_abs(a.tch_c - b.tch_c) < tol());
    }
  }
  // trivial representation on [C2/Z2]: 1 - Tr(g|Q) + det = 4
  auto d = load("c2z2.json").datum;
  CHECK(near(koszul_character(d, d.group->character("rho_0").values)[1], Scalar(4)));
}

// ---- galois ----

TEST_CASE("P1 Galois action and Sol pairing") {
  auto d = load("p1.json").datum;
  Mat g = galois_on_sol(galois_character(d, "O(1)"), d);
  CHECK(near(g(0, 0), Scalar(1)));
  CHECK(near(g(0, 1), Scalar(0)));
  CHECK(near(g(1, 0), -two_pi_i()));
  CHECK(near(g(1, 1), Scalar(1)));
  Mat s = sol_pairing_matrix(d);
  CHECK(near(s(0, 0), Scalar(2 * pi())));
  CHECK(near(s(0, 1), scalar_i()));
  CHECK(near(s(1, 0), -scalar_i()));
  CHECK(near(s(1, 1), Scalar(0)));
}

TEST_CASE("z-monodromy") {
  auto p1 = load("p1.json").datum;
  Mat m = z_monodromy(p1);
  CHECK(near(m(0, 0), Scalar(-1)));
  CHECK(near(m(1, 0), Scalar(2) * two_pi_i()));
  CHECK(near(m(1, 1), Scalar(-1)));
  auto c3 = load("c3z3.json").datum;
  CHECK(max_abs(z_monodromy(c3) + Mat::identity(3)) < tol());
}

TEST_CASE("tensoring by a line bundle is the Galois action on Psi") {
  auto ld = load("quintic.json");
  for (const char* v : {"O", "O(2)", "O_pt", "O_S"}) {
    auto r = tensor_line_bundle_check(galois_character(ld.datum, "O(1)"), io::parse_kclass(ld, v), ld.datum);
    CHECK(r.pass);
  }
}

TEST_CASE("Galois matrices preserve the Sol pairing") {
  for (const char* f : {"p1.json", "p2.json", "quintic.json"}) {
    auto d = load(f).datum;
    Mat g = galois_on_sol(galois_character(d, "O(1)"), d);
    Mat s = sol_pairing_matrix(d);
    CHECK(max_abs(g.transpose() * s * g - s) < tol());
  }
}

TEST_CASE("external transforms") {
  auto d = load("p1.json").datum;
  ExternalTransform id{2, 2, {{0, Mat::identity(2)}}};
  CHECK(validate_transform(id, d, d, {}).pass());
  ExternalTransform twice{2, 2, {{0, Mat::identity(2) * Scalar(2)}}};
  auto rep = validate_transform(twice, d, d, {});
  CHECK(!rep.pass());
  for (const auto& c : rep.checks)
    if (c.name == "pairing") CHECK(!c.pass);
  ExternalTransform wrong{3, 2, {{0, Mat(3, 2)}}};
  CHECK_THROWS_AS(validate_transform(wrong, d, d, {}), ShapeError);
}
