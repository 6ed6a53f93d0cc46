#include "support.hpp"

using namespace orbi;

namespace {

Rational factorial(long n) {
  Rational r = 1;
  for (long k = 2; k <= n; ++k) r *= k;
  return r;
}

QuantumDModule build(const OrbifoldDatum& d, const CorrelatorTable& t, int order, Locus l) {
  QdmOptions o;
  o.order = order;
  o.locus = l;
  return build_qdm(d, t, o);
}

CorrelatorTable empty_table(const OrbifoldDatum& d) {
  CorrelatorTable t;
  t.nef_rank = d.nef.size();
  return t;
}

void check_all(const std::vector<ResidualReport>& rs) {
  for (const auto& r : rs) {
    INFO(r.name << " residual " << format_real(r.residual, 6));
    CHECK(r.pass);
  }
}

Monomial mono(const QuantumDModule& m, std::vector<int> e, int z) {
  e.resize(m.vars.size(), 0);
  return Monomial{e, z};
}

}  // namespace

// ---- quantum D-module ----

TEST_CASE("P1 J-function against the hypergeometric series") {
  auto d = load("p1.json").datum;
  const int order = 5;
  QuantumDModule m = build(d, io::load_table(fixture("p1_table.json"), d), order, Locus::small);
  REQUIRE(m.shape.vars == std::vector<std::string>{"t:omega", "q:omega"});
  FundamentalSolution f = fundamental_solution(m);
  VectorSeries J = j_function(m, f);
  const std::size_t one = d.h_index("1"), om = d.h_index("omega");
  // J(tau,-z) = sum_d Q^d / (d!^2 z^{2d}) (1 + (2 H_d - t) omega / z) with Q = q e^t the series variable
  VectorSeries oracle(m.shape);
  for (int dd = 0; dd <= order; ++dd) {
    Rational hd = 0;
    for (long k = 1; k <= dd; ++k) hd += Rational(1, k);
    Rational w = 1 / (factorial(dd) * factorial(dd));
    Vector v(2), u(2), t(2);
    v[one] = Scalar(w);
    u[om] = Scalar(2 * hd * w);
    t[om] = Scalar(-w);
    oracle.add(mono(m, {0, dd}, -2 * dd), v);
    oracle.add(mono(m, {0, dd}, -2 * dd - 1), u);
    if (dd < order) oracle.add(mono(m, {1, dd}, -2 * dd - 1), t);
  }
  CHECK((J - oracle).max_abs() < tol());
  check_all(wdvv_check(m));
  check_all(connection_flatness(m));
  CHECK(unitarity_check(m, f).pass);
}

TEST_CASE("[C3/Z3] J-function from the orbifold potential") {
  auto d = load("c3z3.json").datum;
  Potentials p = io::load_potentials(fixture("c3z3_pots.json"), d);
  const int order = 9;
  QuantumDModule m = build(d, table_from_potential(d, p), order, Locus::small);
  FundamentalSolution f = fundamental_solution(m);
  VectorSeries J = j_function(m, f);
  const std::size_t g = d.h_index("1_g"), g2 = d.h_index("1_g2");
  // J(tau,-z) = 1 - t 1_g / z + 3 F0'(t) 1_g2 / z^2
  VectorSeries oracle = VectorSeries::constant(m.shape, d.unit_vector(d.unit()));
  Vector e(3);
  e[g] = Scalar(-1);
  oracle.add(mono(m, {1}, -1), e);
  for (const auto& [c, k] : std::vector<std::pair<Rational, int>>{
           {Rational(1, 18), 3}, {Rational(-1, 19440), 6}, {Rational(1, 3265920), 9}}) {
    Vector v(3);
    v[g2] = Scalar(3 * c * k);
    oracle.add(mono(m, {k - 1}, -2), v);
  }
  CHECK((J - oracle).max_abs() < tol());
  check_all(wdvv_check(m));
  check_all(connection_flatness(m));
  CHECK(unitarity_check(m, f).pass);
  Mat mu = d.mu();
  mu(0, 0) += Scalar(1);
  bool all = true;
  for (const auto& r : connection_flatness(m, tol(), mu)) all = all && r.pass;
  CHECK(!all);
}

TEST_CASE("degree axiom filters correlator lookups") {
  auto d = load("p1.json").datum;
  CorrelatorTable t = empty_table(d);
  CorrelatorOracle o(d, t);
  const std::size_t om = d.h_index("omega");
  CHECK(o.value({om}, {2}).abs() == 0);
  CHECK(o.missing().empty());
  o.value({om, om, om}, {1});
  CHECK(o.missing().size() == 1);
  CHECK_THROWS_AS(build(d, t, 2, Locus::small), MissingDataError);
  t.complete_through = 5;
  CHECK_NOTHROW(build(d, t, 2, Locus::small));
}

TEST_CASE("P2 tables: WDVV holds for true invariants and fails for a corrupted one") {
  auto d = load("p2.json").datum;
  QuantumDModule good = build(d, io::load_table(fixture("p2_table.json"), d), 5, Locus::big);
  check_all(wdvv_check(good));
  QuantumDModule bad = build(d, io::load_table(fixture("p2_table_bad.json"), d), 5, Locus::big);
  bool assoc = true;
  for (const auto& r : wdvv_check(bad))
    if (r.name == "associativity") assoc = r.pass;
  CHECK(!assoc);
}

// Ltilde = exp(-(tau o)^dagger / z)
TEST_CASE("[C2/G] fundamental solution is the classical exponential") {
  for (const char* file : {"c2z2.json", "c2z3.json", "c2z4.json"}) {
    auto d = load(file).datum;
    const int order = 4;
    QuantumDModule m = build(d, empty_table(d), order, Locus::standard);
    FundamentalSolution f = fundamental_solution(m);
    // no quantum corrections: each A_i is its constant term
    MatSeries T(m.shape);
    const Monomial zero = mono(m, {}, 0);
    for (std::size_t v = 0; v < m.vars.size(); ++v) {
      const std::size_t i = m.vars[v].cls;
      CHECK((m.A[i] - MatSeries::constant(m.shape, *m.A[i].get(zero))).max_abs() == 0);
      T.add(m.var_mono(v), *m.Ac[i].get(zero));
    }
    MatSeries oracle = MatSeries::constant(m.shape, Mat::identity(d.dim_hc())), pw = oracle;
    for (int k = 1; k <= order; ++k) {
      pw = pw * T;
      oracle += pw.shift_z(-k).scaled(Scalar(Rational(k % 2 ? -1 : 1) / factorial(k)));
    }
    CHECK((f.Ltilde - oracle).max_abs() < tol());
  }
}

// ---- central charges ----

TEST_CASE("regular representation has charge exp(-t0/z)") {
  for (const char* file : {"c2z2.json", "c2z3.json"}) {
    auto d = load(file).datum;
    QuantumDModule m = build(d, empty_table(d), 4, Locus::standard);
    FundamentalSolution f = fundamental_solution(m);
    auto reg = d.group->virtual_character({{"reg", 1}});
    SeriesShape sh = charge_shape(m);
    ScalarSeries e(sh);
    for (int k = 0; k <= 4; ++k) {
      std::vector<int> x(m.vars.size(), 0);
      x[0] = k;
      e.add(Monomial{x, -k}, Scalar(Rational(k % 2 ? -1 : 1) / factorial(k)));
    }
    ChargeFunction oracle(sh);
    oracle.add(Rational(0), 0, e);
    CHECK(distance(charge_c2(m, reg), oracle) < tol());
    CHECK(distance(central_charge(psi_map(koszul_class(d, reg), d), m, f), oracle) < tol());
  }
}

TEST_CASE("closed-form charges match the pipeline for every irreducible") {
  for (const char* file : {"c2z2.json", "c2z3.json", "c2z4.json"}) {
    auto d = load(file).datum;
    QuantumDModule m = build(d, empty_table(d), 4, Locus::standard);
    FundamentalSolution f = fundamental_solution(m);
    for (const auto& ch : d.group->characters) {
      INFO(file << " " << ch.name);
      ChargeFunction z = central_charge(psi_map(koszul_class(d, ch.values), d), m, f);
      CHECK(distance(z, charge_c2(m, ch.values)) < tol());
    }
  }
  auto d = load("c3z3.json").datum;
  Potentials p = io::load_potentials(fixture("c3z3_pots.json"), d);
  QuantumDModule m = build(d, table_from_potential(d, p), 9, Locus::small);
  FundamentalSolution f = fundamental_solution(m);
  for (const auto& ch : d.group->characters) {
    INFO(ch.name);
    ChargeFunction z = central_charge(psi_map(koszul_class(d, ch.values), d), m, f);
    CHECK(distance(z, charge_c3(m, ch.values, p)) < tol());
    CHECK_NOTHROW(z.z_free());
  }
  Potentials none;
  CHECK_THROWS_AS(charge_c3(m, d.group->character("rho_1").values, none), MissingPotentialError);
}

TEST_CASE("quintic charges, periods and the A0 vector") {
  auto ld = load("quintic.json");
  const auto& d = ld.datum;
  Potentials p = io::load_potentials(fixture("quintic_pots.json"), d);
  QuantumDModule m = build(d, table_from_potential(d, p), 2, Locus::small);
  FundamentalSolution f = fundamental_solution(m);
  CHECK(unitarity_check(m, f).pass);
  Cy3Sheaf pt, line, surf, str;
  line.kind = Cy3Sheaf::curve;
  line.curve_class = {Scalar(1)};
  surf.kind = Cy3Sheaf::surface;
  surf.divisor = d.unit_vector(d.h_index("H"));
  surf.chi_surface = Scalar(55);
  str.kind = Cy3Sheaf::structure;
  for (const auto& [name, k] : std::vector<std::pair<std::string, Cy3Sheaf>>{
           {"O_pt", pt}, {"O_line", line}, {"O_S", surf}, {"O", str}}) {
    INFO(name);
    ChargeFunction z = central_charge(psi_map(io::parse_kclass(ld, name), d), m, f);
    CHECK_NOTHROW(z.z_free());
    CHECK(distance(z, cy3_sheaf_charge(k, m, p)) < tol());
  }
  FramedSection a = psi_map(io::parse_kclass(ld, "O_pt"), d), b = psi_map(io::parse_kclass(ld, "O_line"), d);
  ScalarSeries pa = integral_period(a, m, f), pb = integral_period(b, m, f);
  CHECK((pa - ScalarSeries::constant(m.shape, Scalar(1))).max_abs() < tol());
  FramedSection ab{a.psi + b.psi * Scalar(2), false};
  CHECK((integral_period(ab, m, f) - pa - pb.scaled(Scalar(2))).max_abs() < tol());

  A0Result r = a0_vector(d, galois_character(d, "O(1)"), io::parse_kclass(ld, "O_pt"));
  CHECK(r.in_image);
  CHECK(r.nilpotency == 4);
  CHECK(r.image.cols() == 1);
  CHECK(!r.sign_fixed);
  CHECK_THROWS_AS(a0_vector(d, galois_character(d, "O(1)", 0), io::parse_kclass(ld, "O_pt")), DomainError);
}

TEST_CASE("A0 on P1 spans the image of M - 1") {
  auto ld = load("p1.json");
  A0Result r = a0_vector(ld.datum, galois_character(ld.datum, "O(1)"), io::parse_kclass(ld, "O_pt"));
  CHECK(r.in_image);
  CHECK(r.nilpotency == 2);
}

TEST_CASE("periods need a vanishing Euler field") {
  auto d = load("p1.json").datum;
  QuantumDModule m = build(d, io::load_table(fixture("p1_table.json"), d), 3, Locus::small);
  FundamentalSolution f = fundamental_solution(m);
  CHECK_THROWS_AS(integral_period(FramedSection{d.unit_vector(0), false}, m, f), DomainError);
}

// ---- crepant prediction ----

TEST_CASE("local P2 coordinate change") {
  auto d = load("c3z3.json").datum;
  Potentials p = io::load_potentials(fixture("c3z3_pots.json"), d);
  QuantumDModule m = build(d, table_from_potential(d, p), 9, Locus::small);
  io::FMFile fm = io::load_fm(fixture("localp2_fm.json"), d);
  auto pred = predict_coordinate_change(m, fm.fm, p);
  REQUIRE(pred.size() == 1);
  const auto& c = pred[0];
  // character 2 rho_1 + rho_2 at g is 2 zeta + zeta^2 = (-3 + i sqrt 3)/2
  Scalar s3 = Scalar(mp::sqrt(Real(3)));
  Scalar chi_g = (Scalar(-3) + scalar_i() * s3) / Scalar(2), chi_g2 = chi_g.conj();
  Scalar k = -two_pi_i();
  std::map<std::string, Scalar> want{
      {"1", k},
      {"t:1_g", k * chi_g / Scalar(3 * mp::pow(gamma_fn(Real(2) / 3), 3))},
      {"F0:g2", k * chi_g2 / Scalar(mp::pow(gamma_fn(Real(1) / 3), 3))}};
  REQUIRE(c.terms.size() == want.size());
  for (const auto& t : c.terms) {
    INFO(t.name);
    REQUIRE(want.count(t.name));
    CHECK(near(t.coeff, want[t.name]));
  }
  CHECK(near(c.q, root_of_unity_exact(Rational(-1))));
  CHECK(c.q_residual < tol());

  FundamentalSolution f = fundamental_solution(m);
  Scalar u = Scalar(1) / two_pi_i();
  std::vector<YCharge> y{{"E", Scalar(0), -u, fm.fm.curves[0].character}};
  CHECK(crossref_central_charges(m, f, pred, y)[0].sign == 1);
  y[0].slope = u;
  CHECK(crossref_central_charges(m, f, pred, y)[0].sign == -1);
  y[0].constant = Scalar(1);
  CHECK(crossref_central_charges(m, f, pred, y)[0].sign == 0);

  FMCurve bad{"E", {{"rho_1", 2}}, 3};
  CHECK_THROWS_AS(fm_character(d, bad), DataError);
}

// ---- input files ----

TEST_CASE("schema errors carry a JSON path") {
  auto p1 = load("p1.json").datum;
  auto c3 = load("c3z3.json").datum;
  auto path_of = [](auto f) -> std::string {
    try {
      f();
    } catch (const io::SchemaError& e) {
      return e.path;
    }
    return "<none>";
  };
  using io::json;
  CHECK(path_of([&] { io::parse_table(json::parse(R"({"nef_basis": 1})"), p1); }) == "/entries");
  CHECK(path_of([&] {
          io::parse_table(json::parse(R"({"nef_basis": 1, "entries": [{"insertions": [], "d": [1, 2], "value": 1}]})"),
                          p1);
        }) == "/entries/0/d");
  CHECK(path_of([&] { io::parse_table(json::parse(R"({"nef_basis": 2, "entries": []})"), p1); }) == "/nef_basis");
  CHECK(path_of([&] { io::parse_potentials(json::parse(R"({"F0": [["1/18", [3, 1]]]})"), c3); }) == "/F0/0/1");
  CHECK(path_of([&] { io::parse_potentials(json::parse(R"j({"sectors": {"(h)": {"coeffs": []}}})j"), c3); }) ==
        "/sectors/(h)");
  CHECK(path_of([&] { io::parse_fm(json::parse(R"({"curves": [{"label": "E", "character": {"sigma": 1}, "dim": 1}]})"), c3); }) ==
        "/curves/0/character/sigma");
  CHECK(path_of([&] { io::parse_transform(json::parse(R"({"matrix": [[{"x": 1}]]})"), p1, p1); }) == "/matrix/0/0/x");
  CHECK(path_of([&] { io::parse_pair(json::parse(R"({"degrees": [0, 2], "omega": [[0, 0]]})")); }) == "/omega");
  CHECK(path_of([&] { io::parse_pair(json::parse(R"({"degrees": [0, 2], "omega": [[0, 1], [0, 0]]})")); }) ==
        "/omega");
  CHECK(path_of([&] { io::load_table(fixture("nonexistent.json"), p1); }) != "<none>");
}

TEST_CASE("missing correlators are listed by key") {
  auto d = load("p2.json").datum;
  CorrelatorTable t = io::load_table(fixture("p2_table.json"), d);
  t.complete_through = 1;
  for (auto it = t.entries.begin(); it != t.entries.end();)
    it = it->first.second == std::vector<long>{2} ? t.entries.erase(it) : std::next(it);
  try {
    build(d, t, 5, Locus::big);
    FAIL("expected MissingDataError");
  } catch (const MissingDataError& e) {
    CHECK(!e.keys.empty());
    CHECK(e.keys == std::vector<std::string>{"<pt,pt,pt,pt,pt>_d=(2)"});
  }
}
