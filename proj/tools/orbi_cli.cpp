#include <orbi/io/tables.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace {

using namespace orbi;
using io::ojson;

constexpr const char* kVersion = "0.1.0";

struct Options {
  std::string spec, target, cls, cls2, rep, table, pots, fm, transform, pair, pair2, out, locus = "small", closed;
  unsigned precision = 64;
  int order = 12;
  long power = 1;
  double tolerance = 1e-10;
  bool text = false, timing = false;
};

// FNV-1a over the file bytes.
std::string digest(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  std::uint64_t h = 1469598103934665603ull;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

class Report {
 public:
  ojson doc = ojson::object();

  explicit Report(const std::string& cmd) {
    doc["command"] = cmd;
    doc["inputs"] = ojson::object();
    doc["results"] = ojson::object();
    doc["checks"] = ojson::array();
  }
  void input(const std::string& key, const std::string& file) {
    if (!file.empty()) doc["inputs"][key] = {{"file", file}, {"digest", digest(file)}};
  }
  ojson& result(const std::string& key) { return doc["results"][key]; }
  void check(const std::string& name, bool pass, const Real& residual) {
    doc["checks"].push_back({{"name", name}, {"pass", pass}, {"residual", format_real(residual, 6)}});
  }
  void check(const std::string& name, bool pass) { doc["checks"].push_back({{"name", name}, {"pass", pass}}); }
  void check(const ResidualReport& r) { check(r.name, r.pass, r.residual); }
  bool pass() const {
    for (const auto& c : doc["checks"])
      if (!c["pass"].get<bool>()) return false;
    return true;
  }
};

// ---- serialization ----

ojson sjson(const Scalar& s) { return io::scalar_json(s); }
ojson vjson(const Vector& v) { return io::vector_json(v); }
ojson mjson(const Mat& m) { return io::matrix_json(m); }

template <class C, class F>
ojson series_json(const Series<C>& s, F coeff, const Real& tol) {
  ojson terms = ojson::array();
  for (const auto& [m, c] : s.terms()) {
    if (coeff_abs(c) <= tol) continue;
    terms.push_back({{"t", m.e}, {"z", m.z}, {"value", coeff(c)}});
  }
  return {{"variables", s.shape().vars}, {"order", s.shape().order}, {"terms", terms}};
}
ojson series_json(const ScalarSeries& s, const Real& tol) { return series_json(s, sjson, tol); }
ojson series_json(const VectorSeries& s, const Real& tol) { return series_json(s, vjson, tol); }
ojson series_json(const MatSeries& s, const Real& tol) { return series_json(s, mjson, tol); }

ojson charge_json(const ChargeFunction& c, const Real& tol) {
  ojson parts = ojson::array();
  for (const auto& [key, s] : c.parts)
    parts.push_back({{"z_shift", format_rational(key.first)}, {"log_power", key.second}, {"series", series_json(s, tol)}});
  return {{"source", c.source}, {"parts", parts}};
}

ojson named_vector(const std::vector<BasisClass>& b, const Vector& v) {
  ojson o = ojson::object();
  for (std::size_t i = 0; i < b.size(); ++i) o[b[i].name] = sjson(v[i]);
  return o;
}

// ---- text rendering ----

bool numeric_string(const ojson& j) {
  if (!j.is_string()) return false;
  const auto& s = j.get_ref<const std::string&>();
  return !s.empty() && s.find_first_not_of("0123456789+-.e") == std::string::npos;
}
// Decimal components are always in scientific notation; rationals never carry an exponent.
bool complex_pair(const ojson& j) {
  if (!(j.is_array() && j.size() == 2 && numeric_string(j[0]) && numeric_string(j[1]))) return false;
  return j[0].get<std::string>().find('e') != std::string::npos || j[1].get<std::string>().find('e') != std::string::npos;
}

std::string leaf_text(const ojson& j) {
  if (j.is_string()) return j.get<std::string>();
  if (complex_pair(j)) {
    auto shorten = [](const std::string& s) {
      Real r(s);
      std::ostringstream o;
      o << std::setprecision(12) << r.convert_to<double>();
      return o.str();
    };
    std::string im = shorten(j[1].get<std::string>());
    if (im[0] == '-') return shorten(j[0].get<std::string>()) + " - " + im.substr(1) + "i";
    return shorten(j[0].get<std::string>()) + " + " + im + "i";
  }
  return j.dump();
}

void flatten(const ojson& j, const std::string& path, std::vector<std::pair<std::string, std::string>>& rows) {
  bool complex_leaf = complex_pair(j);
  if (j.is_object() && !j.empty()) {
    for (const auto& [k, v] : j.items()) flatten(v, path.empty() ? k : path + "." + k, rows);
  } else if (j.is_array() && !j.empty() && !complex_leaf) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], path + "[" + std::to_string(i) + "]", rows);
  } else {
    rows.push_back({path, leaf_text(j)});
  }
}

std::string render_text(const ojson& doc) {
  std::ostringstream o;
  o << "command: " << doc["command"].get<std::string>() << "\n";
  std::vector<std::pair<std::string, std::string>> rows;
  flatten(doc["results"], "", rows);
  std::size_t w = 0;
  for (const auto& r : rows) w = std::max(w, r.first.size());
  for (const auto& r : rows) o << "  " << std::left << std::setw(static_cast<int>(w)) << r.first << "  " << r.second << "\n";
  if (!doc["checks"].empty()) {
    o << "checks:\n";
    std::size_t cw = 0;
    for (const auto& c : doc["checks"]) cw = std::max(cw, c["name"].get<std::string>().size());
    for (const auto& c : doc["checks"]) {
      o << "  " << std::left << std::setw(static_cast<int>(cw)) << c["name"].get<std::string>() << "  "
        << (c["pass"].get<bool>() ? "pass" : "FAIL");
      if (c.contains("residual")) o << "  " << c["residual"].get<std::string>();
      o << "\n";
    }
  }
  if (doc.contains("error")) o << "error: " << doc["error"]["message"].get<std::string>() << "\n";
  return o.str();
}

// ---- input helpers ----

struct Context {
  const Options& o;
  Report& r;
  io::LoadedDatum ld;
  Real tol;

  Context(const Options& opt, Report& rep) : o(opt), r(rep), tol(opt.tolerance) {
    if (o.spec.empty()) throw io::SchemaError("--spec", "a datum file is required");
    ld = io::load_datum(o.spec);
    r.input("spec", o.spec);
  }
  const OrbifoldDatum& d() const { return ld.datum; }

  KClass kclass(const std::string& text, const std::string& fallback) const {
    return io::parse_kclass(ld, text.empty() ? fallback : text);
  }
  std::vector<Scalar> character() const {
    if (!d().group) throw io::SchemaError("--rep", "representations need a quotient datum");
    if (o.rep.empty()) return d().group->regular();
    std::map<std::string, long> mult;
    std::string s = o.rep;
    std::size_t p = 0;
    long sign = 1;
    while (p < s.size()) {
      while (p < s.size() && s[p] == ' ') ++p;
      long c = 1;
      std::size_t st = p;
      while (p < s.size() && std::isdigit(static_cast<unsigned char>(s[p]))) ++p;
      if (p > st) {
        c = std::stol(s.substr(st, p - st));
        if (p >= s.size() || s[p] != '*') throw io::SchemaError("--rep", "expected '*' after a multiplicity");
        ++p;
      }
      st = p;
      while (p < s.size() && s[p] != '+' && s[p] != '-' && s[p] != ' ') ++p;
      std::string name = s.substr(st, p - st);
      if (name != "reg") {
        try {
          d().group->character(name);
        } catch (const DataError&) {
          throw io::SchemaError("--rep", "unknown irreducible '" + name + "'");
        }
      }
      mult[name] += sign * c;
      while (p < s.size() && s[p] == ' ') ++p;
      if (p < s.size()) {
        sign = s[p] == '-' ? -1 : 1;
        ++p;
      }
    }
    return d().group->virtual_character(mult);
  }
  // Quotient data take --rep (O_0 (x) rho), other data --class.
  FramedSection section(std::string fallback = "O") const {
    if (d().group && o.cls.empty()) return psi_map(koszul_class(d(), character()), d());
    return psi_map(kclass(o.cls, fallback), d());
  }

  Locus locus() const {
    if (o.locus == "small") return Locus::small;
    if (o.locus == "standard") return Locus::standard;
    if (o.locus == "big") return Locus::big;
    throw io::SchemaError("--locus", "expected small, standard or big");
  }
  Potentials potentials() const {
    if (o.pots.empty()) return {};
    r.input("pots", o.pots);
    return io::load_potentials(o.pots, d());
  }
  CorrelatorTable table() const {
    if (!o.table.empty()) {
      r.input("table", o.table);
      return io::load_table(o.table, d());
    }
    if (!o.pots.empty()) return table_from_potential(d(), potentials());
    CorrelatorTable t;
    t.nef_rank = d().nef.size();
    return t;
  }
  QuantumDModule qdm() const {
    QdmOptions q;
    q.order = o.order;
    q.locus = locus();
    QuantumDModule m = build_qdm(d(), table(), q);
    r.result("variables") = m.shape.vars;
    return m;
  }
  std::size_t h_class(const std::string& name, const std::string& flag) const {
    try {
      return d().h_index(name);
    } catch (const DataError&) {
      throw io::SchemaError(flag, "unknown class '" + name + "'");
    }
  }
};

// ---- subcommands ----

void cmd_inertia(Context& c) {
  const auto& d = c.d();
  ojson secs = ojson::array();
  for (const auto& s : d.sectors) {
    ojson ph = ojson::array();
    for (const auto& f : s.phases) ph.push_back(format_rational(f));
    secs.push_back({{"label", s.label},
                    {"age", format_rational(s.age)},
                    {"dim", s.dim},
                    {"centralizer", s.centralizer},
                    {"phases", ph},
                    {"inverse", d.sectors[s.inv].label}});
  }
  auto basis = [](const std::vector<BasisClass>& b) {
    ojson a = ojson::array();
    for (const auto& x : b) a.push_back({{"name", x.name}, {"degree", format_rational(x.degree)}});
    return a;
  };
  c.r.result("dimension") = d.n;
  c.r.result("compact") = d.compact;
  c.r.result("sectors") = secs;
  c.r.result("H") = basis(d.H);
  c.r.result("Hc") = basis(d.Hc);
  ConditionReport cr = condition_checks(d);
  c.r.check("uniqueness (opposite)", cr.uniqueness_opposite);
  c.r.check("uniqueness (dilaton)", cr.uniqueness_dilaton);
}

void cmd_pairing(Context& c) {
  c.r.result("rows") = io::basis_json(c.d().Hc);
  c.r.result("cols") = io::basis_json(c.d().H);
  c.r.result("pairing") = mjson(c.d().pairing);
  c.r.result("sol_pairing") = mjson(sol_pairing_matrix(c.d()));
  c.r.check("nondegenerate", rank(c.d().pairing) == c.d().dim_h());
}

void cmd_gamma(Context& c) {
  KClass v = c.kclass(c.o.cls, "T");
  c.r.result("class") = c.o.cls.empty() ? "T" : c.o.cls;
  c.r.result("gamma") = named_vector(c.d().H, gamma_class(v, c.d()));
  auto res = sqrt_identity_residuals(v, c.d());
  for (std::size_t s = 0; s < res.size(); ++s)
    c.r.check("sqrt identity on " + c.d().sectors[s].label, res[s] < c.tol, res[s]);
}

void cmd_chern(Context& c) {
  KClass v = c.kclass(c.o.cls, "T");
  c.r.result("compact_support") = v.compact_support;
  c.r.result("ch") = named_vector(v.compact_support ? c.d().Hc : c.d().H, orbifold_chern_character(v, c.d()));
}

void cmd_todd(Context& c) {
  KClass v = c.kclass(c.o.cls, "T");
  c.r.result("todd") = named_vector(c.d().H, todd_class(v, c.d()));
}

void cmd_chi(Context& c) {
  KClass v = c.d().group && c.o.cls.empty() ? koszul_class(c.d(), c.character()) : c.kclass(c.o.cls, "O");
  Scalar x = kawasaki_chi(v, c.d(), c.tol);
  c.r.result("chi") = sjson(x);
  Real re = x.re();
  Real dist = mp::abs(re - mp::round(re));
  c.r.check("integrality", dist < c.tol && mp::abs(x.im()) < c.tol, rmax(dist, mp::abs(x.im())));
}

void cmd_psi(Context& c) {
  FramedSection p = c.section();
  c.r.result("compact_support") = p.compact_support;
  c.r.result("psi") = named_vector(p.compact_support ? c.d().Hc : c.d().H, p.psi);
}

void cmd_mukai(Context& c) {
  KClass a = c.kclass(c.o.cls, "O"), b = c.kclass(c.o.cls2, "O");
  MukaiReport m = mukai_pairing_check(a, b, c.d(), c.tol);
  c.r.result("pairing") = sjson(m.lhs);
  c.r.result("chi") = sjson(m.rhs);
  c.r.check("mukai", m.pass, m.residual);
}

void cmd_galois(Context& c) {
  if (c.o.cls.empty()) throw io::SchemaError("--class", "a line bundle name is required");
  GaloisCharacter x = galois_character(c.d(), c.o.cls, c.o.power);
  c.r.result("line_bundle") = x.label;
  c.r.result("period") = galois_period(x);
  c.r.result("on_sol") = mjson(galois_on_sol(x, c.d()));
  c.r.result("sector_scaling") = mjson(galois_sector_scaling(x, c.d()));
  KClass v = c.kclass(c.o.cls2, "O");
  TensorCheckReport t = tensor_line_bundle_check(x, v, c.d(), c.tol);
  c.r.check("Psi(L^vee V) = G Psi(V)", t.pass, t.residual);
}

void cmd_monodromy(Context& c) {
  c.r.result("monodromy") = mjson(z_monodromy(c.d()));
  if (!c.d().compact) c.r.result("monodromy_c") = mjson(z_monodromy(c.d(), true));
}

ojson jordan_json(const GradedNilpotentPair& p) {
  JordanType t = jordan_type(p);
  ojson blocks = ojson::array();
  for (const auto& b : t.blocks) blocks.push_back({{"length", b.a + 1}, {"center", format_rational(b.lambda)}});
  auto bic = is_bicentric_hl(p, t);
  ojson o = {{"blocks", blocks}, {"bicentric", bic.has_value()}};
  if (bic) o["n"] = format_rational(bic->n);
  return o;
}

void cmd_hl_check(Context& c) {
  bool coarse = hl_coarse_check(c.d());
  c.r.result("hl_coarse") = coarse;
  ojson gen = ojson::array();
  bool gen_ok = true;
  for (const auto& e : gen_hl_coarse_check(c.d())) {
    ojson vals = ojson::array();
    for (const auto& v : e.values) vals.push_back(format_rational(v));
    gen.push_back({{"f", format_rational(e.f)}, {"values", vals}, {"n_f", e.n_f ? ojson(format_rational(*e.n_f)) : ojson()}});
    gen_ok = gen_ok && e.n_f.has_value();
  }
  c.r.result("gen_hl_coarse") = gen;
  c.r.check("hl coarse", coarse);
  c.r.check("gen-hl coarse", gen_ok);
}

void cmd_jordan(const Options& o, Report& r) {
  GradedNilpotentPair p;
  if (!o.pair.empty()) {
    p = io::load_pair(o.pair);
    r.input("pair", o.pair);
  } else {
    Context c(o, r);
    if (o.cls.empty()) throw io::SchemaError("--class", "a line bundle or --pair is required");
    p = io::datum_pair(c.d(), c.d().line_bundle(o.cls).xi0);
  }
  r.result("pair") = jordan_json(p);
  r.check("weight filtration", weight_filtration_valid(p, weight_filtration(p)));
  if (!o.pair2.empty()) {
    GradedNilpotentPair q = io::load_pair(o.pair2);
    r.input("pair2", o.pair2);
    r.result("pair2") = jordan_json(q);
    WitnessResult w = graded_iso_witness(p, q);
    r.result("witness_diagnostic") = w.diagnostic;
    if (w.phi) {
      r.result("witness") = mjson(*w.phi);
      Real res = max_abs(*w.phi * p.omega - q.omega * *w.phi);
      r.check("phi omega1 = omega2 phi", res < o.tolerance, res);
    } else {
      r.check("witness exists", false);
    }
  }
}

void cmd_qprod(Context& c) {
  QuantumDModule m = c.qdm();
  const auto& H = c.d().H;
  ojson out = ojson::array();
  auto add = [&](std::size_t i, std::size_t j) {
    out.push_back({{"a", H[i].name}, {"b", H[j].name}, {"product", series_json(quantum_product(m, i, j), c.tol)}});
  };
  if (!c.o.cls.empty()) {
    std::size_t i = c.h_class(c.o.cls, "--class");
    if (!c.o.cls2.empty())
      add(i, c.h_class(c.o.cls2, "--class2"));
    else
      for (std::size_t j = 0; j < H.size(); ++j) add(i, j);
  } else {
    for (std::size_t i = 0; i < H.size(); ++i)
      for (std::size_t j = i; j < H.size(); ++j) add(i, j);
  }
  c.r.result("basis") = io::basis_json(H);
  c.r.result("products") = out;
}

void cmd_wdvv(Context& c) {
  QuantumDModule m = c.qdm();
  for (const auto& x : wdvv_check(m, c.tol)) c.r.check(x);
}

void cmd_flatness(Context& c) {
  QuantumDModule m = c.qdm();
  c.r.result("checked_through_order") = c.o.order - 1;
  for (const auto& x : connection_flatness(m, c.tol)) c.r.check(x);
  c.r.check(euler_axiom_check(m, c.tol));
}

void cmd_lfun(Context& c) {
  QuantumDModule m = c.qdm();
  FundamentalSolution f = fundamental_solution(m, c.tol);
  c.r.result("L") = series_json(f.L, c.tol);
  if (!c.d().compact) c.r.result("Ltilde") = series_json(f.Ltilde, c.tol);
  c.r.check(unitarity_check(m, f, c.tol));
}

void cmd_jfun(Context& c) {
  QuantumDModule m = c.qdm();
  FundamentalSolution f = fundamental_solution(m, c.tol);
  c.r.result("basis") = io::basis_json(c.d().H);
  c.r.result("J(tau,-z)") = series_json(j_function(m, f), c.tol);
  c.r.check(unitarity_check(m, f, c.tol));
}

void cmd_flatcoord(Context& c) {
  QuantumDModule m = c.qdm();
  FundamentalSolution f = fundamental_solution(m, c.tol);
  FlatCoordinates fc = opposite_project(m, f, c.tol);
  c.r.result("flat_coordinates") = series_json(fc.psi, c.tol);
  c.r.check("big cell", fc.big_cell_residual < c.tol, fc.big_cell_residual);
  ResidueReport rr = residue_product(m, c.tol);
  c.r.result("miniversal_rank") = rr.miniversal_rank;
  c.r.check(rr.unit_map);
  c.r.check(rr.u_is_ae);
  c.r.check(rr.euler);
}

// --closed pt | curve:<genus>:<d1,...> | surface:<chi>:<divisor> | structure
Cy3Sheaf parse_closed(const std::string& s, const OrbifoldDatum& d) {
  std::vector<std::string> f;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ':')) f.push_back(item);
  Cy3Sheaf k;
  auto fail = [&]() -> Cy3Sheaf { throw io::SchemaError("--closed", "cannot parse '" + s + "'"); };
  if (f.empty()) return fail();
  try {
    if (f[0] == "pt" && f.size() == 1) {
      k.kind = Cy3Sheaf::pt;
    } else if (f[0] == "curve" && f.size() == 3) {
      k.kind = Cy3Sheaf::curve;
      k.genus = std::stol(f[1]);
      std::stringstream ds(f[2]);
      while (std::getline(ds, item, ',')) k.curve_class.push_back(Scalar(Rational(std::stol(item))));
      if (k.curve_class.size() != d.nef.size()) return fail();
    } else if (f[0] == "surface" && f.size() == 3) {
      k.kind = Cy3Sheaf::surface;
      k.chi_surface = Scalar(Rational(std::stol(f[1])));
      k.divisor = d.unit_vector(d.h_index(f[2]));
    } else if (f[0] == "structure" && f.size() == 1) {
      k.kind = Cy3Sheaf::structure;
    } else {
      return fail();
    }
  } catch (const std::invalid_argument&) {
    return fail();
  } catch (const DataError&) {
    return fail();
  }
  return k;
}

void cmd_charge(Context& c) {
  QuantumDModule m = c.qdm();
  FundamentalSolution f = fundamental_solution(m, c.tol);
  FramedSection psi = c.section();
  ChargeFunction z = central_charge(psi, m, f);
  c.r.result("charge") = charge_json(z, c.tol);
  std::optional<ChargeFunction> closed;
  const auto& d = c.d();
  if (d.group && c.o.cls.empty() && d.n == 2 && d.group->special_linear) {
    closed = charge_c2(m, c.character());
  } else if (d.group && c.o.cls.empty() && d.n == 3 && d.group->special_linear) {
    closed = charge_c3(m, c.character(), c.potentials());
  } else if (!c.o.closed.empty()) {
    closed = cy3_sheaf_charge(parse_closed(c.o.closed, d), m, c.potentials());
  }
  if (closed) {
    c.r.result("closed_form") = charge_json(*closed, c.tol);
    Real dist = distance(z, *closed);
    c.r.check("closed form = pipeline", dist < c.tol, dist);
  }
}

void cmd_period(Context& c) {
  QuantumDModule m = c.qdm();
  FundamentalSolution f = fundamental_solution(m, c.tol);
  FramedSection psi = c.section(c.ld.sheaves.count("O_pt") ? "O_pt" : "O");
  c.r.result("period") = series_json(integral_period(psi, m, f, c.tol), c.tol);
  const auto& d = c.d();
  if (d.compact && !d.line_bundles.empty() && c.ld.sheaves.count("O_pt")) {
    A0Result a = a0_vector(d, galois_character(d, d.line_bundles[0].name), io::parse_kclass(c.ld, "O_pt"));
    c.r.result("a0") = {{"psi", vjson(a.psi.psi)},
                        {"image", mjson(a.image)},
                        {"nilpotency", a.nilpotency},
                        {"sign", "undetermined: +-Psi(O_pt)"}};
    c.r.check("Psi(O_pt) in Im (M-1)^n", a.in_image);
  } else if (d.group) {
    c.r.result("a0") = {{"convention", "O_0 (x) rho_reg"}};
  }
}

void cmd_predict(Context& c) {
  if (c.o.fm.empty()) throw io::SchemaError("--fm", "an FM assignment file is required");
  io::FMFile fm = io::load_fm(c.o.fm, c.d());
  c.r.input("fm", c.o.fm);
  Potentials p = c.potentials();
  QuantumDModule m = c.qdm();
  auto pred = predict_coordinate_change(m, fm.fm, p);
  ojson out = ojson::array();
  for (const auto& x : pred) {
    ojson terms = ojson::array();
    for (const auto& t : x.terms) terms.push_back({{"term", t.name}, {"coefficient", sjson(t.coeff)}});
    out.push_back({{"label", x.label},
                   {"dim", x.dim},
                   {"q", sjson(x.q)},
                   {"terms", terms},
                   {"tau", series_json(x.tau.series(), c.tol)}});
    c.r.check("q_" + x.label + " = exp(tau_" + x.label + "(0))", x.q_residual < c.tol, x.q_residual);
  }
  c.r.result("curves") = out;
  if (!fm.y.empty()) {
    FundamentalSolution f = fundamental_solution(m, c.tol);
    ojson xr = ojson::array();
    for (const auto& e : crossref_central_charges(m, f, pred, fm.y, c.tol)) {
      xr.push_back({{"label", e.label}, {"sign", e.sign}});
      c.r.check("Z^Y(" + e.label + ") = +-Z^X", e.sign != 0, e.residual);
    }
    c.r.result("crossref") = xr;
  }
}

void cmd_validate_u(Context& c) {
  if (c.o.target.empty()) throw io::SchemaError("--target", "a target datum file is required");
  if (c.o.transform.empty()) throw io::SchemaError("--transform", "a transform file is required");
  io::LoadedDatum t = io::load_datum(c.o.target);
  c.r.input("target", c.o.target);
  io::TransformFile u = io::load_transform(c.o.transform, c.d(), t.datum);
  c.r.input("transform", c.o.transform);
  TransformReport rep = validate_transform(u.u, c.d(), t.datum, u.pairs, c.tol);
  ojson notes = ojson::object();
  for (const auto& x : rep.checks) {
    notes[x.name] = x.note;
    if (x.applicable) c.r.check(x.name, x.pass, x.residual);
  }
  c.r.result("notes") = notes;
}

// ---- schemas ----

ojson schema(const std::string& name) {
  auto obj = [](ojson props, ojson req) {
    return ojson{{"$schema", "https://json-schema.org/draft/2020-12/schema"},
                 {"type", "object"},
                 {"properties", props},
                 {"required", req}};
  };
  const ojson scalar = {{"description", "int | \"p/q\" | \"decimal\" | [re, im] | {\"zeta\": m, \"coeffs\": {k: \"p/q\"}}"}};
  if (name == "datum")
    return {{"oneOf",
             ojson::array({obj({{"kind", {{"const", "quotient"}}},
                                {"name", {{"type", "string"}}},
                                {"group", {{"description", "{\"cyclic\": m} or {\"order\", \"classes\", \"characters\"}"}}},
                                {"weights", {{"type", "array"}}}},
                               {"kind", "group"}),
                           obj({{"kind", {{"const", "compact"}}},
                                {"dimension", {{"type", "integer"}}},
                                {"sectors", {{"type", "array"}, {"description", "[{label, age, centralizer, classes: [{name, degree}], tangent: [{f, rank, ch}]}]"}}},
                                {"pairing", {{"description", "matrix or [{a, b, value}]"}}},
                                {"cup", {{"description", "[{a, b, value}] sector-wise"}}},
                                {"inv", {{"type", "object"}}},
                                {"c1", scalar},
                                {"nef_basis", {{"type", "array"}}},
                                {"line_bundles", {{"description", "[{name, xi0, f: {sector: phase}}]"}}},
                                {"sheaves", {{"description", "{name: K-class expression | {pieces} | {compact_support, tch_c}}"}}}},
                               {"kind", "dimension", "sectors", "pairing"})})}};
  if (name == "table")
    return obj({{"nef_basis", {{"type", "integer"}}},
                {"divisor_reduced", {{"type", "boolean"}}},
                {"complete_through", {{"type", "integer"}}},
                {"entries", {{"type", "array"}, {"description", "[{insertions: [class], d: [int], value: scalar}]"}}}},
               {"nef_basis", "entries"});
  if (name == "potentials")
    return obj({{"variables", {{"type", "array"}}},
                {"F0", {{"description", "[[coefficient, exponent | [exponents]]]"}}},
                {"F0_q", {{"description", "[[N_d, d | [d]]]"}}},
                {"sectors", {{"description", "{\"(g)\": {\"coeffs\": [[coefficient, exponent]]}}"}}},
                {"complete_through", {{"type", "integer"}}}},
               ojson::array());
  if (name == "fm")
    return obj({{"curves", {{"description", "[{label, character: {irrep: multiplicity}, dim}]"}}},
                {"y_charges", {{"description", "[{label, constant, slope, x_character}]"}}}},
               {"curves"});
  if (name == "transform")
    return obj({{"matrix", {{"description", "rows of {\"<z-power>\": scalar}"}}},
                {"pullback_pairs", {{"description", "[{source: vector, target: vector}]"}}}},
               {"matrix"});
  if (name == "pair")
    return obj({{"degrees", {{"type", "array"}}}, {"omega", {{"type", "array"}}}}, {"degrees", "omega"});
  if (name == "report")
    return obj({{"command", {{"type", "string"}}},
                {"inputs", {{"type", "object"}}},
                {"results", {{"type", "object"}}},
                {"checks", {{"description", "[{name, pass, residual}]"}}},
                {"timing", {{"type", "number"}}},
                {"error", {{"description", "{kind, message, path}"}}}},
               {"command", "inputs", "results", "checks"});
  throw io::SchemaError("--schema", "unknown schema '" + name + "'");
}

void emit(const Options& o, const ojson& doc) {
  std::string text = o.text ? render_text(doc) : doc.dump(2) + "\n";
  if (o.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(o.out);
    if (!f) throw io::SchemaError("--out", "cannot write '" + o.out + "'");
    f << text;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Orbifold quantum cohomology, Gamma-integral structures and central charges"};
  app.require_subcommand(0, 1);
  Options o;
  bool version = false;
  std::string schema_name;
  app.add_flag("--version", version, "Print the version");
  app.add_option("--schema", schema_name, "Dump a JSON schema: datum, table, potentials, fm, transform, pair, report");
  app.add_option("--precision", o.precision, "Working precision in decimal digits")->capture_default_str();
  app.add_option("--order", o.order, "Truncation order in the tau-variables")->capture_default_str();
  app.add_option("--tolerance", o.tolerance, "Residual tolerance for checks")->capture_default_str();
  app.add_option("--out", o.out, "Write the report to a file");
  app.add_flag("--table", o.text, "Render an aligned text table instead of JSON");
  app.add_flag("--timing", o.timing, "Add wall-clock timing to the report");

  using Handler = std::function<void(Context&)>;
  std::vector<std::pair<CLI::App*, Handler>> subs;
  auto sub = [&](const std::string& name, const std::string& help, Handler h) {
    CLI::App* s = app.add_subcommand(name, help);
    s->fallthrough();
    subs.push_back({s, std::move(h)});
    return s;
  };
  auto spec = [&](CLI::App* s) { s->add_option("--spec", o.spec, "Orbifold datum JSON")->required(); };
  auto klass = [&](CLI::App* s) { s->add_option("--class", o.cls, "K-class expression"); };
  auto rep = [&](CLI::App* s) { s->add_option("--rep", o.rep, "Representation for O_0 (x) rho, e.g. 2*rho_1+rho_2 or reg"); };
  auto corr = [&](CLI::App* s) {
    s->add_option("--correlators", o.table, "Correlator table JSON");
    s->add_option("--pots", o.pots, "Potentials JSON");
    s->add_option("--locus", o.locus, "small, standard or big")->capture_default_str();
  };

  for (auto* s : {sub("inertia", "Sectors, ages and bases", cmd_inertia), sub("pairing", "Orbifold and Sol pairings", cmd_pairing),
                  sub("monodromy", "z-monodromy on Sol", cmd_monodromy), sub("hl-check", "Coarse (gen-)HL tests", cmd_hl_check)})
    spec(s);
  for (auto* s : {sub("gamma", "Gamma class", cmd_gamma), sub("chern", "Orbifold Chern character", cmd_chern),
                  sub("todd", "Todd class", cmd_todd)}) {
    spec(s);
    klass(s);
  }
  {
    auto* s = sub("chi", "Kawasaki-Riemann-Roch Euler characteristic", cmd_chi);
    spec(s);
    klass(s);
    rep(s);
  }
  {
    auto* s = sub("psi", "Gamma-integral framing Psi", cmd_psi);
    spec(s);
    klass(s);
    rep(s);
    auto* m = sub("mukai-check", "Mukai pairing identity", cmd_mukai);
    spec(m);
    klass(m);
    m->add_option("--class2", o.cls2, "Second K-class");
    auto* g = sub("galois", "Galois action of a line bundle", cmd_galois);
    spec(g);
    g->add_option("--class", o.cls, "Line bundle name");
    g->add_option("--power", o.power, "Tensor power")->capture_default_str();
    g->add_option("--class2", o.cls2, "K-class for the tensor check");
  }
  CLI::App* jordan = app.add_subcommand("jordan", "Jordan type of a graded nilpotent pair");
  jordan->fallthrough();
  jordan->add_option("--pair", o.pair, "Pair JSON");
  jordan->add_option("--pair2", o.pair2, "Second pair JSON for the intertwiner");
  jordan->add_option("--spec", o.spec, "Orbifold datum JSON");
  jordan->add_option("--class", o.cls, "Line bundle whose xi0 gives omega");
  {
    auto* q = sub("qprod", "Quantum product", cmd_qprod);
    spec(q);
    corr(q);
    q->add_option("--class", o.cls, "First class");
    q->add_option("--class2", o.cls2, "Second class");
  }
  for (auto* s : {sub("wdvv", "WDVV, unit and Frobenius residuals", cmd_wdvv),
                  sub("flatness", "Flatness of the quantum connection", cmd_flatness),
                  sub("lfun", "Fundamental solution L", cmd_lfun), sub("jfun", "J-function", cmd_jfun),
                  sub("flatcoord", "Flat coordinates and residue product", cmd_flatcoord)}) {
    spec(s);
    corr(s);
  }
  auto* charge = sub("charge", "Central charge", cmd_charge);
  for (auto* s : {charge, sub("period", "Integral period", cmd_period)}) {
    spec(s);
    corr(s);
    klass(s);
    rep(s);
  }
  charge->add_option("--closed", o.closed, "CY3 closed form: pt | curve:g:d | surface:chi:D | structure");
  {
    auto* p = sub("predict", "Crepant-resolution coordinate change", cmd_predict);
    spec(p);
    corr(p);
    p->add_option("--fm", o.fm, "FM assignment JSON");
    auto* v = sub("validate-u", "Check an external symplectic transformation", cmd_validate_u);
    spec(v);
    v->add_option("--target", o.target, "Target datum JSON")->required();
    v->add_option("--transform", o.transform, "Transform JSON")->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (version) {
    std::cout << "orbi " << kVersion << "\n";
    return 0;
  }
  std::string command = "schema";
  for (auto* s : app.get_subcommands()) command = s->get_name();
  Report r(command);
  auto start = std::chrono::steady_clock::now();
  int rc = 0;
  try {
    set_precision(o.precision);
    if (!schema_name.empty()) {
      emit(o, schema(schema_name));
      return 0;
    }
    if (app.get_subcommands().empty()) {
      std::cout << app.help();
      return 0;
    }
    if (command == "jordan") {
      cmd_jordan(o, r);
    } else {
      for (auto& [s, h] : subs)
        if (s->parsed()) {
          Context c(o, r);
          h(c);
        }
    }
    rc = r.pass() ? 0 : 1;
  } catch (const io::SchemaError& e) {
    r.doc["error"] = {{"kind", "schema"}, {"path", e.path}, {"message", e.what()}};
    rc = 2;
  } catch (const DataError& e) {
    r.doc["error"] = {{"kind", "data"}, {"message", e.what()}};
    rc = 2;
  } catch (const ShapeError& e) {
    r.doc["error"] = {{"kind", "shape"}, {"message", e.what()}};
    rc = 2;
  } catch (const IntegralityError& e) {
    r.doc["error"] = {{"kind", "integrality"}, {"message", e.what()}};
    rc = 1;
  } catch (const DomainError& e) {
    r.doc["error"] = {{"kind", "domain"}, {"message", e.what()}};
    rc = 1;
  }
  if (o.timing)
    r.doc["timing"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    emit(o, r.doc);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  if (rc == 2 && r.doc.contains("error")) std::cerr << r.doc["error"]["message"].get<std::string>() << "\n";
  return rc;
}
