#pragma once

#include <orbi/gamma/frame.hpp>
#include <orbi/orbifold/datum.hpp>

#include <nlohmann/json.hpp>

#include <cctype>
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace orbi::io {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// Input violating a documented schema; path is a JSON pointer into the document.
struct SchemaError : DataError {
  std::string path;
  SchemaError(std::string p, const std::string& msg) : DataError(p + ": " + msg), path(std::move(p)) {}
};

inline json load_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw SchemaError(file, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(file, std::string("invalid JSON: ") + e.what());
  }
}

// ---- scalars ----

inline Real parse_real(const std::string& s, const std::string& path) {
  try {
    if (s.empty()) throw std::runtime_error("empty");
    return Real(s);
  } catch (const std::exception&) {
    throw SchemaError(path, "not a decimal number: '" + s + "'");
  }
}

// Rational "p/q" or integer; decimal strings are refused here.
inline Rational parse_rational_json(const json& j, const std::string& path) {
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (j.is_string()) {
    try {
      return parse_rational(j.get<std::string>());
    } catch (const DataError&) {
      throw SchemaError(path, "expected a rational \"p/q\", got '" + j.get<std::string>() + "'");
    }
  }
  throw SchemaError(path, "expected a rational \"p/q\" or an integer");
}

inline Real real_component(const json& j, const std::string& path) {
  if (j.is_number_integer()) return Real(j.get<long long>());
  if (j.is_number()) return Real(j.dump());
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s.find('/') != std::string::npos) return to_real(parse_rational_json(j, path));
    return parse_real(s, path);
  }
  throw SchemaError(path, "expected a number or a numeric string");
}

// int | "p/q" | "1.25" | [re, im] | {"zeta": m, "coeffs": {"k": "p/q"}}
inline Scalar parse_scalar(const json& j, const std::string& path) {
  if (j.is_number_integer()) return Scalar(Rational(j.get<long long>()));
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    bool rational_syntax = !s.empty();
    for (std::size_t i = 0; i < s.size(); ++i)
      if (!(std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '/' || (i == 0 && s[i] == '-')))
        rational_syntax = false;
    if (rational_syntax) return Scalar(parse_rational_json(j, path));
    return Scalar(parse_real(s, path));
  }
  if (j.is_number()) return Scalar(Real(j.dump()));
  if (j.is_array()) {
    if (j.size() != 2) throw SchemaError(path, "complex numbers are [re, im]");
    return Scalar(Complex(real_component(j[0], path + "/0"), real_component(j[1], path + "/1")));
  }
  if (j.is_object() && j.contains("zeta")) {
    if (!j["zeta"].is_number_integer() || j["zeta"].get<long>() <= 0)
      throw SchemaError(path + "/zeta", "expected a positive integer");
    long m = j["zeta"].get<long>();
    if (!j.contains("coeffs") || !j["coeffs"].is_object()) throw SchemaError(path + "/coeffs", "expected an object");
    Cyclotomic c;
    for (const auto& [k, v] : j["coeffs"].items()) {
      long e = 0;
      try {
        e = std::stol(k);
      } catch (const std::exception&) {
        throw SchemaError(path + "/coeffs/" + k, "exponent keys must be integers");
      }
      c += Cyclotomic::root(e, m) * Cyclotomic(parse_rational_json(v, path + "/coeffs/" + k));
    }
    return Scalar(c);
  }
  throw SchemaError(path, "expected a scalar");
}

inline const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  if (!j.contains(key)) throw SchemaError(path + "/" + key, "missing required field");
  return j.at(key);
}

inline std::string require_string(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_string()) throw SchemaError(path + "/" + key, "expected a string");
  return v.get<std::string>();
}

// ---- data ----

namespace detail {

// Vector over a basis given as an array or as {"name": scalar}.
inline Vector parse_vector(const json& j, const std::vector<BasisClass>& basis, const std::string& path,
                           const std::vector<std::size_t>* restrict_to = nullptr) {
  Vector v(basis.size());
  if (j.is_array()) {
    std::size_t len = restrict_to ? restrict_to->size() : basis.size();
    if (j.size() != len) throw SchemaError(path, "expected " + std::to_string(len) + " entries");
    for (std::size_t i = 0; i < len; ++i)
      v[restrict_to ? (*restrict_to)[i] : i] = parse_scalar(j[i], path + "/" + std::to_string(i));
    return v;
  }
  if (j.is_object()) {
    for (const auto& [name, val] : j.items()) {
      std::size_t idx = basis.size();
      for (std::size_t i = 0; i < basis.size(); ++i)
        if (basis[i].name == name) idx = i;
      if (idx == basis.size()) throw SchemaError(path + "/" + name, "unknown class");
      if (restrict_to && std::find(restrict_to->begin(), restrict_to->end(), idx) == restrict_to->end())
        throw SchemaError(path + "/" + name, "class belongs to another sector");
      v[idx] = parse_scalar(val, path + "/" + name);
    }
    return v;
  }
  throw SchemaError(path, "expected an array or an object of class coefficients");
}

inline std::size_t class_at(const std::vector<BasisClass>& basis, const json& j, const std::string& path) {
  if (j.is_number_integer()) {
    long k = j.get<long>();
    if (k < 0 || static_cast<std::size_t>(k) >= basis.size()) throw SchemaError(path, "class index out of range");
    return static_cast<std::size_t>(k);
  }
  if (j.is_string()) {
    for (std::size_t i = 0; i < basis.size(); ++i)
      if (basis[i].name == j.get<std::string>()) return i;
    throw SchemaError(path, "unknown class '" + j.get<std::string>() + "'");
  }
  throw SchemaError(path, "expected a class name or index");
}

inline GroupActionSpec parse_group(const json& g, const json& weights, const std::string& path) {
  if (g.contains("cyclic")) {
    if (!g["cyclic"].is_number_integer() || g["cyclic"].get<long>() <= 0)
      throw SchemaError(path + "/group/cyclic", "expected a positive integer");
    if (!weights.is_array()) throw SchemaError(path + "/weights", "expected an array of integers");
    std::vector<long> w;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!weights[i].is_number_integer()) throw SchemaError(path + "/weights/" + std::to_string(i), "expected an integer");
      w.push_back(weights[i].get<long>());
    }
    if (w.empty()) throw SchemaError(path + "/weights", "needs at least one weight");
    return cyclic_action(g["cyclic"].get<long>(), w);
  }
  GroupActionSpec s;
  const std::string gp = path + "/group";
  const json& order = require(g, "order", gp);
  if (!order.is_number_integer()) throw SchemaError(gp + "/order", "expected an integer");
  s.order = order.get<long>();
  s.special_linear = g.value("special_linear", true);
  const json& classes = require(g, "classes", gp);
  if (!classes.is_array() || classes.empty()) throw SchemaError(gp + "/classes", "expected a non-empty array");
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const std::string cp = gp + "/classes/" + std::to_string(i);
    const json& c = classes[i];
    ConjugacyClass cc;
    cc.label = require_string(c, "label", cp);
    cc.size = c.value("size", 1L);
    cc.centralizer = c.value("centralizer", s.order / std::max(1L, cc.size));
    const json& ph = require(c, "phases", cp);
    if (!ph.is_array()) throw SchemaError(cp + "/phases", "expected an array");
    for (std::size_t k = 0; k < ph.size(); ++k) cc.phases.push_back(parse_rational_json(ph[k], cp + "/phases/" + std::to_string(k)));
    if (c.contains("inverse")) cc.inverse = c["inverse"].get<std::string>();
    s.classes.push_back(cc);
  }
  s.n = static_cast<int>(s.classes[0].phases.size());
  if (g.contains("characters")) {
    const json& chars = g["characters"];
    for (std::size_t i = 0; i < chars.size(); ++i) {
      const std::string cp = gp + "/characters/" + std::to_string(i);
      Character ch;
      ch.name = require_string(chars[i], "name", cp);
      const json& vals = require(chars[i], "values", cp);
      if (!vals.is_array() || vals.size() != s.classes.size())
        throw SchemaError(cp + "/values", "expected one value per conjugacy class");
      for (std::size_t k = 0; k < vals.size(); ++k) ch.values.push_back(parse_scalar(vals[k], cp + "/values/" + std::to_string(k)));
      s.characters.push_back(ch);
    }
  }
  try {
    s.validate();
  } catch (const DataError& e) {
    throw SchemaError(gp, e.what());
  }
  return s;
}

}  // namespace detail

struct LoadedDatum {
  OrbifoldDatum datum;
  std::map<std::string, json> sheaves;
};

inline LoadedDatum parse_compact(const json& j) {
  LoadedDatum out;
  OrbifoldDatum& d = out.datum;
  d.compact = true;
  d.name = j.value("name", std::string("compact"));
  const json& dim = require(j, "dimension", "");
  if (!dim.is_number_integer() || dim.get<int>() < 0) throw SchemaError("/dimension", "expected a non-negative integer");
  d.n = dim.get<int>();
  const json& secs = require(j, "sectors", "");
  if (!secs.is_array() || secs.empty()) throw SchemaError("/sectors", "expected a non-empty array");
  for (std::size_t v = 0; v < secs.size(); ++v) {
    const std::string sp = "/sectors/" + std::to_string(v);
    Sector s;
    s.label = require_string(secs[v], "label", sp);
    s.age = secs[v].contains("age") ? parse_rational_json(secs[v]["age"], sp + "/age") : Rational(0);
    s.centralizer = secs[v].value("centralizer", 1L);
    const json& cls = require(secs[v], "classes", sp);
    if (!cls.is_array() || cls.empty()) throw SchemaError(sp + "/classes", "expected a non-empty array");
    for (std::size_t i = 0; i < cls.size(); ++i) {
      const std::string cp = sp + "/classes/" + std::to_string(i);
      BasisClass b;
      b.name = require_string(cls[i], "name", cp);
      b.sector = v;
      b.internal = parse_rational_json(require(cls[i], "degree", cp), cp + "/degree");
      b.degree = b.internal + 2 * s.age;
      for (const auto& o : d.H)
        if (o.name == b.name) throw SchemaError(cp + "/name", "duplicate class name '" + b.name + "'");
      s.classes.push_back(d.H.size());
      s.compact.push_back(d.H.size());
      d.H.push_back(b);
    }
    d.sectors.push_back(s);
  }
  d.Hc = d.H;
  d.compact_alias.resize(d.H.size());
  for (std::size_t i = 0; i < d.H.size(); ++i) d.compact_alias[i] = i;
  // inv: {label: label}; missing entries are self-inverse
  std::map<std::string, std::string> inv;
  if (j.contains("inv")) {
    if (!j["inv"].is_object()) throw SchemaError("/inv", "expected an object label -> label");
    for (const auto& [a, b] : j["inv"].items()) {
      if (!b.is_string()) throw SchemaError("/inv/" + a, "expected a sector label");
      inv[a] = b.get<std::string>();
    }
  }
  for (std::size_t v = 0; v < d.sectors.size(); ++v) {
    auto& s = d.sectors[v];
    auto it = inv.find(s.label);
    s.inv = v;
    if (it != inv.end()) {
      bool found = false;
      for (std::size_t w = 0; w < d.sectors.size(); ++w)
        if (d.sectors[w].label == it->second) {
          s.inv = w;
          found = true;
        }
      if (!found) throw SchemaError("/inv/" + s.label, "unknown sector '" + it->second + "'");
    }
  }
  for (auto& s : d.sectors) s.dim = static_cast<int>(mp::numerator(Rational(d.n) - s.age - d.sectors[s.inv].age).convert_to<long>());
  for (std::size_t v = 0; v < d.sectors.size(); ++v) {
    const std::string sp = "/sectors/" + std::to_string(v);
    auto& s = d.sectors[v];
    for (std::size_t i : s.classes)
      if (d.H[i].internal > 2 * s.dim)
        throw SchemaError(sp + "/classes", "class '" + d.H[i].name + "' exceeds the sector dimension");
    if (!secs[v].contains("tangent")) {
      if (v == 0) throw SchemaError(sp + "/tangent", "tangent data is required on the untwisted sector");
      continue;
    }
    const json& tan = secs[v]["tangent"];
    if (!tan.is_array()) throw SchemaError(sp + "/tangent", "expected an array");
    for (std::size_t k = 0; k < tan.size(); ++k) {
      const std::string tp = sp + "/tangent/" + std::to_string(k);
      EigenPiece p;
      p.f = tan[k].contains("f") ? parse_rational_json(tan[k]["f"], tp + "/f") : Rational(0);
      if (p.f < 0 || p.f >= 1) throw SchemaError(tp + "/f", "phase must lie in [0,1)");
      p.ch = tan[k].contains("ch") ? detail::parse_vector(tan[k]["ch"], d.H, tp + "/ch", &s.classes) : Vector(d.H.size());
      if (tan[k].contains("rank")) p.ch[s.classes[0]] = parse_scalar(tan[k]["rank"], tp + "/rank");
      s.tangent.push_back(p);
    }
  }
  d.inv_h.resize(d.H.size());
  for (std::size_t i = 0; i < d.H.size(); ++i) {
    // inv^* matches classes by position inside paired sectors
    const auto& s = d.sectors[d.H[i].sector];
    std::size_t pos = std::find(s.classes.begin(), s.classes.end(), i) - s.classes.begin();
    const auto& w = d.sectors[s.inv];
    if (w.classes.size() != s.classes.size())
      throw SchemaError("/inv/" + s.label, "inv-paired sectors must have the same class count");
    d.inv_h[i] = w.classes[pos];
  }
  d.inv_hc = d.inv_h;

  const json& pair = require(j, "pairing", "");
  d.pairing = Mat(d.H.size(), d.H.size());
  if (pair.is_array() && !pair.empty() && pair[0].is_array()) {
    if (pair.size() != d.H.size()) throw SchemaError("/pairing", "expected a square matrix over the basis");
    for (std::size_t r = 0; r < pair.size(); ++r) {
      if (!pair[r].is_array() || pair[r].size() != d.H.size())
        throw SchemaError("/pairing/" + std::to_string(r), "row has the wrong length");
      for (std::size_t c = 0; c < d.H.size(); ++c)
        d.pairing(r, c) = parse_scalar(pair[r][c], "/pairing/" + std::to_string(r) + "/" + std::to_string(c));
    }
  } else if (pair.is_array()) {
    for (std::size_t k = 0; k < pair.size(); ++k) {
      const std::string pp = "/pairing/" + std::to_string(k);
      std::size_t a = detail::class_at(d.H, require(pair[k], "a", pp), pp + "/a");
      std::size_t b = detail::class_at(d.H, require(pair[k], "b", pp), pp + "/b");
      Scalar x = parse_scalar(require(pair[k], "value", pp), pp + "/value");
      d.pairing(a, b) = x;
      d.pairing(b, a) = x;
    }
  } else {
    throw SchemaError("/pairing", "expected a matrix or a list of {a, b, value}");
  }

  d.c1 = j.contains("c1") ? detail::parse_vector(j["c1"], d.H, "/c1") : Vector(d.H.size());
  if (j.contains("cup")) {
    const json& cup = j["cup"];
    if (!cup.is_array()) throw SchemaError("/cup", "expected an array of {a, b, value}");
    for (std::size_t k = 0; k < cup.size(); ++k) {
      const std::string cp = "/cup/" + std::to_string(k);
      std::size_t a = detail::class_at(d.H, require(cup[k], "a", cp), cp + "/a");
      std::size_t b = detail::class_at(d.H, require(cup[k], "b", cp), cp + "/b");
      if (d.H[a].sector != d.H[b].sector) throw SchemaError(cp, "cup products are sector-wise");
      Vector val = detail::parse_vector(require(cup[k], "value", cp), d.H, cp + "/value");
      d.cup_table[{std::min(a, b), std::max(a, b)}] = val;
      d.cup_c_table[{a, b}] = val;
      d.cup_c_table[{b, a}] = val;
    }
  }
  if (j.contains("restrict")) {
    for (const auto& [name, val] : j["restrict"].items()) {
      std::size_t a = detail::class_at(d.H, json(name), "/restrict/" + name);
      if (d.H[a].sector != 0) throw SchemaError("/restrict/" + name, "only untwisted classes restrict");
      d.restriction[a] = detail::parse_vector(val, d.H, "/restrict/" + name);
    }
  }
  if (j.contains("nef_basis")) {
    const json& nb = j["nef_basis"];
    if (!nb.is_array()) throw SchemaError("/nef_basis", "expected an array of class names");
    for (std::size_t k = 0; k < nb.size(); ++k) d.nef.push_back(detail::class_at(d.H, nb[k], "/nef_basis/" + std::to_string(k)));
  }
  if (j.contains("line_bundles")) {
    const json& lbs = j["line_bundles"];
    if (!lbs.is_array()) throw SchemaError("/line_bundles", "expected an array");
    for (std::size_t k = 0; k < lbs.size(); ++k) {
      const std::string lp = "/line_bundles/" + std::to_string(k);
      LineBundle l;
      l.name = require_string(lbs[k], "name", lp);
      l.xi0 = lbs[k].contains("xi0") ? detail::parse_vector(lbs[k]["xi0"], d.H, lp + "/xi0") : Vector(d.H.size());
      for (std::size_t i = 0; i < d.H.size(); ++i)
        if (!l.xi0[i].near_zero(Real(0)) && (d.H[i].sector != 0 || d.H[i].internal != 2))
          throw SchemaError(lp + "/xi0", "xi0 must be an untwisted degree-2 class");
      l.f.assign(d.sectors.size(), Rational(0));
      if (lbs[k].contains("f")) {
        for (const auto& [lab, val] : lbs[k]["f"].items()) {
          std::size_t v = d.sectors.size();
          for (std::size_t w = 0; w < d.sectors.size(); ++w)
            if (d.sectors[w].label == lab) v = w;
          if (v == d.sectors.size()) throw SchemaError(lp + "/f/" + lab, "unknown sector");
          Rational f = parse_rational_json(val, lp + "/f/" + lab);
          if (f < 0 || f >= 1) throw SchemaError(lp + "/f/" + lab, "phase must lie in [0,1)");
          l.f[v] = f;
        }
      }
      d.line_bundles.push_back(l);
    }
  }
  if (j.contains("sheaves")) {
    if (!j["sheaves"].is_object()) throw SchemaError("/sheaves", "expected an object name -> definition");
    for (const auto& [name, def] : j["sheaves"].items()) out.sheaves[name] = def;
  }
  try {
    d.validate();
  } catch (const SchemaError&) {
    throw;
  } catch (const DataError& e) {
    throw SchemaError("", e.what());
  }
  return out;
}

inline LoadedDatum parse_datum(const json& j) {
  if (!j.is_object()) throw SchemaError("", "expected a JSON object");
  std::string kind = require_string(j, "kind", "");
  if (kind == "compact") return parse_compact(j);
  if (kind == "quotient") {
    LoadedDatum out;
    const json& g = require(j, "group", "");
    json weights = j.contains("weights") ? j["weights"] : json();
    GroupActionSpec spec = detail::parse_group(g, weights, "");
    try {
      out.datum = inertia_of_quotient(spec);
    } catch (const SchemaError&) {
      throw;
    } catch (const DataError& e) {
      throw SchemaError("/group", e.what());
    }
    if (j.contains("name")) out.datum.name = j["name"].get<std::string>();
    return out;
  }
  throw SchemaError("/kind", "expected \"compact\" or \"quotient\"");
}

inline LoadedDatum load_datum(const std::string& file) { return parse_datum(load_file(file)); }

// ---- K-classes ----
//
// expr   := term (('+' | '-') term)*
// term   := [int '*'] atom
// atom   := 'O' | 'O(' int ')' | 'T' | name ['^' int] | 'O0(' charexpr ')' | '(' expr ')'
// name is a line bundle or a sheaf declared in the datum.

class KClassParser {
 public:
  KClassParser(const LoadedDatum& ld) : ld_(ld) {}

  KClass parse(const std::string& text) {
    s_ = text;
    p_ = 0;
    KClass k = expr();
    skip();
    if (p_ != s_.size()) fail("unexpected '" + s_.substr(p_) + "'");
    return k;
  }

 private:
  const LoadedDatum& ld_;
  std::string s_;
  std::size_t p_ = 0;
  int depth_ = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw SchemaError("--class", msg + " in '" + s_ + "' at position " + std::to_string(p_));
  }
  void skip() {
    while (p_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[p_]))) ++p_;
  }
  bool eat(char c) {
    skip();
    if (p_ < s_.size() && s_[p_] == c) {
      ++p_;
      return true;
    }
    return false;
  }
  bool peek_digit() {
    skip();
    return p_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[p_])));
  }
  long integer() {
    skip();
    std::size_t st = p_;
    if (p_ < s_.size() && (s_[p_] == '-' || s_[p_] == '+')) ++p_;
    while (p_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p_]))) ++p_;
    if (st == p_ || (p_ == st + 1 && !std::isdigit(static_cast<unsigned char>(s_[st])))) fail("expected an integer");
    return std::stol(s_.substr(st, p_ - st));
  }
  std::string ident() {
    skip();
    std::size_t st = p_;
    while (p_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[p_])) || s_[p_] == '_' || s_[p_] == '.')) ++p_;
    if (st == p_) fail("expected a name");
    return s_.substr(st, p_ - st);
  }

  KClass expr() {
    KClass k = term();
    for (;;) {
      if (eat('+'))
        k = k + term();
      else if (eat('-'))
        k = k - term();
      else
        return k;
    }
  }
  KClass term() {
    long c = 1;
    if (peek_digit()) {
      c = integer();
      if (!eat('*')) fail("expected '*' after a coefficient");
    }
    return c == 1 ? atom() : c * atom();
  }

  KClass atom() {
    const OrbifoldDatum& d = ld_.datum;
    if (eat('(')) {
      KClass k = expr();
      if (!eat(')')) fail("expected ')'");
      return k;
    }
    std::string name = ident();
    if (name == "O0") {
      if (!eat('(')) fail("expected '(' after O0");
      std::map<std::string, long> mult;
      long sign = 1;
      for (;;) {
        long c = 1;
        if (peek_digit()) {
          c = integer();
          if (!eat('*')) fail("expected '*'");
        }
        mult[ident()] += sign * c;
        if (eat('+'))
          sign = 1;
        else if (eat('-'))
          sign = -1;
        else
          break;
      }
      if (!eat(')')) fail("expected ')'");
      if (!d.group) fail("O0(...) needs a quotient datum");
      try {
        return skyscraper_class(d, d.group->virtual_character(mult));
      } catch (const DataError& e) {
        fail(e.what());
      }
    }
    if (name == "O" && eat('(')) {
      long k = integer();
      if (!eat(')')) fail("expected ')'");
      if (d.line_bundles.empty()) fail("datum has no line bundles");
      return line_bundle_class(d, d.line_bundles[0], k);
    }
    if (name == "O") return trivial_bundle(d);
    if (name == "T") return tangent_bundle(d);
    long power = 1;
    bool has_power = false;
    skip();
    if (p_ < s_.size() && s_[p_] == '^') {
      ++p_;
      power = integer();
      has_power = true;
    }
    for (const auto& l : d.line_bundles)
      if (l.name == name) return line_bundle_class(d, l, power);
    auto it = ld_.sheaves.find(name);
    if (it != ld_.sheaves.end()) {
      if (has_power) fail("powers apply to line bundles only");
      return sheaf(name, it->second);
    }
    fail("unknown bundle or sheaf '" + name + "'");
  }

  KClass sheaf(const std::string& name, const json& def) {
    const OrbifoldDatum& d = ld_.datum;
    const std::string path = "/sheaves/" + name;
    if (def.is_string()) {
      if (++depth_ > 16) throw SchemaError(path, "sheaf definitions are cyclic");
      KClassParser sub(ld_);
      sub.depth_ = depth_;
      KClass k = sub.parse(def.get<std::string>());
      --depth_;
      return k;
    }
    // {"compact_support": bool, "pieces": [{"sector", "f", "ch"}], "tch_c": vector}
    bool cs = def.value("compact_support", false);
    KClass k = zero_class(d, cs);
    if (def.contains("tch_c")) {
      if (!cs) throw SchemaError(path + "/tch_c", "tch_c needs compact_support");
      k.tch_c = detail::parse_vector(def["tch_c"], d.Hc, path + "/tch_c");
      return k;
    }
    const json& pieces = require(def, "pieces", path);
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      const std::string pp = path + "/pieces/" + std::to_string(i);
      std::size_t v = d.sector_index(pieces[i].value("sector", d.sectors[0].label));
      EigenPiece p;
      p.f = pieces[i].contains("f") ? parse_rational_json(pieces[i]["f"], pp + "/f") : Rational(0);
      p.ch = detail::parse_vector(require(pieces[i], "ch", pp), d.H, pp + "/ch", &d.sectors[v].classes);
      k.pieces[v].push_back(p);
    }
    return k;
  }
};

inline KClass parse_kclass(const LoadedDatum& ld, const std::string& text) { return KClassParser(ld).parse(text); }

// ---- output ----

inline ojson scalar_json(const Scalar& s, unsigned digits = 0) {
  if (s.exact_rational()) return format_rational(s.exact_value().rational());
  if (digits == 0) digits = precision_digits();
  return ojson::array({format_real(s.re(), digits), format_real(s.im(), digits)});
}
inline ojson vector_json(const Vector& v, unsigned digits = 0) {
  ojson a = ojson::array();
  for (const auto& x : v) a.push_back(scalar_json(x, digits));
  return a;
}
inline ojson matrix_json(const Mat& m, unsigned digits = 0) {
  ojson a = ojson::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    ojson row = ojson::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(scalar_json(m(i, j), digits));
    a.push_back(row);
  }
  return a;
}
inline ojson basis_json(const std::vector<BasisClass>& b) {
  ojson a = ojson::array();
  for (const auto& c : b) a.push_back(c.name);
  return a;
}

}  // namespace orbi::io
