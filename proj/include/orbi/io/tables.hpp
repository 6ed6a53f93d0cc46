#pragma once

#include <orbi/crepant/predict.hpp>
#include <orbi/galois/galois.hpp>
#include <orbi/io/json.hpp>
#include <orbi/lefschetz/hl.hpp>
#include <orbi/qdm/qdm.hpp>

#include <string>
#include <vector>

namespace orbi::io {

namespace detail {

inline long require_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
  return j.get<long>();
}

inline std::vector<long> int_list(const json& j, const std::string& path) {
  if (j.is_number_integer()) return {j.get<long>()};
  if (!j.is_array()) throw SchemaError(path, "expected an integer or an array of integers");
  std::vector<long> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(require_int(j[i], path + "/" + std::to_string(i)));
  return v;
}

template <class F>
void for_each_item(const json& j, const std::string& path, F f) {
  if (!j.is_array()) throw SchemaError(path, "expected an array");
  for (std::size_t i = 0; i < j.size(); ++i) f(j[i], path + "/" + std::to_string(i));
}

inline std::vector<PolyTerm> parse_terms(const json& j, std::size_t nvars, const std::string& path) {
  std::vector<PolyTerm> out;
  for_each_item(j, path, [&](const json& t, const std::string& p) {
    if (!t.is_array() || t.size() != 2) throw SchemaError(p, "expected [coefficient, exponent(s)]");
    auto e = int_list(t[1], p + "/1");
    if (e.size() != nvars) throw SchemaError(p + "/1", "expected " + std::to_string(nvars) + " exponents");
    PolyTerm term{parse_scalar(t[0], p + "/0"), {}};
    for (long x : e) {
      if (x < 0) throw SchemaError(p + "/1", "exponents must be non-negative");
      term.exps.push_back(static_cast<int>(x));
    }
    out.push_back(term);
  });
  return out;
}

}  // namespace detail

// {"nef_basis": r, "divisor_reduced": bool, "complete_through": k,
//  "entries": [{"insertions": [i | name, ...], "d": [...], "value": scalar}]}
inline CorrelatorTable parse_table(const json& j, const OrbifoldDatum& d) {
  CorrelatorTable t;
  t.nef_rank = static_cast<std::size_t>(detail::require_int(require(j, "nef_basis", ""), "/nef_basis"));
  if (t.nef_rank != d.nef.size())
    throw SchemaError("/nef_basis", "datum has " + std::to_string(d.nef.size()) + " nef classes");
  if (j.contains("divisor_reduced")) {
    if (!j["divisor_reduced"].is_boolean()) throw SchemaError("/divisor_reduced", "expected a boolean");
    t.divisor_reduced = j["divisor_reduced"].get<bool>();
  }
  if (j.contains("complete_through")) t.complete_through = detail::require_int(j["complete_through"], "/complete_through");
  detail::for_each_item(require(j, "entries", ""), "/entries", [&](const json& e, const std::string& p) {
    std::vector<std::size_t> ins;
    detail::for_each_item(require(e, "insertions", p), p + "/insertions", [&](const json& x, const std::string& q) {
      ins.push_back(detail::class_at(d.H, x, q));
    });
    std::vector<long> dd(t.nef_rank, 0);
    if (e.contains("d")) {
      dd = detail::int_list(e["d"], p + "/d");
      if (dd.size() != t.nef_rank) throw SchemaError(p + "/d", "expected " + std::to_string(t.nef_rank) + " entries");
      for (long x : dd)
        if (x < 0) throw SchemaError(p + "/d", "degrees must be non-negative");
    }
    t.set(ins, dd, parse_scalar(require(e, "value", p), p + "/value"));
  });
  return t;
}
inline CorrelatorTable load_table(const std::string& file, const OrbifoldDatum& d) {
  return parse_table(load_file(file), d);
}

// {"variables": [class, ...], "F0": [[c, e], ...], "F0_q": [[N, d], ...],
//  "sectors": {"<label of (g)>": {"coeffs": [[c, e], ...]}}, "complete_through": k}
inline Potentials parse_potentials(const json& j, const OrbifoldDatum& d) {
  if (!j.is_object()) throw SchemaError("", "expected a JSON object");
  Potentials p;
  if (j.contains("variables")) {
    detail::for_each_item(j["variables"], "/variables", [&](const json& x, const std::string& q) {
      p.variables.push_back(d.H[detail::class_at(d.H, x, q)].name);
    });
  } else {
    for (std::size_t v = 1; v < d.sectors.size(); ++v)
      if (d.sectors[v].age == 1) p.variables.push_back(d.H[d.sector_unit(v)].name);
  }
  if (j.contains("F0")) p.F0 = detail::parse_terms(j["F0"], p.variables.size(), "/F0");
  if (j.contains("F0_q"))
    detail::for_each_item(j["F0_q"], "/F0_q", [&](const json& t, const std::string& q) {
      if (!t.is_array() || t.size() != 2) throw SchemaError(q, "expected [N_d, d]");
      auto dd = detail::int_list(t[1], q + "/1");
      if (dd.size() != d.nef.size()) throw SchemaError(q + "/1", "degree has wrong length");
      p.F0_q.push_back({parse_scalar(t[0], q + "/0"), dd});
    });
  if (j.contains("sectors")) {
    if (!j["sectors"].is_object()) throw SchemaError("/sectors", "expected an object");
    for (const auto& [label, s] : j["sectors"].items()) {
      std::string q = "/sectors/" + label;
      std::string key = label;
      if (key.size() > 2 && key.front() == '(' && key.back() == ')') key = key.substr(1, key.size() - 2);
      try {
        d.sector_index(key);
      } catch (const DataError&) {
        throw SchemaError(q, "unknown sector");
      }
      p.sectors[key] = detail::parse_terms(require(s, "coeffs", q), p.variables.size(), q + "/coeffs");
    }
  }
  if (j.contains("complete_through")) p.complete_through = detail::require_int(j["complete_through"], "/complete_through");
  return p;
}
inline Potentials load_potentials(const std::string& file, const OrbifoldDatum& d) {
  return parse_potentials(load_file(file), d);
}

// {"curves": [{"label", "character": {"rho_1": 2}, "dim": 3}],
//  "y_charges": [{"label", "constant", "slope", "x_character": {...}}]}
struct FMFile {
  FMAssignment fm;
  std::vector<YCharge> y;
};

inline std::map<std::string, long> parse_character(const json& j, const GroupActionSpec& g, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected an object of multiplicities");
  std::map<std::string, long> m;
  for (const auto& [name, k] : j.items()) {
    try {
      g.character(name);
    } catch (const DataError&) {
      throw SchemaError(path + "/" + name, "unknown irreducible");
    }
    m[name] = detail::require_int(k, path + "/" + name);
  }
  return m;
}

inline FMFile parse_fm(const json& j, const OrbifoldDatum& d) {
  if (!d.group) throw SchemaError("", "FM assignments need a group-action datum");
  FMFile f;
  detail::for_each_item(require(j, "curves", ""), "/curves", [&](const json& c, const std::string& p) {
    FMCurve cv;
    cv.label = require_string(c, "label", p);
    cv.character = parse_character(require(c, "character", p), *d.group, p + "/character");
    cv.dim = detail::require_int(require(c, "dim", p), p + "/dim");
    f.fm.curves.push_back(cv);
  });
  if (j.contains("y_charges"))
    detail::for_each_item(j["y_charges"], "/y_charges", [&](const json& c, const std::string& p) {
      YCharge y;
      y.label = require_string(c, "label", p);
      y.constant = parse_scalar(require(c, "constant", p), p + "/constant");
      y.slope = parse_scalar(require(c, "slope", p), p + "/slope");
      y.x_character = parse_character(require(c, "x_character", p), *d.group, p + "/x_character");
      f.y.push_back(y);
    });
  return f;
}
inline FMFile load_fm(const std::string& file, const OrbifoldDatum& d) { return parse_fm(load_file(file), d); }

// {"matrix": [[{"<k>": scalar, ...}, ...], ...], "pullback_pairs": [{"source": v1, "target": v2}]}
struct TransformFile {
  ExternalTransform u;
  std::vector<PullbackPair> pairs;
};

inline TransformFile parse_transform(const json& j, const OrbifoldDatum& d1, const OrbifoldDatum& d2) {
  TransformFile t;
  const json& m = require(j, "matrix", "");
  if (!m.is_array() || m.empty()) throw SchemaError("/matrix", "expected a non-empty array of rows");
  t.u.rows = m.size();
  t.u.cols = m[0].is_array() ? m[0].size() : 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::string p = "/matrix/" + std::to_string(i);
    if (!m[i].is_array() || m[i].size() != t.u.cols) throw SchemaError(p, "rows must have equal length");
    for (std::size_t k = 0; k < t.u.cols; ++k) {
      const json& e = m[i][k];
      std::string q = p + "/" + std::to_string(k);
      if (!e.is_object()) throw SchemaError(q, "expected {\"<z-power>\": scalar}");
      for (const auto& [pw, c] : e.items()) {
        long z = 0;
        try {
          std::size_t used = 0;
          z = std::stol(pw, &used);
          if (used != pw.size()) throw std::invalid_argument(pw);
        } catch (const std::exception&) {
          throw SchemaError(q + "/" + pw, "z-power keys must be integers");
        }
        auto it = t.u.terms.find(z);
        if (it == t.u.terms.end()) it = t.u.terms.emplace(z, Mat(t.u.rows, t.u.cols)).first;
        it->second(i, k) = parse_scalar(c, q + "/" + pw);
      }
    }
  }
  if (j.contains("pullback_pairs"))
    detail::for_each_item(j["pullback_pairs"], "/pullback_pairs", [&](const json& pr, const std::string& p) {
      t.pairs.push_back({detail::parse_vector(require(pr, "source", p), d1.H, p + "/source"),
                         detail::parse_vector(require(pr, "target", p), d2.H, p + "/target")});
    });
  return t;
}
inline TransformFile load_transform(const std::string& file, const OrbifoldDatum& d1, const OrbifoldDatum& d2) {
  return parse_transform(load_file(file), d1, d2);
}

// {"degrees": [p, ...], "omega": [[...], ...]}
inline GradedNilpotentPair parse_pair(const json& j) {
  GradedNilpotentPair p;
  detail::for_each_item(require(j, "degrees", ""), "/degrees", [&](const json& x, const std::string& q) {
    p.degrees.push_back(parse_rational_json(x, q));
  });
  const json& m = require(j, "omega", "");
  if (!m.is_array() || m.size() != p.dim()) throw SchemaError("/omega", "expected dim V rows");
  p.omega = Mat(p.dim(), p.dim());
  for (std::size_t i = 0; i < p.dim(); ++i) {
    std::string q = "/omega/" + std::to_string(i);
    if (!m[i].is_array() || m[i].size() != p.dim()) throw SchemaError(q, "expected dim V entries");
    for (std::size_t k = 0; k < p.dim(); ++k) p.omega(i, k) = parse_scalar(m[i][k], q + "/" + std::to_string(k));
  }
  try {
    p.validate();
  } catch (const ShapeError& e) {
    throw SchemaError("/omega", e.what());
  }
  return p;
}
inline GradedNilpotentPair load_pair(const std::string& file) { return parse_pair(load_file(file)); }

// (H, xi_0 cup) for a line bundle of the datum.
inline GradedNilpotentPair datum_pair(const OrbifoldDatum& d, const Vector& omega) {
  GradedNilpotentPair p;
  for (const auto& b : d.H) p.degrees.push_back(b.degree);
  p.omega = d.cup_matrix(omega);
  return p;
}

}  // namespace orbi::io
