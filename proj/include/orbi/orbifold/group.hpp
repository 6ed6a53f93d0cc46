#pragma once

#include <orbi/algebra/linalg.hpp>

#include <algorithm>
#include <map>
#include <string>
#include <vector>

namespace orbi {

struct ConjugacyClass {
  std::string label;
  long size = 1;
  long centralizer = 1;
  std::vector<Rational> phases;  // eigenphases in [0,1) of the action on C^n
  std::optional<std::string> inverse;
};

struct Character {
  std::string name;
  std::vector<Scalar> values;  // Tr(g|rho) per conjugacy class
};

// Finite group acting linearly on C^n, described by class data and a character table.
struct GroupActionSpec {
  long order = 1;
  int n = 0;
  bool special_linear = true;
  std::vector<ConjugacyClass> classes;
  std::vector<Character> characters;

  std::size_t class_index(const std::string& label) const {
    for (std::size_t i = 0; i < classes.size(); ++i)
      if (classes[i].label == label) return i;
    throw DataError("unknown conjugacy class '" + label + "'");
  }
  const Character& character(const std::string& name) const {
    for (const auto& c : characters)
      if (c.name == name) return c;
    throw DataError("unknown representation '" + name + "'");
  }

  // Regular representation character: |G| at the identity, 0 elsewhere.
  std::vector<Scalar> regular() const {
    std::vector<Scalar> v(classes.size());
    v[0] = Scalar(order);
    return v;
  }

  // Character of the defining representation Q = C^n.
  std::vector<Scalar> standard() const {
    std::vector<Scalar> v(classes.size());
    for (std::size_t i = 0; i < classes.size(); ++i)
      for (const auto& f : classes[i].phases) v[i] += root_of_unity_exact(f);
    return v;
  }

  // Virtual character sum_k m_k rho_k; the name "reg" denotes the regular representation.
  std::vector<Scalar> virtual_character(const std::map<std::string, long>& mult) const {
    std::vector<Scalar> v(classes.size());
    for (const auto& [name, m] : mult) {
      std::vector<Scalar> c = (name == "reg") ? regular() : character(name).values;
      for (std::size_t i = 0; i < v.size(); ++i) v[i] += Scalar(m) * c[i];
    }
    return v;
  }

  // Class-weighted inner product (1/|G|) sum_g a(g) conj(b(g)).
  Scalar inner(const std::vector<Scalar>& a, const std::vector<Scalar>& b) const {
    Scalar s;
    for (std::size_t i = 0; i < classes.size(); ++i) s += Scalar(classes[i].size) * a[i] * b[i].conj();
    return s / Scalar(order);
  }

  std::size_t inverse_class(std::size_t i) const {
    const auto& c = classes[i];
    if (c.inverse) return class_index(*c.inverse);
    std::vector<Rational> neg;
    for (const auto& f : c.phases) neg.push_back(frac(-f));
    // eigenbasis-ordered match first, then as multisets
    std::vector<std::size_t> hits;
    for (std::size_t j = 0; j < classes.size(); ++j)
      if (classes[j].phases == neg) hits.push_back(j);
    if (hits.size() == 1) return hits[0];
    hits.clear();
    std::sort(neg.begin(), neg.end());
    for (std::size_t j = 0; j < classes.size(); ++j) {
      std::vector<Rational> p = classes[j].phases;
      std::sort(p.begin(), p.end());
      if (p == neg) hits.push_back(j);
    }
    if (hits.size() == 1) return hits[0];
    if (hits.empty()) throw DataError("class '" + c.label + "': no class with negated eigenphases");
    throw DataError("class '" + c.label + "': inverse is ambiguous; give it explicitly");
  }

  void validate() const {
    if (order <= 0) throw DataError("group order must be positive");
    if (classes.empty()) throw DataError("group has no conjugacy classes");
    long total = 0;
    for (const auto& c : classes) {
      total += c.size;
      if (c.size * c.centralizer != order)
        throw DataError("class '" + c.label + "': size * centralizer != |G|");
      if (static_cast<int>(c.phases.size()) != n)
        throw DataError("class '" + c.label + "': expected " + std::to_string(n) + " eigenphases");
      Rational s = 0;
      for (const auto& f : c.phases) {
        if (f < 0 || f >= 1) throw DataError("class '" + c.label + "': eigenphase outside [0,1)");
        s += f;
      }
      if (special_linear && denominator(s) != 1)
        throw DataError("class '" + c.label + "': eigenphases do not sum to an integer");
    }
    if (total != order) throw DataError("class sizes do not sum to |G|");
    for (const auto& f : classes[0].phases)
      if (f != 0) throw DataError("first conjugacy class must be the identity");
    for (std::size_t i = 0; i < classes.size(); ++i) (void)inverse_class(i);
    const Real tol = eps_pow10(-10);
    for (std::size_t a = 0; a < characters.size(); ++a) {
      if (characters[a].values.size() != classes.size())
        throw DataError("character '" + characters[a].name + "' has wrong length");
      for (std::size_t b = a; b < characters.size(); ++b) {
        Scalar ip = inner(characters[a].values, characters[b].values);
        Scalar expect = (a == b) ? Scalar(1) : Scalar(0);
        if ((ip - expect).abs() > tol)
          throw DataError("characters '" + characters[a].name + "' and '" + characters[b].name +
                          "' are not orthonormal");
      }
    }
  }
};

// Z/m acting on C^n with weights w: g^k has eigenphases frac(k w_j / m).
inline GroupActionSpec cyclic_action(long m, const std::vector<long>& weights) {
  GroupActionSpec s;
  s.order = m;
  s.n = static_cast<int>(weights.size());
  long wsum = 0;
  for (long w : weights) wsum += w;
  s.special_linear = (wsum % m == 0);
  for (long k = 0; k < m; ++k) {
    ConjugacyClass c;
    c.label = (k == 0) ? "1" : (k == 1 ? "g" : "g" + std::to_string(k));
    c.size = 1;
    c.centralizer = m;
    for (long w : weights) c.phases.push_back(frac(Rational(k * w, m)));
    s.classes.push_back(c);
  }
  for (long j = 0; j < m; ++j) {
    Character ch;
    ch.name = "rho_" + std::to_string(j);
    for (long k = 0; k < m; ++k) ch.values.push_back(Scalar(Cyclotomic::root(j * k, m)));
    s.characters.push_back(ch);
  }
  return s;
}

}  // namespace orbi
