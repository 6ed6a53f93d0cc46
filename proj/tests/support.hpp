#pragma once

#include <orbi/io/tables.hpp>

#include <doctest.h>

#include <string>

inline orbi::Real tol() { return orbi::eps_pow10(-10); }

inline bool near(const orbi::Scalar& a, const orbi::Scalar& b, const orbi::Real& t = tol()) { return (a - b).abs() < t; }
inline bool near_real(const orbi::Real& a, const orbi::Real& b, const orbi::Real& t = tol()) {
  return orbi::mp::abs(a - b) < t;
}

inline std::string fixture(const std::string& name) { return std::string(ORBI_FIXTURES) + "/" + name; }
inline orbi::io::LoadedDatum load(const std::string& name) { return orbi::io::load_datum(fixture(name)); }
