#pragma once

#include <json.hpp>
#include <string>

#include "nilcc/reachability.hpp"

namespace nilcc {

using Json = nlohmann::json;

/// Rationals travel as "p/q" strings; plain integers and decimal strings are
/// accepted on input.
Json to_json(const Rational& q);
Rational rational_from_json(const Json& j);
Json to_json(const QVec& v);
QVec qvec_from_json(const Json& j);
DVec dvec_from_json(const Json& j);

/// {"mode": "free" | "quotient" | "explicit", "l", "d", ...}. Quotient mode
/// lists relations as [[coeff, basis_index], ...] in the free algebra's
/// Hall basis; explicit mode gives "layers" and "constants" {"i,j": [[coeff, k], ...]}.
NilpotentAlgebra algebra_from_json(const Json& j);
/// Always written in explicit mode.
Json algebra_to_json(const NilpotentAlgebra& a);

Cone cone_from_json(const Json& j);
Json cone_to_json(const Cone& c);

struct GroupSpec {
  NilpotentAlgebra algebra;
  QMatrix derivation;
};

/// {"algebra": {...}, "derivation": [[...], ...], "layer1": [indices]}.
GroupSpec group_from_json(const Json& j);

template <class S>
Json word_to_json(const ControlWord<S>& w);
QWord qword_from_json(const Json& j);

Json estimate_to_json(const DistanceEstimate& e);
Json factorization_to_json(const Factorization& f);
Json contact_to_json(const ContactEstimate& c);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace nilcc
