#include "nilcc/json_io.hpp"

#include <fstream>
#include <sstream>

namespace nilcc {

Json to_json(const Rational& q) { return to_string(q); }

Rational rational_from_json(const Json& j) {
  try {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<long>());
    if (j.is_number()) return exact_rational(j.get<double>());
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error("parse", std::string("bad rational: ") + e.what());
  }
  throw Error("parse", "expected a rational, got " + j.dump());
}

Json to_json(const QVec& v) {
  Json out = Json::array();
  for (const auto& q : v) out.push_back(to_json(q));
  return out;
}

QVec qvec_from_json(const Json& j) {
  if (!j.is_array()) throw Error("parse", "expected an array of rationals");
  QVec v;
  for (const auto& x : j) v.push_back(rational_from_json(x));
  return v;
}

DVec dvec_from_json(const Json& j) {
  if (!j.is_array()) throw Error("parse", "expected an array of numbers");
  DVec v;
  for (const auto& x : j) v.push_back(x.is_string() ? rational_from_json(x).get_d() : x.get<double>());
  return v;
}

namespace {

int int_field(const Json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer()) throw Error("parse", std::string("missing integer field ") + key);
  return j[key].get<int>();
}

SparseVec sparse_from_json(const Json& j, std::size_t dim) {
  if (!j.is_array()) throw Error("parse", "expected [[coeff, index], ...]");
  SparseVec out;
  for (const auto& t : j) {
    if (!t.is_array() || t.size() != 2 || !t[1].is_number_integer())
      throw Error("parse", "expected [coeff, index] pair, got " + t.dump());
    const long idx = t[1].get<long>();
    if (idx < 0 || static_cast<std::size_t>(idx) >= dim) throw Error("parse", "basis index out of range");
    out.push_back({static_cast<std::size_t>(idx), rational_from_json(t[0])});
  }
  return out;
}

}  // namespace

NilpotentAlgebra algebra_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("mode")) throw Error("parse", "algebra document needs a \"mode\"");
  const std::string mode = j["mode"].get<std::string>();
  if (mode == "free" || mode == "quotient") {
    const int l = int_field(j, "l");
    const int d = int_field(j, "d");
    NilpotentAlgebra free = build_free_nilpotent(l, d);
    if (mode == "free") return free;
    std::vector<QVec> relations;
    for (const auto& r : j.value("relations", Json::array())) {
      QVec v = zeros<Rational>(free.dim());
      for (const auto& t : sparse_from_json(r, free.dim())) v[t.index] += t.coeff;
      relations.push_back(std::move(v));
    }
    return quotient(free, relations).algebra;
  }
  if (mode == "explicit") {
    if (!j.contains("layers")) throw Error("parse", "explicit algebra needs \"layers\"");
    const auto layers = j["layers"].get<std::vector<int>>();
    std::vector<NilpotentAlgebra::Entry> entries;
    const Json constants = j.value("constants", Json::object());
    for (const auto& [key, value] : constants.items()) {
      std::size_t i = 0, k = 0;
      char comma = 0;
      std::istringstream in(key);
      if (!(in >> i >> comma >> k) || comma != ',') throw Error("parse", "constant key must be \"i,j\": " + key);
      if (i >= layers.size() || k >= layers.size()) throw Error("parse", "constant key out of range: " + key);
      entries.push_back({i, k, sparse_from_json(value, layers.size())});
    }
    std::vector<std::string> labels;
    if (j.contains("labels")) labels = j["labels"].get<std::vector<std::string>>();
    return NilpotentAlgebra(layers, entries, labels);
  }
  throw Error("parse", "unknown algebra mode " + mode);
}

Json algebra_to_json(const NilpotentAlgebra& a) {
  Json constants = Json::object();
  for (const auto& e : a.entries()) {
    Json terms = Json::array();
    for (const auto& t : e.value) terms.push_back(Json::array({to_json(t.coeff), t.index}));
    constants[std::to_string(e.i) + "," + std::to_string(e.j)] = terms;
  }
  return {{"mode", "explicit"},
          {"l", a.generator_count()},
          {"d", a.step()},
          {"layers", a.layers()},
          {"labels", a.labels()},
          {"constants", constants}};
}

Cone cone_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind")) throw Error("parse", "cone document needs a \"kind\"");
  const std::string kind = j["kind"].get<std::string>();
  auto vectors = [&](const char* key) {
    std::vector<DVec> out;
    for (const auto& v : j.value(key, Json::array())) out.push_back(dvec_from_json(v));
    return out;
  };
  if (kind == "polyhedral") {
    const auto dim = static_cast<std::size_t>(int_field(j, "dim"));
    auto gens = vectors("generators");
    auto half = vectors("halfspaces");
    if (gens.empty()) return Cone::halfspaces(dim, half);
    return Cone::polyhedral(dim, gens, half);
  }
  if (kind == "lorentz") return Cone::lorentz(dvec_from_json(j.at("axis")), j.at("slope").get<double>());
  if (kind == "power") {
    PowerProfile p;
    p.tau_index = j.at("tau_index").get<std::size_t>();
    p.s_index = j.at("s_index").get<std::size_t>();
    p.y_indices = j.at("y_indices").get<std::vector<std::size_t>>();
    p.exponent = j.at("exponent").get<double>();
    p.coefficient = j.value("coefficient", 1.0);
    p.shear = j.value("shear", 0.0);
    return Cone::power(static_cast<std::size_t>(int_field(j, "dim")), p);
  }
  throw Error("parse", "unknown cone kind " + kind);
}

Json cone_to_json(const Cone& c) {
  Json out = {{"kind", to_string(c.kind())}, {"dim", c.dim()}};
  switch (c.kind()) {
    case ConeKind::polyhedral:
      out["generators"] = c.generators();
      out["halfspaces"] = c.halfspace_normals();
      break;
    case ConeKind::lorentz:
      out["axis"] = c.axis();
      out["slope"] = c.slope();
      break;
    case ConeKind::power: {
      const auto& p = c.profile();
      out["tau_index"] = p.tau_index;
      out["s_index"] = p.s_index;
      out["y_indices"] = p.y_indices;
      out["exponent"] = p.exponent;
      out["coefficient"] = p.coefficient;
      out["shear"] = p.shear;
      break;
    }
  }
  return out;
}

GroupSpec group_from_json(const Json& j) {
  if (!j.contains("algebra") || !j.contains("derivation")) throw Error("parse", "group needs algebra and derivation");
  GroupSpec g{algebra_from_json(j["algebra"]), {}};
  for (const auto& row : j["derivation"]) g.derivation.push_back(qvec_from_json(row));
  if (g.derivation.size() != g.algebra.dim()) throw Error("parse", "derivation must be a square matrix");
  for (const auto& row : g.derivation)
    if (row.size() != g.algebra.dim()) throw Error("parse", "derivation must be a square matrix");
  if (j.contains("layer1")) {
    auto declared = j["layer1"].get<std::vector<std::size_t>>();
    if (declared != g.algebra.layer_indices(1))
      throw Error("invalid_algebra", "declared layer-1 indices differ from the algebra's first layer");
  }
  return g;
}

template <class S>
Json word_to_json(const ControlWord<S>& w) {
  Json steps = Json::array();
  for (const auto& s : w.steps) {
    if constexpr (ScalarTraits<S>::exact)
      steps.push_back({{"direction", to_json(s.direction)}, {"duration", to_json(s.duration)}});
    else
      steps.push_back({{"direction", s.direction}, {"duration", s.duration}});
  }
  return {{"constraint", w.constraint}, {"length", word_length(w)}, {"steps", steps}};
}
template Json word_to_json(const ControlWord<Rational>&);
template Json word_to_json(const ControlWord<double>&);

QWord qword_from_json(const Json& j) {
  QWord w;
  w.constraint = j.value("constraint", std::string("horizontal"));
  for (const auto& s : j.at("steps")) w.steps.push_back({qvec_from_json(s.at("direction")), rational_from_json(s.at("duration"))});
  return w;
}

Json estimate_to_json(const DistanceEstimate& e) {
  Json out = {{"target", e.target},       {"upper", e.upper},     {"lower", e.lower},
              {"reached", e.reached},     {"residual", e.residual}, {"evaluations", e.evaluations},
              {"methods", e.methods},     {"witness", word_to_json(e.witness)}};
  if (e.exact_witness) out["exact_witness"] = word_to_json(*e.exact_witness);
  return out;
}

Json factorization_to_json(const Factorization& f) {
  Json factors = Json::array();
  for (const auto& v : f.factors) factors.push_back(to_json(v));
  Json certs = Json::array();
  for (const auto& w : f.certificates) certs.push_back(word_to_json(w));
  return {{"center", to_json(f.center)},
          {"factors", factors},
          {"certificates", certs},
          {"max_certificate_length", f.max_certificate_length},
          {"closed", f.closed}};
}

Json contact_to_json(const ContactEstimate& c) {
  Json samples = Json::array();
  for (const auto& [r, d] : c.samples) samples.push_back({r, d});
  return {{"exponent", c.exponent},       {"constant", c.constant},     {"residual", c.residual},
          {"exponent_stderr", c.exponent_stderr}, {"radius_min", c.radius_min}, {"radius_max", c.radius_max},
          {"measurable", c.measurable},   {"samples", samples}};
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("parse", "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error("parse", path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error("parse", "cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace nilcc
