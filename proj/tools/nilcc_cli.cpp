// Command-line front end: every subcommand writes report.json (and, when it
// produces tables or witnesses, table.csv / witnesses.json) under --out.
#include <CLI11.hpp>

#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nilcc/json_io.hpp"

using namespace nilcc;

namespace {

struct Common {
  std::string algebra_file;
  std::string cone_file;
  std::string group_file;
  std::string eps_grid = "0.05:0.5:6";
  long budget = 0;  // 0: subcommand default
  double tol = 0;   // 0: subcommand default
  unsigned seed = 1;
  std::string out = ".";
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep))
    if (!cur.empty()) parts.push_back(cur);
  return parts;
}

QVec parse_qvec(const std::string& s) {
  QVec v;
  for (const auto& p : split(s, ',')) v.push_back(parse_rational(p));
  return v;
}

DVec parse_dvec(const std::string& s) { return to_double(parse_qvec(s)); }

std::vector<DVec> parse_vectors(const std::string& s) {
  std::vector<DVec> out;
  for (const auto& p : split(s, ';')) out.push_back(parse_dvec(p));
  return out;
}

/// "a:b:n" -> n log-spaced values from a to b.
std::vector<double> parse_grid(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts.size() != 3) throw Error("parse", "grid must be a:b:n");
  const double a = std::stod(parts[0]), b = std::stod(parts[1]);
  const int n = std::stoi(parts[2]);
  if (!(a > 0) || !(b > 0) || n < 1) throw Error("parse", "grid needs a, b > 0 and n >= 1");
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(n == 1 ? a : a * std::pow(b / a, static_cast<double>(i) / (n - 1)));
  return g;
}

NilpotentAlgebra load_algebra(const Common& c) {
  if (c.algebra_file.empty()) throw Error("parse", "--algebra is required");
  return algebra_from_json(read_json_file(c.algebra_file));
}

class Output {
 public:
  explicit Output(const Common& c) : dir_(c.out) {
    std::filesystem::create_directories(dir_);
    report_["seed"] = c.seed;
  }
  Json& report() { return report_; }
  void table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(dir_ / "table.csv");
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
      out << '\n';
    }
  }
  void witnesses(const Json& j) { write_json_file((dir_ / "witnesses.json").string(), j); }
  ~Output() {
    if (std::uncaught_exceptions() > 0) return;  // failed runs leave no report
    try {
      write_json_file((dir_ / "report.json").string(), report_);
      std::cout << report_summary() << '\n';
    } catch (...) {
    }
  }

 private:
  std::string report_summary() const {
    Json brief = report_;
    for (const char* bulky : {"algebra", "rows", "points", "samples", "estimate", "curves"}) brief.erase(bulky);
    return brief.dump();
  }
  std::filesystem::path dir_;
  Json report_;
};

template <class T>
std::string num(T x) {
  std::ostringstream s;
  s.precision(10);
  s << x;
  return s.str();
}

ReachOptions reach_options(const Common& c) {
  ReachOptions o;
  if (c.budget > 0) o.max_n = c.budget;
  if (c.tol > 0) o.cc.tolerance = c.tol;
  return o;
}

// ---------------------------------------------------------------------------

void algebra_build(const Common& c, const std::string& mode, int l, int d) {
  Output out(c);
  NilpotentAlgebra a = c.algebra_file.empty() ? algebra_from_json({{"mode", mode}, {"l", l}, {"d", d}}) : load_algebra(c);
  const VerifyReport v = verify_algebra(a);
  out.report()["algebra"] = algebra_to_json(a);
  out.report()["dim"] = a.dim();
  out.report()["verified"] = v.ok;
  out.report()["violations"] = v.violations;
}

void algebra_info(const Common& c) {
  Output out(c);
  const NilpotentAlgebra a = load_algebra(c);
  const VerifyReport v = verify_algebra(a);
  std::vector<std::size_t> dims;
  for (int k = 1; k <= a.step(); ++k) dims.push_back(a.layer_indices(k).size());
  out.report()["dim"] = a.dim();
  out.report()["step"] = a.step();
  out.report()["layer_dims"] = dims;
  out.report()["graded"] = a.is_graded();
  out.report()["labels"] = a.labels();
  out.report()["verified"] = v.ok;
  out.report()["violations"] = v.violations;
}

void group_product(const Common& c, const std::string& x, const std::string& y) {
  Output out(c);
  const NilpotentAlgebra a = load_algebra(c);
  const QVec p = bch_product(a, parse_qvec(x), parse_qvec(y));
  out.report()["product"] = to_json(p);
}

void group_dilate(const Common& c, const std::string& x, const std::string& t) {
  Output out(c);
  const NilpotentAlgebra a = load_algebra(c);
  out.report()["dilated"] = to_json(dilation(a, parse_rational(t), parse_qvec(x)));
}

void group_asym(const Common& c, const std::string& x, const std::string& y, const std::string& t_grid) {
  Output out(c);
  const NilpotentAlgebra a = load_algebra(c);
  const QVec qx = parse_qvec(x), qy = parse_qvec(y);
  out.report()["asymptotic_product"] = to_json(asymptotic_product(a, qx, qy));
  std::vector<Rational> ts;
  std::vector<std::vector<std::string>> rows;
  for (double t : parse_grid(t_grid)) ts.push_back(exact_rational(t));
  const BetaCertificate cert = certify_beta_constant(a, {{qx, qy}}, ts);
  for (const auto& s : cert.samples) rows.push_back({num(s.t), num(s.residual_norm), num(s.ratio)});
  out.report()["beta_constant"] = cert.constant;
  out.report()["beta_finite"] = cert.finite;
  out.table({"t", "residual", "ratio"}, rows);
}

void ccdist(const Common& c, const std::string& x, const std::string& y) {
  Output out(c);
  const NilpotentAlgebra a = load_algebra(c);
  CcOptions o;
  if (c.tol > 0) o.tolerance = c.tol;
  if (c.budget > 0) o.budget = static_cast<std::size_t>(c.budget);
  const CcEstimator est(a, o);
  DistanceEstimate e;
  if (y.empty())
    e = est.upper_exact(parse_qvec(x));
  else
    e = est.distance(parse_dvec(x), parse_dvec(y));
  e.lower = std::min(e.lower, e.upper);
  out.report()["upper"] = e.upper;
  out.report()["lower"] = e.lower;
  out.report()["reached"] = e.reached;
  out.report()["estimate"] = estimate_to_json(e);
  out.witnesses(estimate_to_json(e));
}

Cone load_cone(const Common& c) {
  if (c.cone_file.empty()) throw Error("parse", "--cone is required");
  return cone_from_json(read_json_file(c.cone_file));
}

void cone_dist(const Common& c, const std::string& p) {
  Output out(c);
  const Cone cone = load_cone(c);
  const DVec x = parse_dvec(p);
  const InteriorResult in = cone.interior(x);
  out.report()["cone"] = cone_to_json(cone);
  out.report()["distance"] = cone.distance(x);
  out.report()["contains"] = cone.contains(x);
  out.report()["interior"] = in.inside;
  out.report()["interior_margin"] = in.margin;
}

void cone_contact(const Common& c, const std::string& p, const std::string& subspace) {
  Output out(c);
  const Cone cone = load_cone(c);
  ContactOptions o;
  o.seed = c.seed;
  if (!c.eps_grid.empty() && c.eps_grid != Common{}.eps_grid) o.radii = parse_grid(c.eps_grid);
  const ContactEstimate e = degree_of_contact(cone, parse_vectors(subspace), parse_dvec(p), o);
  out.report()["contact"] = contact_to_json(e);
  out.table({"exponent", "Q", "residual", "radius_min", "radius_max"},
            {{num(e.exponent), num(e.constant), num(e.residual), num(e.radius_min), num(e.radius_max)}});
}

void cone_phi(const Common& c, const std::string& p, const std::string& v, const std::string& subspace) {
  Output out(c);
  const Cone cone = load_cone(c);
  const PhiReport r = phi_margin(cone, parse_dvec(p), parse_dvec(v), parse_vectors(subspace), parse_grid(c.eps_grid),
                                 256, c.seed);
  std::vector<std::vector<std::string>> rows;
  for (const auto& row : r.rows) rows.push_back({num(row.eps), num(row.phi)});
  out.report()["decay_exponent"] = r.decay_exponent;
  out.report()["identically_zero"] = r.identically_zero;
  out.report()["monotone"] = r.monotone;
  out.table({"eps", "phi"}, rows);
}

void reach_lemma1(const Common& c, const std::string& z) {
  Output out(c);
  const NilpotentAlgebra a = load_algebra(c);
  const ReachExperiment ex = lemma1_threshold(a, parse_qvec(z), parse_grid(c.eps_grid), reach_options(c), true);
  std::vector<std::vector<std::string>> rows;
  Json w = Json::array();
  for (const auto& r : ex.rows)
    rows.push_back({num(r.eps), num(r.n_lo), num(r.n_hi), num(r.n_mid), r.witnessed ? "1" : "0", r.closed ? "1" : "0",
                    num(r.max_factor_distance), r.incomplete ? "1" : "0"});
  for (const auto& f : ex.witnesses) w.push_back(factorization_to_json(f));
  out.report()["slope"] = ex.fit.slope;
  out.report()["expected_slope"] = ex.exponent;
  out.report()["radius"] = ex.radius;
  out.report()["empirical_Q"] = ex.empirical_Q;
  out.report()["monotone"] = ex.monotone;
  out.report()["complete"] = ex.complete;
  out.table({"eps", "n_lo", "n_hi", "n_mid", "witnessed", "closed", "max_factor_distance", "incomplete"}, rows);
  out.witnesses(w);
}

void reach_lemma2(const Common& c, const std::string& x, double eps, const std::string& pieces_file) {
  Output out(c);
  const NilpotentAlgebra a = load_algebra(c);
  Factorization f;
  if (!pieces_file.empty()) {
    std::vector<QWord> pieces;
    for (const auto& w : read_json_file(pieces_file)) pieces.push_back(qword_from_json(w));
    f = lemma2_reflection_word(a, parse_qvec(x), pieces);
  } else {
    auto built = corollary2_factorization(a, parse_qvec(x), eps, reach_options(c));
    if (!built) throw Error("too_large", "no witness within the budget");
    f = std::move(*built);
  }
  out.report()["factors"] = f.factors.size();
  out.report()["closed"] = f.closed;
  out.report()["max_certificate_length"] = f.max_certificate_length;
  out.witnesses(factorization_to_json(f));
}

void reach_cor2(const Common& c, const std::string& x) {
  Output out(c);
  const NilpotentAlgebra a = load_algebra(c);
  const Corollary2Experiment ex = corollary2_threshold(a, parse_qvec(x), parse_grid(c.eps_grid), reach_options(c));
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : ex.rows)
    rows.push_back({num(r.eps), num(r.quotient_n), num(r.witnessed_n), num(r.bound), r.within_bound ? "1" : "0",
                    r.closed ? "1" : "0", num(r.max_factor_distance)});
  out.report()["slope"] = ex.fit.slope;
  out.report()["radius"] = ex.radius;
  out.report()["empirical_Q"] = ex.empirical_Q;
  out.table({"eps", "quotient_n", "witnessed_n", "bound", "within_bound", "closed", "max_factor_distance"}, rows);
}

void reach_thm2(const Common& c, const std::string& x, int k) {
  Output out(c);
  const NilpotentAlgebra a = load_algebra(c);
  const Theorem2Experiment ex = theorem2_lifted_threshold(a, parse_qvec(x), k, parse_grid(c.eps_grid), reach_options(c));
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : ex.rows)
    rows.push_back({num(r.eps), num(r.n), r.pushed_closed ? "1" : "0", num(r.max_factor_distance)});
  out.report()["k"] = ex.k;
  out.report()["lifted_dim"] = ex.lifted_dim;
  out.report()["slope"] = ex.fit.slope;
  out.report()["radius"] = ex.radius;
  out.report()["empirical_Q"] = ex.empirical_Q;
  out.table({"eps", "n", "closed", "max_factor_distance"}, rows);
}

void reach_thm3(const Common& c, const std::string& x, int k) {
  Output out(c);
  const NilpotentAlgebra a = load_algebra(c);
  const Theorem3Report rep = theorem3_experiment(a, parse_qvec(x), k, parse_grid(c.eps_grid), reach_options(c));
  std::vector<std::vector<std::string>> rows;
  Json w = Json::array();
  for (const auto& [eps, curve] : rep.curves) {
    rows.push_back({num(eps), num(curve.steps.size()), num(curve.length), num(curve.max_deviation),
                    curve.closed ? "1" : "0", curve.evident_case ? "1" : "0", num(curve.cc_radius_factor)});
    Json steps = Json::array();
    for (const auto& s : curve.steps) steps.push_back(to_json(s));
    w.push_back({{"eps", eps}, {"closed", curve.closed}, {"steps", steps}});
  }
  out.report()["slope"] = rep.fit.slope;
  out.report()["empirical_P"] = rep.empirical_P;
  out.report()["radius"] = rep.radius;
  out.table({"eps", "steps", "length", "max_deviation", "closed", "evident", "cc_radius_factor"}, rows);
  out.witnesses(w);
}

void attain_sample(const Common& c, std::size_t depth, double budget, std::size_t samples) {
  Output out(c);
  std::optional<GroupSpec> spec;
  std::optional<NilpotentAlgebra> alg;
  std::unique_ptr<SemidirectGroup> group;
  if (!c.group_file.empty()) {
    spec = group_from_json(read_json_file(c.group_file));
    group = std::make_unique<SemidirectGroup>(spec->algebra, spec->derivation);
  } else {
    alg = load_algebra(c);
  }
  const NilpotentAlgebra& a = spec ? spec->algebra : *alg;
  const Cone cone = load_cone(c);
  const AttainableCloud cloud = attainable_sample(a, cone, depth, budget, samples, c.seed, group.get());
  std::vector<std::vector<std::string>> rows;
  for (const auto& p : cloud.points) {
    std::vector<std::string> r{num(p.t)};
    for (double v : p.x) r.push_back(num(v));
    rows.push_back(r);
  }
  std::vector<std::string> header{"chi"};
  for (std::size_t i = 0; i < a.dim(); ++i) header.push_back("x" + std::to_string(i + 1));
  out.table(header, rows);
  const CoverageReport cov = grid_coverage(cloud, 1.0, 4);
  out.report()["points"] = cloud.points.size();
  out.report()["min_chi"] = cloud.min_chi;
  out.report()["max_cone_distance"] = cloud.max_cone_distance;
  out.report()["coverage_unit_box"] = cov.fraction;
}

void demo_theorem1(const Common& c, double exponent, double coefficient, std::size_t grid) {
  Output out(c);
  const Theorem1Example ex = theorem1_example(exponent, coefficient);
  const SemidirectGroup g(ex.algebra, ex.derivation);
  Theorem1Options o;
  o.grid = grid;
  o.contact.seed = c.seed;
  if (c.tol > 0) o.tolerance = c.tol;
  const Theorem1Report rep = theorem1_demonstration(g, ex.cone, ex.p, ex.v, o);
  Json hyp = Json::array();
  for (const auto& h : rep.hypotheses)
    hyp.push_back({{"name", h.name}, {"passed", h.passed}, {"margin", h.margin}, {"detail", h.detail}});
  out.report()["cone"] = cone_to_json(ex.cone);
  out.report()["hypotheses"] = hyp;
  out.report()["hypotheses_hold"] = rep.hypotheses_hold;
  out.report()["failed"] = rep.failed;
  out.report()["contact_exponent"] = rep.contact_exponent;
  out.report()["threshold"] = rep.threshold;
  out.report()["reached"] = rep.reached;
  out.report()["targets"] = rep.points.size();
  out.report()["negative_chi"] = rep.negative_chi;
  out.report()["worst_distance"] = rep.worst_distance;
  std::vector<std::vector<std::string>> rows;
  for (const auto& p : rep.points) {
    std::vector<std::string> r{num(p.target_t)};
    for (double v : p.target_x) r.push_back(num(v));
    r.insert(r.end(), {num(p.distance), num(p.drift), num(p.steps), p.reached ? "1" : "0"});
    rows.push_back(r);
  }
  out.table({"t", "x1", "x2", "x3", "distance", "drift", "steps", "reached"}, rows);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nilpotent Lie groups, CC metrics, cones and controllability experiments"};
  app.require_subcommand(1);
  Common c;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--algebra", c.algebra_file, "algebra JSON file");
    sub->add_option("--cone", c.cone_file, "cone JSON file");
    sub->add_option("--group", c.group_file, "group JSON file");
    sub->add_option("--eps-grid", c.eps_grid, "log grid a:b:n");
    sub->add_option("--budget", c.budget, "work budget");
    sub->add_option("--tol", c.tol, "tolerance");
    sub->add_option("--seed", c.seed, "random seed");
    sub->add_option("--out", c.out, "output directory");
  };
  std::function<void()> action;
  std::string x, y, z, t, v, p, subspace, mode = "free", pieces, t_grid = "10:10000:7";
  int l = 2, d = 2, k = 2;
  double eps = 0.25, exponent = 3, coefficient = 1e-5, budget = 4;
  std::size_t depth = 8, samples = 1000, grid = 5;

  auto* algebra = app.add_subcommand("algebra", "build or inspect an algebra");
  algebra->require_subcommand(1);
  auto* build = algebra->add_subcommand("build", "build and verify");
  common(build);
  build->add_option("--mode", mode)->check(CLI::IsMember({"free"}));
  build->add_option("-l,--generators", l);
  build->add_option("-d,--step", d);
  build->callback([&] { action = [&] { algebra_build(c, mode, l, d); }; });
  auto* info = algebra->add_subcommand("info", "layer dimensions and checks");
  common(info);
  info->callback([&] { action = [&] { algebra_info(c); }; });

  auto* group = app.add_subcommand("group", "group law operations");
  group->require_subcommand(1);
  auto* prod = group->add_subcommand("product", "exact BCH product");
  common(prod);
  prod->add_option("--x", x)->required();
  prod->add_option("--y", y)->required();
  prod->callback([&] { action = [&] { group_product(c, x, y); }; });
  auto* dil = group->add_subcommand("dilate", "exact dilation");
  common(dil);
  dil->add_option("--x", x)->required();
  dil->add_option("--t", t)->required();
  dil->callback([&] { action = [&] { group_dilate(c, x, t); }; });
  auto* asym = group->add_subcommand("asym", "asymptotic product and residual constant");
  common(asym);
  asym->add_option("--x", x)->required();
  asym->add_option("--y", y)->required();
  asym->add_option("--t-grid", t_grid);
  asym->callback([&] { action = [&] { group_asym(c, x, y, t_grid); }; });

  auto* cc = app.add_subcommand("ccdist", "CC distance estimate with witness");
  common(cc);
  cc->add_option("--x", x)->required();
  cc->add_option("--y", y, "second point (distance from x to y)");
  cc->callback([&] { action = [&] { ccdist(c, x, y); }; });

  auto* cone = app.add_subcommand("cone", "cone geometry");
  cone->require_subcommand(1);
  auto* cdist = cone->add_subcommand("dist", "distance and interior margin");
  common(cdist);
  cdist->add_option("--p", p)->required();
  cdist->callback([&] { action = [&] { cone_dist(c, p); }; });
  auto* contact = cone->add_subcommand("contact", "degree of contact with a subspace");
  common(contact);
  contact->add_option("--p", p)->required();
  contact->add_option("--subspace", subspace, "vectors separated by ';'")->required();
  contact->callback([&] { action = [&] { cone_contact(c, p, subspace); }; });
  auto* phi = cone->add_subcommand("phi", "membership boost along v");
  common(phi);
  phi->add_option("--p", p)->required();
  phi->add_option("--v", v)->required();
  phi->add_option("--subspace", subspace)->required();
  phi->callback([&] { action = [&] { cone_phi(c, p, v, subspace); }; });

  auto* reach = app.add_subcommand("reach", "quantitative controllability experiments");
  reach->require_subcommand(1);
  auto* l1 = reach->add_subcommand("lemma1", "n_min for a top-layer element");
  common(l1);
  l1->add_option("--z", z)->required();
  l1->callback([&] { action = [&] { reach_lemma1(c, z); }; });
  auto* l2 = reach->add_subcommand("lemma2", "closed reflection word");
  common(l2);
  l2->add_option("--x", x)->required();
  l2->add_option("--eps", eps);
  l2->add_option("--pieces", pieces, "JSON list of horizontal words");
  l2->callback([&] { action = [&] { reach_lemma2(c, x, eps, pieces); }; });
  auto* c2 = reach->add_subcommand("cor2", "layer d-1 threshold via the quotient");
  common(c2);
  c2->add_option("--x", x)->required();
  c2->callback([&] { action = [&] { reach_cor2(c, x); }; });
  auto* t2 = reach->add_subcommand("thm2", "threshold through the free lift");
  common(t2);
  t2->add_option("--x", x)->required();
  t2->add_option("--k", k)->required();
  t2->callback([&] { action = [&] { reach_thm2(c, x, k); }; });
  auto* t3 = reach->add_subcommand("thm3", "closed curves near x");
  common(t3);
  t3->add_option("--x", x)->required();
  t3->add_option("--k", k)->required();
  t3->callback([&] { action = [&] { reach_thm3(c, x, k); }; });

  auto* attain = app.add_subcommand("attain", "attainable sets");
  attain->require_subcommand(1);
  auto* sample = attain->add_subcommand("sample", "random admissible words");
  common(sample);
  sample->add_option("--depth", depth);
  sample->add_option("--time", budget, "bound on the total duration");
  sample->add_option("--samples", samples);
  sample->callback([&] { action = [&] { attain_sample(c, depth, budget, samples); }; });

  auto* demo = app.add_subcommand("demo", "end-to-end demonstrations");
  demo->require_subcommand(1);
  auto* th1 = demo->add_subcommand("theorem1", "halfspace attainability on R x| Heisenberg");
  common(th1);
  th1->add_option("--exponent", exponent, "power-cone exponent (2 gives the contact-2 control)");
  th1->add_option("--coefficient", coefficient);
  th1->add_option("--grid", grid);
  th1->callback([&] { action = [&] { demo_theorem1(c, exponent, coefficient, grid); }; });

  CLI11_PARSE(app, argc, argv);
  try {
    if (action) action();
  } catch (const Error& e) {
    std::cerr << Json{{"error", e.code()}, {"message", e.what()}}.dump() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << Json{{"error", "internal"}, {"message", e.what()}}.dump() << '\n';
    return 2;
  }
  return 0;
}
