#include "nilcc/cones.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "nilcc/fit.hpp"

namespace nilcc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(const DVec& a, const DVec& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

DVec normalized(const DVec& v) {
  const double n = norm(v);
  if (n == 0) throw Error("domain", "cannot normalise the zero vector");
  return scale(1.0 / n, v);
}

Eigen::MatrixXd as_matrix(const std::vector<DVec>& columns, std::size_t rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j)
    for (std::size_t i = 0; i < rows; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = columns[j][i];
  return m;
}

void check_dim(const DVec& v, std::size_t n) {
  if (v.size() != n) throw Error("algebra_mismatch", "vector dimension does not match the cone");
}

}  // namespace

std::string to_string(ConeKind kind) {
  switch (kind) {
    case ConeKind::polyhedral: return "polyhedral";
    case ConeKind::lorentz: return "lorentz";
    case ConeKind::power: return "power";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// NNLS and minimum-norm points

NnlsResult nnls(const std::vector<DVec>& columns, const DVec& b, double tol) {
  const std::size_t m = columns.size();
  const std::size_t n = b.size();
  for (const auto& c : columns) check_dim(c, n);
  NnlsResult res;
  res.coefficients.assign(m, 0.0);
  res.fitted.assign(n, 0.0);
  if (m == 0) {
    res.residual = norm(b);
    return res;
  }
  const Eigen::MatrixXd A = as_matrix(columns, n);
  const Eigen::VectorXd bv = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(n));
  const double scale_ = std::max(1.0, A.cwiseAbs().maxCoeff() * std::max(1.0, bv.norm()));
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  std::vector<bool> passive(m, false);
  const std::size_t max_iter = 30 * m + 30;
  auto solve_passive = [&](Eigen::VectorXd& z) {
    std::vector<Eigen::Index> idx;
    for (std::size_t j = 0; j < m; ++j)
      if (passive[j]) idx.push_back(static_cast<Eigen::Index>(j));
    Eigen::MatrixXd Ap(A.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) Ap.col(static_cast<Eigen::Index>(k)) = A.col(idx[k]);
    Eigen::VectorXd zp = Ap.colPivHouseholderQr().solve(bv);
    z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < idx.size(); ++k) z(idx[k]) = zp(static_cast<Eigen::Index>(k));
  };
  std::size_t iter = 0;
  while (iter < max_iter) {
    Eigen::VectorXd w = A.transpose() * (bv - A * x);
    Eigen::Index best = -1;
    double wmax = tol * scale_;
    for (std::size_t j = 0; j < m; ++j) {
      if (!passive[j] && w(static_cast<Eigen::Index>(j)) > wmax) {
        wmax = w(static_cast<Eigen::Index>(j));
        best = static_cast<Eigen::Index>(j);
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;
    while (iter++ < max_iter) {
      Eigen::VectorXd z;
      solve_passive(z);
      bool feasible = true;
      for (std::size_t j = 0; j < m; ++j)
        if (passive[j] && z(static_cast<Eigen::Index>(j)) <= 0) feasible = false;
      if (feasible) {
        x = z;
        break;
      }
      double alpha = 1;
      for (std::size_t j = 0; j < m; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        if (passive[j] && z(jj) <= 0) alpha = std::min(alpha, x(jj) / (x(jj) - z(jj)));
      }
      x += alpha * (z - x);
      for (std::size_t j = 0; j < m; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        if (passive[j] && x(jj) <= tol) {
          passive[j] = false;
          x(jj) = 0;
        }
      }
    }
  }
  res.iterations = iter;
  Eigen::VectorXd fit = A * x;
  for (std::size_t j = 0; j < m; ++j) res.coefficients[j] = x(static_cast<Eigen::Index>(j));
  for (std::size_t i = 0; i < n; ++i) res.fitted[i] = fit(static_cast<Eigen::Index>(i));
  res.residual = norm(sub(res.fitted, b));
  return res;
}

DVec min_norm_point(const std::vector<DVec>& points) {
  if (points.empty()) throw Error("precondition", "min_norm_point of an empty set");
  const std::size_t n = points.front().size();
  // Weights on the simplex via NNLS with a heavily weighted sum-to-one row.
  double big = 1;
  for (const auto& p : points) big = std::max(big, norm(p));
  big *= 1e6;
  std::vector<DVec> cols;
  for (const auto& p : points) {
    DVec c = p;
    c.push_back(big);
    cols.push_back(std::move(c));
  }
  DVec rhs(n + 1, 0.0);
  rhs[n] = big;
  NnlsResult r = nnls(cols, rhs, 1e-15);
  double total = 0;
  for (double w : r.coefficients) total += w;
  DVec out(n, 0.0);
  if (total <= 0) return out;
  for (std::size_t j = 0; j < points.size(); ++j) axpy(out, r.coefficients[j] / total, points[j]);
  return out;
}

std::vector<DVec> orthonormal_basis(const std::vector<DVec>& vectors, double tol) {
  std::vector<DVec> basis;
  for (const auto& v0 : vectors) {
    DVec v = v0;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) axpy(v, -dot(v, b), b);
    const double n = norm(v);
    if (n > tol * std::max(1.0, norm(v0))) basis.push_back(scale(1.0 / n, v));
  }
  return basis;
}

std::vector<DVec> sphere_directions(const std::vector<DVec>& basis, std::size_t count, unsigned seed) {
  std::vector<DVec> out;
  if (basis.empty()) return out;
  const std::size_t n = basis.front().size();
  if (basis.size() == 1) return {basis[0], neg(basis[0])};
  if (basis.size() == 2) {
    for (std::size_t i = 0; i < count; ++i) {
      const double th = 2 * M_PI * static_cast<double>(i) / static_cast<double>(count);
      DVec v(n, 0.0);
      axpy(v, std::cos(th), basis[0]);
      axpy(v, std::sin(th), basis[1]);
      out.push_back(std::move(v));
    }
    return out;
  }
  for (const auto& b : basis) {
    out.push_back(b);
    out.push_back(neg(b));
  }
  std::mt19937 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  while (out.size() < std::max(count, 2 * basis.size())) {
    DVec v(n, 0.0);
    for (const auto& b : basis) axpy(v, g(rng), b);
    const double nv = norm(v);
    if (nv > 1e-12) out.push_back(scale(1.0 / nv, v));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Construction

Cone Cone::polyhedral(std::size_t dim, std::vector<DVec> generators, std::vector<DVec> halfspaces) {
  Cone c;
  c.kind_ = ConeKind::polyhedral;
  c.dim_ = dim;
  for (auto& g : generators) {
    check_dim(g, dim);
    if (norm(g) == 0) throw Error("invalid_cone", "zero generator");
  }
  for (auto& h : halfspaces) {
    check_dim(h, dim);
    if (norm(h) == 0) throw Error("invalid_cone", "zero halfspace normal");
  }
  if (generators.empty() && !halfspaces.empty() && dim == 0) throw Error("invalid_cone", "empty cone data");
  c.generators_ = std::move(generators);
  c.halfspaces_ = std::move(halfspaces);
  c.prepare_polyhedral();
  return c;
}

Cone Cone::halfspaces(std::size_t dim, std::vector<DVec> normals) { return polyhedral(dim, {}, std::move(normals)); }

Cone Cone::lorentz(DVec axis, double slope) {
  if (!(slope > 0) || !std::isfinite(slope)) throw Error("invalid_cone", "lorentz slope must be positive");
  Cone c;
  c.kind_ = ConeKind::lorentz;
  c.dim_ = axis.size();
  c.axis_ = normalized(axis);
  c.slope_ = slope;
  return c;
}

Cone Cone::power(std::size_t dim, PowerProfile profile) {
  auto in_range = [&](std::size_t i) { return i < dim; };
  if (!in_range(profile.tau_index) || !in_range(profile.s_index) || profile.tau_index == profile.s_index)
    throw Error("invalid_cone", "power cone indices out of range");
  for (auto i : profile.y_indices)
    if (!in_range(i) || i == profile.tau_index || i == profile.s_index)
      throw Error("invalid_cone", "power cone y indices invalid");
  if (!(profile.exponent > 1) || !(profile.coefficient > 0) || !std::isfinite(profile.shear))
    throw Error("invalid_cone", "power cone needs exponent > 1 and coefficient > 0");
  Cone c;
  c.kind_ = ConeKind::power;
  c.dim_ = dim;
  c.profile_ = std::move(profile);
  return c;
}

void Cone::prepare_polyhedral() {
  const std::size_t n = dim_;
  facets_.clear();
  if (!halfspaces_.empty()) {
    for (const auto& h : halfspaces_) facets_.push_back(normalized(h));
    // full-dimensional iff some x has <a_i, x> > 0 for all i (Gordan)
    full_dimensional_ = norm(min_norm_point(facets_)) > 1e-10;
  } else if (!generators_.empty()) {
    const Eigen::MatrixXd G = as_matrix(generators_, n);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
    full_dimensional_ = static_cast<std::size_t>(lu.rank()) == n;
    if (!full_dimensional_) return;
    std::vector<DVec> gens;
    for (const auto& g : generators_) gens.push_back(normalized(g));
    const std::size_t m = gens.size();
    const std::size_t k = n - 1;
    // enumerate k-subsets; each spanning a hyperplane that supports C is a facet
    double combos = 1;
    for (std::size_t i = 0; i < k; ++i) combos = combos * static_cast<double>(m - i) / static_cast<double>(i + 1);
    if (combos > 2e5) throw Error("too_large", "too many generators for facet enumeration");
    std::vector<std::size_t> pick(k);
    for (std::size_t i = 0; i < k; ++i) pick[i] = i;
    while (true) {
      Eigen::MatrixXd M(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
      for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = 0; c < n; ++c)
          M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = gens[pick[r]][c];
      Eigen::MatrixXd ker;
      if (k == 0) {
        ker = Eigen::MatrixXd::Identity(1, 1);
      } else {
        Eigen::FullPivLU<Eigen::MatrixXd> sub(M);
        ker = sub.kernel();
      }
      if (ker.cols() == 1 && (k == 0 || Eigen::FullPivLU<Eigen::MatrixXd>(M).rank() == static_cast<Eigen::Index>(k))) {
        DVec a(n);
        for (std::size_t i = 0; i < n; ++i) a[i] = ker(static_cast<Eigen::Index>(i), 0);
        a = normalized(a);
        bool pos = true, negs = true;
        for (const auto& g : gens) {
          const double v = dot(a, g);
          if (v < -1e-10) pos = false;
          if (v > 1e-10) negs = false;
        }
        if (pos != negs) {
          if (negs) a = neg(a);
          bool dup = false;
          for (const auto& f : facets_)
            if (norm(sub(f, a)) < 1e-9) dup = true;
          if (!dup) facets_.push_back(a);
        }
      }
      // next combination
      std::size_t i = k;
      while (i > 0 && pick[i - 1] == m - k + (i - 1)) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
  } else {
    full_dimensional_ = true;  // no constraints: the whole space
  }
}

// ---------------------------------------------------------------------------
// Membership and distance

bool Cone::contains(const DVec& p, double tol) const {
  check_dim(p, dim_);
  const double slack = tol * std::max(1.0, norm(p));
  switch (kind_) {
    case ConeKind::polyhedral:
      if (!halfspaces_.empty()) {
        for (const auto& f : facets_)
          if (dot(f, p) < -slack) return false;
        return true;
      }
      if (generators_.empty()) return true;
      return nnls(generators_, p).residual <= std::max(slack, 1e-12 * std::max(1.0, norm(p)));
    case ConeKind::lorentz: {
      const double u = dot(axis_, p);
      DVec perp = p;
      axpy(perp, -u, axis_);
      return u >= slope_ * norm(perp) - slack;
    }
    case ConeKind::power: {
      const auto& pr = profile_;
      const double tau = p[pr.tau_index];
      const double s = p[pr.s_index] + pr.shear * tau;
      double y2 = 0;
      for (auto i : pr.y_indices) y2 += p[i] * p[i];
      if (tau < -slack || s < -slack) return false;
      const double lhs = pr.coefficient * std::pow(std::sqrt(y2), pr.exponent);
      const double rhs = std::max(tau, 0.0) * std::pow(std::max(s, 0.0), pr.exponent - 1);
      return lhs <= rhs + slack;
    }
  }
  return false;
}

double Cone::power_distance(const DVec& p) const {
  const auto& pr = profile_;
  // Reduce to (tau, s, rho) with rho along the y-part of p.
  const double t0 = p[pr.tau_index], s0 = p[pr.s_index];
  double r0 = 0;
  for (auto i : pr.y_indices) r0 += p[i] * p[i];
  r0 = std::sqrt(r0);
  const bool has_y = !pr.y_indices.empty();
  const double a = pr.exponent, k = pr.coefficient, c = pr.shear;
  // boundary ray through (tau, s') = (u, 1-u), u = logistic(z)
  auto ray = [&](double z, double out[3]) {
    const double u = 1.0 / (1.0 + std::exp(-z));
    const double w = 1.0 / (1.0 + std::exp(z));
    const double rho = has_y ? std::pow(u * std::pow(w, a - 1) / k, 1.0 / a) : 0.0;
    out[0] = u;
    out[1] = w - c * u;
    out[2] = rho;
    const double nn = std::sqrt(out[0] * out[0] + out[1] * out[1] + out[2] * out[2]);
    for (int i = 0; i < 3; ++i) out[i] /= nn;
  };
  auto dist = [&](double z) {
    double d[3];
    ray(z, d);
    const double t = std::max(0.0, t0 * d[0] + s0 * d[1] + r0 * d[2]);
    const double e0 = t0 - t * d[0], e1 = s0 - t * d[1], e2 = r0 - t * d[2];
    return std::sqrt(e0 * e0 + e1 * e1 + e2 * e2);
  };
  const int samples = 4001;
  const double zmin = -80, zmax = 80;
  const double dz = (zmax - zmin) / (samples - 1);
  double best = kInf;
  int bi = 0;
  for (int i = 0; i < samples; ++i) {
    const double d = dist(zmin + dz * i);
    if (d < best) {
      best = d;
      bi = i;
    }
  }
  // golden-section refinement on the bracketing cell
  double lo = zmin + dz * std::max(0, bi - 1), hi = zmin + dz * std::min(samples - 1, bi + 1);
  const double g = (std::sqrt(5.0) - 1) / 2;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = dist(x1), f2 = dist(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = dist(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = dist(x2);
    }
  }
  return std::min({best, f1, f2});
}

double Cone::distance(const DVec& p) const {
  check_dim(p, dim_);
  switch (kind_) {
    case ConeKind::polyhedral: {
      if (!generators_.empty()) return nnls(generators_, p, 1e-14).residual;
      if (facets_.empty()) return 0;
      // dist(p, C) = |projection of p onto the polar cone cone(-a_i)|
      std::vector<DVec> polar;
      for (const auto& f : facets_) polar.push_back(neg(f));
      return norm(nnls(polar, p, 1e-14).fitted);
    }
    case ConeKind::lorentz: {
      const double u = dot(axis_, p);
      DVec perp = p;
      axpy(perp, -u, axis_);
      const double v = norm(perp);
      if (u >= slope_ * v) return 0;
      if (v <= -slope_ * u) return norm(p);
      return (slope_ * v - u) / std::sqrt(1 + slope_ * slope_);
    }
    case ConeKind::power:
      if (contains(p, 0)) return 0;
      return power_distance(p);
  }
  return 0;
}

InteriorResult Cone::interior(const DVec& p) const {
  check_dim(p, dim_);
  InteriorResult r;
  switch (kind_) {
    case ConeKind::polyhedral: {
      if (!full_dimensional_) {
        r.degenerate = true;
        return r;
      }
      if (facets_.empty()) {
        r.inside = true;
        r.margin = kInf;
        return r;
      }
      double m = kInf;
      for (const auto& f : facets_) m = std::min(m, dot(f, p));
      r.inside = m > 0;
      r.margin = std::max(0.0, m);
      return r;
    }
    case ConeKind::lorentz: {
      const double u = dot(axis_, p);
      DVec perp = p;
      axpy(perp, -u, axis_);
      const double m = (u - slope_ * norm(perp)) / std::sqrt(1 + slope_ * slope_);
      r.inside = m > 0;
      r.margin = std::max(0.0, m);
      return r;
    }
    case ConeKind::power: {
      const auto& pr = profile_;
      const double tau = p[pr.tau_index], s = p[pr.s_index] + pr.shear * tau;
      double y2 = 0;
      for (auto i : pr.y_indices) y2 += p[i] * p[i];
      const bool strict = tau > 0 && s > 0 &&
                          pr.coefficient * std::pow(std::sqrt(y2), pr.exponent) < tau * std::pow(s, pr.exponent - 1);
      if (!strict) return r;
      r.inside = true;
      r.margin = power_distance(p);
      return r;
    }
  }
  return r;
}

bool descriptions_agree(const Cone& c, std::size_t samples, unsigned seed, double tol) {
  if (c.kind() != ConeKind::polyhedral || c.generators().empty() || c.halfspace_normals().empty()) return true;
  const Cone by_gens = Cone::polyhedral(c.dim(), c.generators());
  const Cone by_half = Cone::halfspaces(c.dim(), c.halfspace_normals());
  std::mt19937 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t i = 0; i < samples; ++i) {
    DVec p(c.dim());
    for (auto& x : p) x = g(rng);
    const double dg = by_gens.distance(p), dh = by_half.distance(p);
    if (std::fabs(dg - dh) > tol * std::max(1.0, norm(p))) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Controllability

ControllabilityVerdict controllability_criterion(const Cone& c, const std::vector<DVec>& subspace, unsigned seed) {
  for (const auto& v : subspace) check_dim(v, c.dim());
  const std::vector<DVec> basis = orthonormal_basis(subspace);
  ControllabilityVerdict out{Controllability::not_controllable_by_criterion, 0, DVec(c.dim(), 0.0), ""};
  auto project = [&](const DVec& v) {
    DVec r(v.size(), 0.0);
    for (const auto& b : basis) axpy(r, dot(v, b), b);
    return r;
  };
  switch (c.kind()) {
    case ConeKind::polyhedral: {
      if (!c.full_dimensional()) throw Error("precondition", "controllability criterion needs a generating cone");
      out.method = "gordan-min-norm";
      if (c.facets().empty()) {
        out.verdict = Controllability::controllable;
        out.margin = kInf;
        if (!basis.empty()) out.witness = basis.front();
        return out;
      }
      if (basis.empty()) return out;
      std::vector<DVec> proj;
      for (const auto& f : c.facets()) proj.push_back(project(f));
      const DVec m = min_norm_point(proj);
      const double nm = norm(m);
      if (nm > 1e-9) {
        out.verdict = Controllability::controllable;
        out.witness = scale(1.0 / nm, m);
        out.margin = c.interior(out.witness).margin;
      }
      return out;
    }
    case ConeKind::lorentz: {
      out.method = "lorentz-closed-form";
      if (basis.empty()) return out;
      const DVec pa = project(c.axis());
      const double m = norm(pa);
      if (m <= 0) return out;
      const double ratio = m >= 1 ? kInf : m / std::sqrt(std::max(0.0, 1 - m * m));
      if (ratio > c.slope()) {
        out.verdict = Controllability::controllable;
        out.witness = scale(1.0 / m, pa);
        out.margin = c.interior(out.witness).margin;
      }
      return out;
    }
    case ConeKind::power: {
      out.method = "direction-sampling";
      double best = 0;
      for (const auto& w : sphere_directions(basis, 4096, seed)) {
        const InteriorResult r = c.interior(w);
        if (r.inside && r.margin > best) {
          best = r.margin;
          out.witness = w;
        }
      }
      if (best > 1e-9) {
        out.verdict = Controllability::controllable;
        out.margin = best;
      }
      return out;
    }
  }
  return out;
}

ControllabilityVerdict controllability_criterion(const Cone& c, const NilpotentAlgebra& a, unsigned seed) {
  if (c.dim() != a.dim()) throw Error("algebra_mismatch", "cone and algebra dimensions differ");
  std::vector<DVec> derived;
  for (const auto& v : derived_algebra_basis(a)) derived.push_back(to_double(v));
  return controllability_criterion(c, derived, seed);
}

// ---------------------------------------------------------------------------
// Contact and margins

ContactEstimate degree_of_contact(const Cone& c, const std::vector<DVec>& subspace, const DVec& x,
                                  const ContactOptions& options) {
  check_dim(x, c.dim());
  std::vector<DVec> basis = orthonormal_basis(subspace);
  const double nx = norm(x);
  if (nx > 0 && !basis.empty()) {
    DVec inside(x.size(), 0.0);
    for (const auto& b : basis) axpy(inside, dot(x, b), b);
    if (norm(sub(inside, x)) <= 1e-12 * nx) {
      const DVec xhat = scale(1.0 / nx, x);
      std::vector<DVec> rest;
      for (const auto& b : basis) {
        DVec v = b;
        axpy(v, -dot(v, xhat), xhat);
        rest.push_back(v);
      }
      basis = orthonormal_basis(rest, 1e-9);
    }
  }
  std::vector<double> radii = options.radii;
  if (radii.empty())
    for (int i = 0; i < 16; ++i) radii.push_back(std::pow(10.0, -4.0 + 3.0 * i / 15.0));
  const auto dirs = sphere_directions(basis, options.directions, options.seed);
  ContactEstimate est;
  est.radius_min = *std::min_element(radii.begin(), radii.end());
  est.radius_max = *std::max_element(radii.begin(), radii.end());
  std::vector<double> rs, ds;
  for (double r : radii) {
    double worst = 0;
    for (const auto& d : dirs) {
      DVec q = x;
      axpy(q, r, d);
      worst = std::max(worst, c.distance(q));
    }
    est.samples.emplace_back(r, worst);
    if (worst > 0) {
      rs.push_back(r);
      ds.push_back(worst);
    }
  }
  if (rs.size() < 2) {
    est.measurable = false;
    est.exponent = kInf;
    return est;
  }
  const LineFit f = fit_loglog(rs, ds);
  est.exponent = f.slope;
  est.constant = std::exp(f.intercept);
  est.residual = f.rms;
  est.exponent_stderr = f.slope_stderr;
  return est;
}

std::optional<double> membership_boost(const Cone& c, const DVec& x, const DVec& v, double limit) {
  check_dim(x, c.dim());
  check_dim(v, c.dim());
  auto inside = [&](double lam) {
    DVec q = x;
    axpy(q, lam, v);
    return c.contains(q, 0);
  };
  if (inside(0)) return 0.0;
  double hi = 1e-300;
  while (!inside(hi)) {
    hi *= 2;
    if (hi > limit) return std::nullopt;
  }
  double lo = hi / 2;
  if (hi == 1e-300) lo = 0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (inside(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

PhiReport phi_margin(const Cone& c, const DVec& x, const DVec& v, const std::vector<DVec>& subspace,
                     const std::vector<double>& eps_grid, std::size_t directions, unsigned seed) {
  if (!c.interior(add(x, v)).inside) throw Error("precondition", "phi_margin requires x + v in the interior");
  const auto basis = orthonormal_basis(subspace);
  const auto dirs = sphere_directions(basis, directions, seed);
  PhiReport rep;
  std::vector<double> es, ps;
  for (double eps : eps_grid) {
    double phi = 0;
    for (const auto& d : dirs) {
      DVec q = x;
      axpy(q, eps, d);
      auto b = membership_boost(c, q, v);
      if (!b) throw Error("domain", "no finite boost for a sampled point");
      phi = std::max(phi, *b);
    }
    rep.rows.push_back({eps, phi});
    if (phi > 0) {
      es.push_back(eps);
      ps.push_back(phi);
    }
  }
  rep.identically_zero = es.empty();
  if (es.size() >= 2) rep.decay_exponent = fit_loglog(es, ps).slope;
  std::vector<PhiRow> sorted = rep.rows;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.eps < b.eps; });
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i].phi < sorted[i - 1].phi * (1 - 1e-9) - 1e-300) rep.monotone = false;
  return rep;
}

}  // namespace nilcc
