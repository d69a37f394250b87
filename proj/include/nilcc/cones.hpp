#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nilcc/lie_algebra.hpp"

namespace nilcc {

enum class ConeKind { polyhedral, lorentz, power };

std::string to_string(ConeKind kind);

/// Shape data of a power cone
///   { tau >= 0, s' >= 0, coefficient |y|^exponent <= tau s'^(exponent-1) },
/// s' = s + shear * tau. Coordinates not listed are unconstrained.
struct PowerProfile {
  std::size_t tau_index = 0;
  std::size_t s_index = 1;
  std::vector<std::size_t> y_indices;
  double exponent = 2;
  double coefficient = 1;
  double shear = 0;
};

struct InteriorResult {
  bool inside = false;
  double margin = 0;  // radius of a ball around p inside C (infinite for the whole space)
  bool degenerate = false;
};

/// Closed convex cone in R^n.
class Cone {
 public:
  /// Conic hull of generators, optionally with a halfspace description
  /// {x : <a_i, x> >= 0} of the same set.
  static Cone polyhedral(std::size_t dim, std::vector<DVec> generators, std::vector<DVec> halfspaces = {});
  static Cone halfspaces(std::size_t dim, std::vector<DVec> normals);
  static Cone whole_space(std::size_t dim) { return halfspaces(dim, {}); }
  /// { x : <a, x> >= slope |x - <a, x> a| } with a normalised.
  static Cone lorentz(DVec axis, double slope);
  static Cone power(std::size_t dim, PowerProfile profile);

  ConeKind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  const std::vector<DVec>& generators() const { return generators_; }
  const std::vector<DVec>& halfspace_normals() const { return halfspaces_; }
  const DVec& axis() const { return axis_; }
  double slope() const { return slope_; }
  const PowerProfile& profile() const { return profile_; }

  bool contains(const DVec& p, double tol = 1e-12) const;
  double distance(const DVec& p) const;
  /// Outward facet normals (unit) of a full-dimensional polyhedral cone.
  const std::vector<DVec>& facets() const { return facets_; }
  bool full_dimensional() const { return full_dimensional_; }

  InteriorResult interior(const DVec& p) const;

 private:
  Cone() = default;
  void prepare_polyhedral();
  double power_distance(const DVec& p) const;

  ConeKind kind_ = ConeKind::polyhedral;
  std::size_t dim_ = 0;
  std::vector<DVec> generators_;
  std::vector<DVec> halfspaces_;
  std::vector<DVec> facets_;  // inward unit normals: C = {x : <f, x> >= 0}
  bool full_dimensional_ = true;
  DVec axis_;
  double slope_ = 1;
  PowerProfile profile_;
};

struct NnlsResult {
  DVec coefficients;
  DVec fitted;  // A * coefficients
  double residual = 0;
  std::size_t iterations = 0;
};

/// min |A x - b| subject to x >= 0 (Lawson-Hanson active set). Columns of A
/// are given as vectors.
NnlsResult nnls(const std::vector<DVec>& columns, const DVec& b, double tol = 1e-12);

/// Point of minimal norm in the convex hull of the points.
DVec min_norm_point(const std::vector<DVec>& points);

/// True if the sampled random points receive the same membership verdict
/// from the generator and halfspace descriptions.
bool descriptions_agree(const Cone& c, std::size_t samples, unsigned seed, double tol = 1e-9);

enum class Controllability { controllable, not_controllable_by_criterion };

struct ControllabilityVerdict {
  Controllability verdict;
  double margin = 0;  // size of the interior witness
  DVec witness;       // point of the subspace inside Int C when controllable
  std::string method;
};

/// Decides whether Int C meets the subspace spanned by `subspace` (normally
/// the derived algebra).
ControllabilityVerdict controllability_criterion(const Cone& c, const std::vector<DVec>& subspace,
                                                 unsigned seed = 1);
ControllabilityVerdict controllability_criterion(const Cone& c, const NilpotentAlgebra& a, unsigned seed = 1);

struct ContactOptions {
  std::vector<double> radii;   // empty: 16 log-spaced radii in [1e-4, 1e-1]
  std::size_t directions = 256;
  unsigned seed = 7;
};

struct ContactEstimate {
  double exponent = 0;
  double constant = 0;   // Q in dist ~ Q r^exponent
  double residual = 0;   // rms of the log-log fit
  double exponent_stderr = 0;
  double radius_min = 0, radius_max = 0;
  bool measurable = true;  // false: every sampled distance vanished
  std::vector<std::pair<double, double>> samples;  // (radius, worst distance)
};

/// Power-law order at which dist(C, x + y) vanishes for y -> 0 in the
/// subspace L (given by spanning vectors). If x lies in L, the orthogonal
/// complement of x inside L is used.
ContactEstimate degree_of_contact(const Cone& c, const std::vector<DVec>& subspace, const DVec& x,
                                  const ContactOptions& options = {});

/// Smallest lambda >= 0 with x + lambda v in C (v interior); nullopt if none
/// below `limit`.
std::optional<double> membership_boost(const Cone& c, const DVec& x, const DVec& v, double limit = 1e12);

struct PhiRow {
  double eps;
  double phi;
};

struct PhiReport {
  std::vector<PhiRow> rows;
  double decay_exponent = 0;  // fitted on rows with phi > 0
  bool identically_zero = false;
  bool monotone = true;  // phi nonincreasing as eps decreases
};

/// phi(eps): smallest value with x + phi v + eps B_L inside C, checked on a
/// direction sample of the sphere of L.
PhiReport phi_margin(const Cone& c, const DVec& x, const DVec& v, const std::vector<DVec>& subspace,
                     const std::vector<double>& eps_grid, std::size_t directions = 256, unsigned seed = 11);

/// Orthonormal basis of span(vectors).
std::vector<DVec> orthonormal_basis(const std::vector<DVec>& vectors, double tol = 1e-12);

/// Unit directions sampling the sphere of span(basis): exact circle samples
/// in dimension 2, seeded Gaussian samples otherwise (plus +-basis vectors).
std::vector<DVec> sphere_directions(const std::vector<DVec>& basis, std::size_t count, unsigned seed);

}  // namespace nilcc
