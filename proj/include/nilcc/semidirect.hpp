#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

#include "nilcc/cc_metric.hpp"

namespace nilcc {

/// Square matrix over Q stored by rows; (D x)_i = sum_j D[i][j] x_j.
using QMatrix = std::vector<QVec>;

template <class S>
struct SdPoint {
  S t;
  Vec<S> x;
};

using QSdPoint = SdPoint<Rational>;
using DSdPoint = SdPoint<double>;

struct DerivationReport {
  bool derivation = true;         // D[x,y] = [Dx,y] + [x,Dy] on basis pairs
  bool layer1_invariant = true;   // D maps the first layer into itself
  bool preserves_filtration = true;
  std::vector<std::string> violations;
};

struct ConstantM {
  double grid_value = 1;   // max of ||A_t|| over the refined grid
  double certified = 1;    // e^{||D||}, an upper bound for every |t| <= 1
  std::size_t grid_points = 0;
};

/// The group R x| N with (t, x)(s, y) = (t + s, (A_{-s} x) y), A_t = e^{t D}
/// for a derivation D of the base algebra.
class SemidirectGroup {
 public:
  SemidirectGroup(const NilpotentAlgebra& base, QMatrix derivation);

  const NilpotentAlgebra& base() const { return *base_; }
  const QMatrix& derivation() const { return derivation_; }
  std::size_t dim() const { return base_->dim(); }
  /// True if D^n = 0; flows are then finite series and exact over Q.
  bool nilpotent_action() const { return nilpotent_; }

  DerivationReport check_derivation() const;

  template <class S>
  Vec<S> apply_derivation(const Vec<S>& x) const;

  /// A_t x. Exact for rational t when the action is nilpotent.
  template <class S>
  Vec<S> flow(const S& t, const Vec<S>& x) const;
  Eigen::MatrixXd flow_matrix(double t) const;
  QMatrix flow_matrix_exact(const Rational& t) const;

  /// max |A_t(x y) - A_t(x) A_t(y)| over the sample pairs.
  double automorphism_residual(double t, const std::vector<std::pair<DVec, DVec>>& pairs) const;

  template <class S>
  SdPoint<S> product(const SdPoint<S>& p, const SdPoint<S>& q) const;
  template <class S>
  SdPoint<S> inverse(const SdPoint<S>& p) const;
  template <class S>
  SdPoint<S> identity() const {
    return {S(0), Vec<S>(dim(), S(0))};
  }

  ConstantM constant_M(double tolerance = 1e-6) const;

  /// One-parameter subgroup generated by (tau, xi) evaluated at time 1: the
  /// ordered product integral of A_{-(1-s) tau} xi ds, by a fourth-order
  /// Magnus scheme on `panels` subintervals.
  DSdPoint exp_G(double tau, const DVec& xi, std::size_t panels = 16) const;

 private:
  const NilpotentAlgebra* base_;
  QMatrix derivation_;
  Eigen::MatrixXd derivation_d_;
  bool nilpotent_ = false;
  std::vector<QMatrix> powers_;  // D^k / k! for k < nilpotency index
};

template <class S>
S chi(const SdPoint<S>& p) {
  return p.t;
}

template <class S>
bool halfspace_contains(const SdPoint<S>& p) {
  return !(p.t < S(0));
}

struct Lemma4Report {
  bool precondition_ok = true;
  std::string precondition_failure;
  std::size_t samples = 0;
  std::size_t verified = 0;
  double worst_factor_length = 0;  // max length of the mapped factor words
  double allowed_length = 0;       // M * eps with the certified M
  double worst_product_error = 0;
  std::vector<std::string> violations;
};

/// For random points x_1..x_n of the eps-ball (given by horizontal words of
/// length <= eps), builds the factors (t, q A_{(n-k)t} x_k) and verifies that
/// they lie in (t, q + M eps B) and multiply to (nt, (nq) x_1 ... x_n).
Lemma4Report lemma4_inclusion_check(const SemidirectGroup& g, const DVec& q, double eps, double t, std::size_t n,
                                    std::size_t samples, unsigned seed);

}  // namespace nilcc
