#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nilcc/cc_metric.hpp"
#include "nilcc/cones.hpp"
#include "nilcc/fit.hpp"
#include "nilcc/semidirect.hpp"

namespace nilcc {

struct ReachOptions {
  CcOptions cc;
  long max_n = 2000000;  // budget on the number of factors
};

/// n points x_1..x_n with x_1 ... x_n = e, each within `radius` of `center`
/// in the CC metric. certificates[i] is a horizontal word for center^{-1} x_i
/// whose length bounds that distance.
struct Factorization {
  QVec center;
  std::vector<QVec> factors;
  std::vector<QWord> certificates;
  double max_certificate_length = 0;
  bool closed = false;  // exact product is the identity
};

struct ThresholdRow {
  double eps = 0;
  long n_lo = 0;  // below this, the lower bound rules membership out
  long n_hi = 0;  // witnessed
  double n_mid = 0;
  double witness_length = 0;
  bool witnessed = false;
  bool closed = false;
  double max_factor_distance = 0;  // largest certificate length
  bool incomplete = false;
};

struct ReachExperiment {
  std::string name;
  std::vector<ThresholdRow> rows;
  LineFit fit;           // log n_mid against log(1/eps)
  bool fitted = false;
  double radius = 0;     // upper estimate of kappa(e, target)
  double exponent = 0;   // theoretical exponent used for constants
  double empirical_Q = 0;
  bool monotone = true;  // n_hi nonincreasing in eps
  bool complete = true;
  std::vector<Factorization> witnesses;  // kept only when requested
};

/// e in B(z, eps)^n iff kappa(e, n z) < n eps, for central z in the top layer.
ReachExperiment lemma1_threshold(const NilpotentAlgebra& a, const QVec& z, const std::vector<double>& eps_grid,
                                 const ReachOptions& options = {}, bool keep_witnesses = false);

/// Factorization of e through B(z, eps)^n built from an exact word for (nz)^{-1}.
std::optional<Factorization> lemma1_factorization(const CcEstimator& est, const QVec& z, double eps, long n);

struct BallInclusionReport {
  bool hypothesis = false;  // n^{1/d} r + s < n eps
  std::string verdict;      // "verified", "failed", "not implied"
  double radius = 0;
  std::size_t samples = 0;
  std::size_t factorized = 0;
};

BallInclusionReport lemma1_ball_inclusion(const NilpotentAlgebra& a, const QVec& z, double eps, double s, long n,
                                          std::size_t samples, unsigned seed, const ReachOptions& options = {});

/// Closed 2n-factor product from n factors x y_k whose product lies in the
/// top layer; uses delta_{-1} and the parity of the step.
Factorization lemma2_reflection_word(const NilpotentAlgebra& a, const QVec& x, const std::vector<QWord>& pieces);

struct Corollary2Row {
  double eps = 0;
  long quotient_n = 0;
  long witnessed_n = 0;
  double bound = 0;  // 2 (2r/eps)^{k/(k-1)}, k = d - 1
  bool within_bound = false;
  bool closed = false;
  double max_factor_distance = 0;
};

struct Corollary2Experiment {
  double radius = 0;  // upper estimate of kappa for the image of x in N/N^d
  std::vector<Corollary2Row> rows;
  LineFit fit;
  bool fitted = false;
  double empirical_Q = 0;
  std::vector<Factorization> witnesses;
};

Corollary2Experiment corollary2_threshold(const NilpotentAlgebra& a, const QVec& x, const std::vector<double>& eps_grid,
                                          const ReachOptions& options = {}, bool keep_witnesses = false);

/// Closed factorization for one eps through the quotient N/N^d and the
/// reflection word; factors lie within eps of x.
std::optional<Factorization> corollary2_factorization(const NilpotentAlgebra& a, const QVec& x, double eps,
                                                      const ReachOptions& options = {});

struct Theorem2Row {
  double eps = 0;
  long n = 0;
  bool pushed_closed = false;  // product of projected factors is exactly e
  double max_factor_distance = 0;
};

struct Theorem2Experiment {
  int k = 0;
  std::size_t lifted_dim = 0;
  double radius = 0;  // upper estimate of kappa(e, x) downstairs
  std::vector<Theorem2Row> rows;
  LineFit fit;
  bool fitted = false;
  double empirical_Q = 0;
};

Theorem2Experiment theorem2_lifted_threshold(const NilpotentAlgebra& a, const QVec& x, int k,
                                             const std::vector<double>& eps_grid, const ReachOptions& options = {});

struct ClosedCurve {
  std::vector<QVec> steps;  // unit-time steps exp(x_i)
  double length = 0;        // sum |x_i|
  double max_deviation = 0; // max |x_i - x|
  bool closed = false;
  bool evident_case = false;
  double cc_radius_factor = 1;  // a: factors were built with CC radius a eps
};

/// Factors are built with CC radius a eps, halving a (from `cc_radius_factor`)
/// until every factor is within eps of x in the coordinate norm.
ClosedCurve theorem3_closed_curve(const NilpotentAlgebra& a, const QVec& x, int k, double eps,
                                  const ReachOptions& options = {}, double cc_radius_factor = 1);

struct Theorem3Report {
  std::vector<std::pair<double, ClosedCurve>> curves;
  LineFit fit;  // log length against log(1/eps)
  bool fitted = false;
  double empirical_P = 0;
  double radius = 0;
};

Theorem3Report theorem3_experiment(const NilpotentAlgebra& a, const QVec& x, int k, const std::vector<double>& eps_grid,
                                   const ReachOptions& options = {});

// ---------------------------------------------------------------------------
// Attainable sets

struct CloudPoint {
  double t = 0;  // chi component (0 for points of N)
  DVec x;
  std::vector<DVec> directions;  // cone elements, one per step (with the t entry first for G)
  std::vector<double> durations;
};

struct AttainableCloud {
  std::vector<CloudPoint> points;
  double min_chi = 0;
  double max_cone_distance = 0;  // over all step directions
};

/// Random words of at most `depth` steps with directions in C and durations
/// summing to at most `budget`. If `group` is given the cone lives in R + N
/// coordinates (t first) and steps use the G exponential.
AttainableCloud attainable_sample(const NilpotentAlgebra& a, const Cone& c, std::size_t depth, double budget,
                                  std::size_t samples, unsigned seed, const SemidirectGroup* group = nullptr);

struct CoverageReport {
  std::size_t cells = 0;
  std::size_t hit = 0;
  double fraction = 0;
};

/// Fraction of the cells of [-half, half]^dim (per-axis `bins`) hit by N-parts of the cloud.
CoverageReport grid_coverage(const AttainableCloud& cloud, double half, std::size_t bins);

// ---------------------------------------------------------------------------
// Halfspace attainability demonstration

struct HypothesisCheck {
  std::string name;
  bool passed = false;
  double margin = 0;
  std::string detail;
};

struct Theorem1Options {
  std::size_t grid = 5;          // points per axis of the N-slice at t = 0
  double half_width = 1;         // box [-half, half]^dim
  std::size_t shell_grid = 3;    // per-axis points of the shell at t = shell_t
  double shell_t = 0.5;
  double tolerance = 1e-3;
  double contact_margin = 0.25;  // required excess of the contact exponent
  ContactOptions contact;        // radii default to [1e-2, 1]
};

struct Theorem1Point {
  double target_t = 0;
  DVec target_x;
  double reached_t = 0;
  DVec reached_x;
  double distance = 0;
  double drift = 0;          // S, the total push along p
  std::size_t steps = 0;
  bool reached = false;
  double min_prefix_chi = 0;
};

struct Theorem1Report {
  std::vector<HypothesisCheck> hypotheses;
  bool hypotheses_hold = false;
  std::vector<std::string> failed;  // names of failed conditions
  double contact_exponent = 0;
  double threshold = 0;             // d/(d-1)
  std::vector<Theorem1Point> points;
  std::size_t reached = 0;
  std::size_t negative_chi = 0;
  double worst_distance = 0;
};

/// Checks the hypotheses and, when they hold, builds admissible words whose
/// endpoints approach a grid sample of the halfspace chi >= 0.
/// `cone` lives in R + N coordinates with t at index 0; p and v likewise.
Theorem1Report theorem1_demonstration(const SemidirectGroup& g, const Cone& cone, const DVec& p, const DVec& v,
                                      const Theorem1Options& options = {});

/// The example group R x| Heisenberg with D e1 = e2 and the cone
/// { t >= 0, s' >= 0, k |y|^a <= t s'^(a-1) }, s' = x3 + t, y = (x1, x2).
struct Theorem1Example {
  NilpotentAlgebra algebra;
  QMatrix derivation;
  Cone cone;
  DVec p;
  DVec v;
};

Theorem1Example theorem1_example(double exponent, double coefficient = 1e-5);

}  // namespace nilcc
