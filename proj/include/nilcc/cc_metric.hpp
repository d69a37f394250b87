#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nilcc/bch.hpp"

namespace nilcc {

/// One piece exp(duration * direction) of a piecewise-exponential curve.
template <class S>
struct Step {
  Vec<S> direction;
  S duration;
};

/// Finite product of exponentials, read left to right.
template <class S>
struct ControlWord {
  std::vector<Step<S>> steps;
  std::string constraint = "horizontal";

  std::size_t size() const { return steps.size(); }
  bool empty() const { return steps.empty(); }
};

using QWord = ControlWord<Rational>;
using DWord = ControlWord<double>;

template <class S>
Vec<S> endpoint(const NilpotentAlgebra& a, const ControlWord<S>& w);

/// Sum of duration * |direction|.
template <class S>
double word_length(const ControlWord<S>& w);

template <class S>
ControlWord<S> concat(const ControlWord<S>& u, const ControlWord<S>& v);

/// Reversed word with negated directions; its endpoint is the inverse.
template <class S>
ControlWord<S> inverse_word(const ControlWord<S>& w);

/// Fuses neighbouring steps along the same or opposite direction and drops
/// zero steps. The endpoint is unchanged.
template <class S>
ControlWord<S> merge_steps(const ControlWord<S>& w);

/// Cuts the word into `pieces` consecutive subwords of (nearly) equal length.
/// Exact words are cut at exact durations when direction norms are rational.
template <class S>
std::vector<ControlWord<S>> split_by_length(const ControlWord<S>& w, std::size_t pieces);

/// True if every direction lies in the declared first layer.
template <class S>
bool is_horizontal(const NilpotentAlgebra& a, const ControlWord<S>& w);

QWord to_exact(const DWord& w);
DWord to_float(const QWord& w);

struct CcOptions {
  double tolerance = 1e-6;
  std::size_t budget = 100000;  // word evaluations spent by refinement
  std::size_t word_cap = 64;    // maximum number of steps in a witness
  bool refine = true;
};

struct DistanceEstimate {
  DVec target;
  double upper = 0;
  double lower = 0;
  DWord witness;
  std::optional<QWord> exact_witness;  // present when the target was exact
  bool reached = true;                 // false: no witness within tolerance and cap
  double residual = 0;                 // |endpoint(witness) - target|
  std::size_t evaluations = 0;
  std::vector<std::string> methods;
};

/// Upper and lower estimates of the Carnot-Caratheodory distance from the
/// identity, with horizontal directions in the declared first layer.
///
/// Upper bounds come from layered steering (a straight first-layer step, then
/// iterated group commutators realising each higher layer) optionally
/// tightened by derivative-free refinement. Lower bounds come from the
/// abelianization and from the isoperimetric inequality on N/N^3.
class CcEstimator {
 public:
  explicit CcEstimator(const NilpotentAlgebra& algebra, CcOptions options = {});

  const NilpotentAlgebra& algebra() const { return *algebra_; }
  const CcOptions& options() const { return options_; }

  /// Layered steering word (no refinement, no cap). nullopt if the first
  /// layer does not generate the algebra.
  std::optional<DWord> steer(const DVec& target) const;
  std::optional<QWord> steer_exact(const QVec& target) const;

  /// Float estimate; seeds are candidate witnesses, the shortest admissible
  /// one (or the steering word) is refined.
  DistanceEstimate upper(const DVec& target, const std::vector<DWord>& seeds = {}) const;

  /// Estimate with an exact witness hitting the rational target exactly.
  DistanceEstimate upper_exact(const QVec& target) const;

  double lower(const DVec& target) const;

  /// kappa(x, y), reduced to kappa(e, x^{-1} y).
  DistanceEstimate distance(const DVec& x, const DVec& y) const;

 private:
  struct Monomial {
    std::vector<std::size_t> letters;  // basis indices of first-layer vectors
    QVec projection;                   // layer-k part of the nested bracket
    DVec projection_d;
  };

  template <class S>
  std::optional<ControlWord<S>> steer_impl(const Vec<S>& target) const;
  DWord refine(const DWord& start, const DVec& target, std::size_t& evaluations) const;
  DistanceEstimate finish(DistanceEstimate est) const;

  const NilpotentAlgebra* algebra_;
  CcOptions options_;
  std::vector<std::vector<Monomial>> monomials_;  // index k: monomials spanning layer k
};

struct HomogeneityRow {
  double t;
  double upper;
  double deviation;
  bool flagged;
};

/// |k(delta_t x) - t k(x)| / (t k(x)) for each t; flagged above 5%.
std::vector<HomogeneityRow> homogeneity_check(const CcEstimator& est, const DVec& x,
                                              const std::vector<double>& t_grid);

struct IsometryRow {
  double upper;
  double upper_reflected;
  double gap;  // relative
  bool flagged;
};

std::vector<IsometryRow> isometry_check_delta_minus_one(const CcEstimator& est,
                                                        const std::vector<DVec>& sample,
                                                        double tolerance = 0.05);

struct SubadditivityRow {
  double product_upper;
  double sum_upper;
  bool holds;
};

/// upper(x y) <= upper(x) + upper(y) + tol; the concatenated witness is
/// offered to the product search as a seed.
std::vector<SubadditivityRow> subadditivity_check(const CcEstimator& est,
                                                  const std::vector<std::pair<DVec, DVec>>& pairs,
                                                  double tol = 1e-9);

struct AsymptoticMetricRow {
  double t;
  double value;  // (1/t) k(delta_t x, delta_t y)
};

struct AsymptoticMetricReport {
  std::vector<AsymptoticMetricRow> rows;
  double last_relative_change = 0;  // between the two largest t
};

AsymptoticMetricReport asymptotic_metric_estimate(const CcEstimator& est, const DVec& x, const DVec& y,
                                                  const std::vector<double>& t_grid);

}  // namespace nilcc
