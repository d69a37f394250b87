#pragma once

#include <optional>
#include <vector>

#include "nilcc/rational.hpp"

namespace nilcc {

/// Reduced row echelon form over the rationals. Pivot of a row is its
/// first nonzero column; pivot columns are cleared in every other row.
class Echelon {
 public:
  explicit Echelon(std::size_t ncols = 0) : ncols_(ncols) {}

  /// Adds v to the row space; returns false if v was already in the span.
  bool insert(QVec v);
  /// v reduced modulo the row space (zero iff v is in the span).
  QVec reduce(QVec v) const;
  bool contains(const QVec& v) const { return is_zero(reduce(v)); }

  std::size_t rank() const { return rows_.size(); }
  std::size_t ncols() const { return ncols_; }
  const std::vector<QVec>& rows() const { return rows_; }
  const std::vector<std::size_t>& pivots() const { return pivots_; }
  bool is_pivot(std::size_t col) const;

 private:
  std::size_t ncols_;
  std::vector<QVec> rows_;
  std::vector<std::size_t> pivots_;
};

std::size_t rank(const std::vector<QVec>& vectors);

/// Indices of a maximal linearly independent subset, chosen greedily in order.
std::vector<std::size_t> independent_subset(const std::vector<QVec>& vectors);

/// Coefficients c with sum_j c_j columns[j] == target, or nullopt if target is
/// outside the span. Columns need not be independent; dependent columns get 0.
std::optional<QVec> solve_in_span(const std::vector<QVec>& columns, const QVec& target);

/// Floating-point counterpart (least squares); nullopt if the residual exceeds
/// tol * (1 + |target|).
std::optional<DVec> solve_in_span(const std::vector<DVec>& columns, const DVec& target,
                                  double tol = 1e-9);

}  // namespace nilcc
