#include "nilcc/linalg.hpp"

#include <Eigen/Dense>
#include <algorithm>

namespace nilcc {

bool Echelon::is_pivot(std::size_t col) const {
  return std::find(pivots_.begin(), pivots_.end(), col) != pivots_.end();
}

QVec Echelon::reduce(QVec v) const {
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const Rational c = v[pivots_[r]];
    if (sgn(c) != 0) axpy(v, Rational(-c), rows_[r]);
  }
  return v;
}

bool Echelon::insert(QVec v) {
  if (v.size() != ncols_) throw Error("dimension", "Echelon::insert: size mismatch");
  v = reduce(std::move(v));
  std::size_t p = 0;
  while (p < v.size() && sgn(v[p]) == 0) ++p;
  if (p == v.size()) return false;
  const Rational inv = 1 / v[p];
  for (auto& c : v) c *= inv;
  for (auto& row : rows_) {
    const Rational c = row[p];
    if (sgn(c) != 0) axpy(row, Rational(-c), v);
  }
  auto pos = std::lower_bound(pivots_.begin(), pivots_.end(), p) - pivots_.begin();
  pivots_.insert(pivots_.begin() + pos, p);
  rows_.insert(rows_.begin() + pos, std::move(v));
  return true;
}

std::size_t rank(const std::vector<QVec>& vectors) {
  if (vectors.empty()) return 0;
  Echelon e(vectors.front().size());
  for (const auto& v : vectors) e.insert(v);
  return e.rank();
}

std::vector<std::size_t> independent_subset(const std::vector<QVec>& vectors) {
  std::vector<std::size_t> out;
  if (vectors.empty()) return out;
  Echelon e(vectors.front().size());
  for (std::size_t i = 0; i < vectors.size(); ++i)
    if (e.insert(vectors[i])) out.push_back(i);
  return out;
}

std::optional<QVec> solve_in_span(const std::vector<QVec>& columns, const QVec& target) {
  const std::size_t m = columns.size();
  const std::size_t n = target.size();
  // Augment each column with an identity tag to track combinations.
  Echelon e(n + m);
  for (std::size_t j = 0; j < m; ++j) {
    QVec row(n + m, Rational(0));
    for (std::size_t i = 0; i < n; ++i) row[i] = columns[j][i];
    row[n + j] = 1;
    e.insert(std::move(row));
  }
  QVec t(n + m, Rational(0));
  for (std::size_t i = 0; i < n; ++i) t[i] = target[i];
  QVec red = e.reduce(t);
  for (std::size_t i = 0; i < n; ++i)
    if (sgn(red[i]) != 0) return std::nullopt;
  // target - sum(c_j col_j) reduced to zero: red tail holds -c.
  QVec c(m);
  for (std::size_t j = 0; j < m; ++j) c[j] = -red[n + j];
  return c;
}

std::optional<DVec> solve_in_span(const std::vector<DVec>& columns, const DVec& target,
                                  double tol) {
  const auto m = static_cast<Eigen::Index>(columns.size());
  const auto n = static_cast<Eigen::Index>(target.size());
  if (m == 0) {
    double t = 0;
    for (double x : target) t = std::max(t, std::abs(x));
    if (t <= tol) return DVec{};
    return std::nullopt;
  }
  Eigen::MatrixXd a(n, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < n; ++i) a(i, j) = columns[j][i];
  Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(target.data(), n);
  Eigen::VectorXd x = a.completeOrthogonalDecomposition().solve(b);
  if ((a * x - b).norm() > tol * (1.0 + b.norm())) return std::nullopt;
  return DVec(x.data(), x.data() + m);
}

}  // namespace nilcc
