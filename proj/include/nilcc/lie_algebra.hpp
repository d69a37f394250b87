#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nilcc/rational.hpp"
#include "nilcc/tensor_algebra.hpp"

namespace nilcc {

struct Term {
  std::size_t index;
  Rational coeff;
};
using SparseVec = std::vector<Term>;

/// Default cap on the basis size of constructed algebras.
inline constexpr std::size_t kDefaultDimensionCap = 200;

/// Finite-dimensional nilpotent Lie algebra in a basis adapted to its
/// filtration: basis vectors are sorted by nondecreasing layer, layer k spans
/// the declared complement N_k, and N^k is spanned by layers >= k.
/// Structure constants are exact. Immutable after construction.
class NilpotentAlgebra {
 public:
  struct Entry {
    std::size_t i, j;
    SparseVec value;  // [b_i, b_j]
  };

  /// Builds from bracket entries; each unordered pair may be given once or in
  /// both orders (then the two must be negatives of each other).
  NilpotentAlgebra(std::vector<int> layers, const std::vector<Entry>& entries,
                   std::vector<std::string> labels = {}, std::vector<Word> hall_words = {});

  std::size_t dim() const { return layers_.size(); }
  /// Largest declared layer (the step d for algebras with N^d != 0).
  int step() const { return step_; }
  int layer(std::size_t i) const { return layers_[i]; }
  const std::vector<int>& layers() const { return layers_; }
  const std::string& label(std::size_t i) const { return labels_[i]; }
  const std::vector<std::string>& labels() const { return labels_; }
  /// Basis indices of layer k (empty if none).
  std::vector<std::size_t> layer_indices(int k) const;
  /// Number of layer-1 basis vectors.
  std::size_t generator_count() const { return layer_indices(1).size(); }
  /// Lyndon words of the Hall basis for free algebras, empty otherwise.
  const std::vector<Word>& hall_words() const { return hall_words_; }
  bool is_free() const { return !hall_words_.empty(); }

  const SparseVec& structure(std::size_t i, std::size_t j) const { return table_[i * dim() + j]; }
  const std::vector<std::pair<std::size_t, double>>& structure_d(std::size_t i, std::size_t j) const {
    return table_d_[i * dim() + j];
  }
  std::vector<Entry> entries() const;

  /// True if every bracket of layers k, l lies in layer k + l.
  bool is_graded() const;

  template <class S>
  void check(const Vec<S>& x) const {
    if (x.size() != dim()) throw Error("algebra_mismatch", "element dimension does not match algebra");
  }

 private:
  std::vector<int> layers_;
  int step_ = 0;
  std::vector<std::string> labels_;
  std::vector<Word> hall_words_;
  std::vector<SparseVec> table_;
  std::vector<std::vector<std::pair<std::size_t, double>>> table_d_;
};

template <class S>
Vec<S> bracket(const NilpotentAlgebra& a, const Vec<S>& x, const Vec<S>& y);

/// Layer components x_1, ..., x_d (index k-1 holds layer k).
template <class S>
std::vector<Vec<S>> decompose(const NilpotentAlgebra& a, const Vec<S>& x);

/// Coordinates of x restricted to layer k (other coordinates zeroed).
template <class S>
Vec<S> layer_part(const NilpotentAlgebra& a, const Vec<S>& x, int k);

/// Free nilpotent Lie algebra on l generators of step d in the Lyndon (Hall)
/// basis, ordered by length then lexicographically.
NilpotentAlgebra build_free_nilpotent(int generators, int step,
                                      std::size_t dimension_cap = kDefaultDimensionCap);

/// Hall coordinates of a Lie polynomial given as a tensor-algebra element.
/// Returns nullopt if p is not in the span of the free algebra's Hall basis.
std::optional<QVec> hall_coordinates(const NilpotentAlgebra& free_algebra, const AssocPoly& p);

/// Tensor-algebra image of a Hall-coordinate element of a free algebra.
AssocPoly tensor_image(const NilpotentAlgebra& free_algebra, const QVec& x);

/// Linear map between coordinate spaces, stored row-wise.
struct LinearMap {
  std::vector<QVec> rows;
  std::size_t out_dim() const { return rows.size(); }
  std::size_t in_dim() const { return rows.empty() ? 0 : rows.front().size(); }
  template <class S>
  Vec<S> apply(const Vec<S>& x) const;
};

struct QuotientResult {
  NilpotentAlgebra algebra;
  LinearMap projection;               // free coordinates -> quotient coordinates
  std::vector<std::size_t> kept;      // free basis index of each quotient basis vector
  std::vector<QVec> ideal_basis;      // echelon basis of the ideal
};

/// Quotient by the ideal generated by the relations. The quotient basis is
/// the image of the free basis vectors that are not pivots of the ideal's
/// echelon form, so it stays adapted to the image filtration.
QuotientResult quotient(const NilpotentAlgebra& algebra, const std::vector<QVec>& relations);

/// Algebra whose bracket is the layer-(k+l) projection of the bracket of
/// layers k and l (the associated graded algebra for the declared complements).
NilpotentAlgebra asymptotic_algebra(const NilpotentAlgebra& a);

struct FreeLift {
  NilpotentAlgebra free_algebra;
  LinearMap projection;  // free -> a, a homomorphism identifying layer 1
};

/// Presents a as a homomorphic image of free(l, d), l = number of layer-1
/// basis vectors, d = step.
FreeLift free_lift(const NilpotentAlgebra& a);

/// Basis (echelon rows) of the derived algebra [N, N].
std::vector<QVec> derived_algebra_basis(const NilpotentAlgebra& a);

struct VerifyReport {
  bool ok = true;
  std::vector<std::string> violations;
  /// First Jacobi failure (i, j, k) if any.
  std::optional<std::array<std::size_t, 3>> jacobi_witness;
};

VerifyReport verify_algebra(const NilpotentAlgebra& a);

}  // namespace nilcc
