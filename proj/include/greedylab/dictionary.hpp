#pragma once

#include "greedylab/spaces.hpp"

#include <cstdint>
#include <string>

namespace greedylab {

/// Finite dictionary: K unit-norm atoms stored as the columns of an n×K matrix.
class Dictionary {
 public:
  /// Validates that every column has unit norm in `geometry` to 1e-12.
  Dictionary(Geometry geometry, Matrix atoms, std::string label);

  const Geometry& geometry() const { return geometry_; }
  const Matrix& atoms() const { return atoms_; }
  const std::string& label() const { return label_; }
  Index size() const { return atoms_.cols(); }
  Index dim() const { return atoms_.rows(); }
  auto atom(Index k) const { return atoms_.col(k); }
  Element atom_element(Index k) const { return Element(geometry_, atoms_.col(k)); }

  /// Numerical rank of the atom matrix.
  Index rank() const;
  bool spans() const { return rank() == dim(); }

 private:
  Geometry geometry_;
  Matrix atoms_;
  std::string label_;
};

/// Standard basis e_1..e_n.
Dictionary build_orthonormal(const Geometry& geometry);

/// K atoms uniform on the unit sphere of `geometry`. With `require_spanning`
/// (the default) K ≥ n is enforced, and while the first atoms have not yet
/// reached rank n an atom that adds no rank is redrawn (bounded retries).
Dictionary build_random_unit(const Geometry& geometry, Index K, std::uint64_t seed,
                             bool require_spanning = true);

/// Standard basis followed by count − 1 seeded random orthogonal bases, each
/// atom rescaled to unit norm in `geometry`. K = count·n.
Dictionary build_union_bases(const Geometry& geometry, Index count, std::uint64_t seed);

struct SelectionResult {
  Index index;
  /// ⟨r, φ⟩ (Hilbert) or F_r(φ) (ℓ_p) at the chosen atom, signed.
  double dual_value;
  double sup_dual;
};

/// Per-atom dual values of `residual`: Dᵀr in Hilbert geometry, Dᵀw with w the
/// norming-functional representer of r otherwise.
Vector dual_values(const Eigen::Ref<const Vector>& residual, const Dictionary& dict);

/// Weak greedy selection: the first atom (in index order) whose |dual| is at
/// least t·sup. With t = 1 this is the argmax with ties to the lowest index.
///
/// Throws std::invalid_argument for a zero residual or t ∉ (0, 1], and
/// NonSpanningDictionary when every dual vanishes at a nonzero residual.
SelectionResult select(const Element& residual, const Dictionary& dict, double t = 1.0);
SelectionResult select(const Eigen::Ref<const Vector>& residual, const Dictionary& dict,
                       double t = 1.0);

}  // namespace greedylab
