#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>

namespace greedylab {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class SpaceKind { Hilbert, Lp };

/// Modulus-of-smoothness parameters: ρ(u) ≤ gamma·u^q.
struct Smoothness {
  double gamma;
  double q;
};

/// (1/p, p) for 1 < p ≤ 2 and ((p−1)/2, 2) for p ≥ 2.
Smoothness smoothness_params(double p);

/// Norm structure of ℝⁿ: Euclidean (with inner product) or ℓ_p.
///
/// Hilbert geometry carries (γ, q) = (1/2, 2), so formulas written for the
/// smooth Banach case specialize without branching. An ℓ_p geometry with
/// p = 2 is a distinct object: same norm, but algorithms take the Banach path.
class Geometry {
 public:
  static Geometry hilbert(Index n);
  static Geometry lp(double p, Index n);

  SpaceKind kind() const { return kind_; }
  bool is_hilbert() const { return kind_ == SpaceKind::Hilbert; }
  /// 2 for Hilbert geometry.
  double p() const { return p_; }
  double gamma() const { return smooth_.gamma; }
  double q() const { return smooth_.q; }
  Index dim() const { return n_; }

  /// Same norm structure, ignoring dimension.
  bool same_space(const Geometry& other) const {
    return kind_ == other.kind_ && p_ == other.p_;
  }
  bool operator==(const Geometry& other) const {
    return same_space(other) && n_ == other.n_;
  }

 private:
  Geometry(SpaceKind kind, double p, Smoothness smooth, Index n)
      : kind_(kind), p_(p), smooth_(smooth), n_(n) {}

  SpaceKind kind_;
  double p_;
  Smoothness smooth_;
  Index n_;
};

/// A point of the ambient space. Immutable; coordinates are finite and their
/// length equals the geometry's dimension.
class Element {
 public:
  Element(Geometry geometry, Vector coords);
  static Element zero(const Geometry& geometry);

  const Vector& coords() const { return coords_; }
  const Geometry& geometry() const { return geometry_; }
  Index dim() const { return coords_.size(); }
  bool is_zero() const { return coords_.isZero(0.0); }

 private:
  Geometry geometry_;
  Vector coords_;
};

/// Σ x_i y_i. Both elements must live in the same Hilbert geometry.
double inner(const Element& x, const Element& y);

double norm(const Element& x);
double norm(const Geometry& geometry, const Eigen::Ref<const Vector>& x);

/// F_f(g), the norming functional of f applied to g. Throws
/// UndefinedFunctional for f = 0.
double norming_functional(const Element& f, const Element& g);

/// Vector w with F_f(g) = w·g for every g (coordinate form of F_f).
Vector norming_representer(const Geometry& geometry, const Eigen::Ref<const Vector>& f);

/// s* = argmin_s ‖f − s·h‖. Exact in Hilbert geometry; within `tol` of s*
/// otherwise.
double line_search_scale(const Element& f, const Element& h, double tol = 1e-12);
double line_search_scale(const Geometry& geometry, const Eigen::Ref<const Vector>& f,
                         const Eigen::Ref<const Vector>& h, double tol = 1e-12);

/// Right-hand side of the recurrence bound
///   a_m ≤ max{1, ℓ^{−1/ℓ}} r^{1/ℓ} (r B^{−ℓ} + Σ_{k=2}^m r_k)^{−1/ℓ}
/// for sequences with a_1 ≤ B and a_{m+1} ≤ a_m (1 − (r_{m+1}/r) a_m^ℓ).
/// `r_ks[0]` is r_2, so r_ks must hold at least m − 1 values.
double lemma_sequence_bound(double B, double r, double ell, std::span<const double> r_ks,
                            int m);

/// ½(‖f + u g‖ + ‖f − u g‖) − 1 for one pair.
double modulus_objective(const Geometry& geometry, const Eigen::Ref<const Vector>& f,
                         const Eigen::Ref<const Vector>& g, double u);

/// Monte-Carlo lower estimate of the modulus of smoothness ρ(u): the maximum of
/// modulus_objective over `samples` random pairs on the unit sphere.
double modulus_estimate(const Geometry& geometry, double u, int samples, std::uint64_t seed);

/// Uniform direction on the unit sphere of the geometry (Gaussian draw,
/// normalized in ℓ₂, then in the geometry's norm).
template <typename Urbg>
Vector random_unit_vector(const Geometry& geometry, Urbg& rng);

}  // namespace greedylab

#include "greedylab/detail/spaces_impl.hpp"
