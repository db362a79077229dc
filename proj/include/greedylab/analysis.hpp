#pragma once

#include "greedylab/greedy.hpp"

#include <limits>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace greedylab {

/// Convergence-rate bounds checked against traces:
///   T31  RPGA, Hilbert:      e_m ≤ M m^{−1/2},                          m ≥ 1
///   T41  WRPGA, Hilbert:     e_m ≤ M (Σ_{k≤m} t_k²)^{−1/2},             m ≥ 1
///   T53  RPGA, ℓ_p:          e_m ≤ M (1 + c (m−1))^{1/q−1},             m ≥ 2
///   T61  WRPGA, ℓ_p:         e_m ≤ M (t_1^ℓ + c Σ_{k=2}^m t_k^ℓ)^{1/q−1}, m ≥ 2
/// with c = ((q−1)/q)(2γq)^{1/(1−q)} and ℓ = q/(q−1).
enum class Theorem { T31, T41, T53, T61 };

std::string_view to_string(Theorem theorem);

inline constexpr double kBoundSlack = 1e-9;

struct BoundReport {
  Theorem theorem;
  bool satisfied;
  /// min over checked m of bound_m − e_m; +inf when no step was in range.
  double margin;
  /// m attaining the margin; 0 when no step was in range.
  int worst_m;
};

/// Theorem covering an algorithm, if any.
std::optional<Theorem> applicable_theorem(Algorithm algorithm);

/// First m at which the theorem's bound is stated.
int first_bounded_step(Theorem theorem);

/// Right-hand side of the theorem at step m. `ts` is required for T41/T61.
double theorem_bound(Theorem theorem, const Geometry& geometry, double M,
                     const WeaknessSequence* ts, int m);

/// Evaluates the applicable bound at every recorded step in range.
/// `ts` defaults to the weakness sequence stored in the trace. Throws
/// std::invalid_argument when the trace was not produced from `target`
/// (geometry, dimension or ‖f‖ disagree) or no theorem covers the algorithm.
BoundReport check_bound(const RunTrace& trace, const A1Target& target,
                        const std::optional<WeaknessSequence>& ts = std::nullopt,
                        double slack = kBoundSlack);

struct RateFit {
  double slope;
  double intercept;
  double r2;
  std::pair<int, int> m_range;
};

/// Least-squares fit of log e_m against log m over records with m ≥ m_min and
/// e_m above the exact-recovery threshold. Throws InsufficientData below three
/// usable records.
RateFit fit_rate(const RunTrace& trace, int m_min = 1);

struct MTermApproximation {
  double error;
  std::vector<Index> support;
};

inline constexpr double kMaxOracleSubsets = 1e6;

/// σ_m(f, D) with an optimal support. Orthonormal dictionaries keep the m
/// largest |⟨f, φ⟩| (ties to the lowest index); otherwise every m-subset is
/// projected onto, lexicographically first optimum wins. Throws
/// ProblemTooLarge when C(K, m) exceeds kMaxOracleSubsets.
MTermApproximation best_mterm_oracle(const Element& f, const Dictionary& dict, int m);

bool is_orthonormal(const Dictionary& dict, double tol = 1e-12);

}  // namespace greedylab
