#pragma once

#include "greedylab/dictionary.hpp"
#include "greedylab/spaces.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

namespace greedylab {

/// Relative threshold below which e_m counts as exact recovery of f.
inline constexpr double kExactRecoveryRel = 1e-13;

enum class Algorithm {
  RpgaHilbert,
  WrpgaHilbert,
  RpgaBanach,
  WrpgaBanach,
  PgaHilbert,
  OgaHilbert,
  RgaClassic,
  RgaOptimized,
};

std::string_view to_string(Algorithm algorithm);
std::optional<Algorithm> parse_algorithm(std::string_view name);

/// Weakness parameters t_1, t_2, ... in (0, 1].
class WeaknessSequence {
 public:
  enum class Kind { Constant, PowerLaw, Explicit };

  static WeaknessSequence constant(double t);
  /// t_k = c·k^{−alpha}; needs 0 < c ≤ 1 and alpha ≥ 0.
  static WeaknessSequence power_law(double c, double alpha);
  /// The listed values, repeated cyclically past the end of the list.
  static WeaknessSequence explicit_values(std::vector<double> values);

  /// t_k for k ≥ 1.
  double operator()(int k) const;

  Kind kind() const { return kind_; }
  double c() const { return c_; }
  double alpha() const { return alpha_; }
  const std::vector<double>& values() const { return values_; }

  bool operator==(const WeaknessSequence&) const = default;

 private:
  WeaknessSequence(Kind kind, double c, double alpha, std::vector<double> values)
      : kind_(kind), c_(c), alpha_(alpha), values_(std::move(values)) {}

  Kind kind_;
  double c_;
  double alpha_;
  std::vector<double> values_;
};

/// f = Σ c_φ φ with certificate M = Σ|c_φ| ≥ |f|_{A1(D)}.
struct A1Target {
  Element f;
  std::map<Index, double> coeffs;
  double M;
};

/// `sparsity` distinct seeded atoms with random signs and magnitudes scaled so
/// that Σ|c| = M.
A1Target make_a1_target(const Dictionary& dict, Index sparsity, double M, std::uint64_t seed);
/// Target from explicit coefficients; M is taken as Σ|c|.
A1Target make_a1_target(const Dictionary& dict, const std::map<Index, double>& coeffs);

/// One iteration. `lambda` is the coefficient put on the new atom and `s` the
/// factor applied to the previous iterate's contribution, so that
/// f_m = s·(f_{m−1} + lambda·φ_m) for the rescaled family, s = 1 for PGA/OGA,
/// and f_m = s·f_{m−1} + lambda·φ_m for the RGA baselines (s = 1 − a_m).
/// OGA records the new atom's coefficient in the full projection as lambda.
struct IterationRecord {
  int m;
  Index atom_index;
  double dual_value;
  double lambda;
  double s;
  double error;
  double sup_dual;

  bool operator==(const IterationRecord&) const = default;
};

enum class StopReason { MaxIter, ExactRecovery, Tolerance, ZeroSupDual };

std::string_view to_string(StopReason reason);
std::optional<StopReason> parse_stop_reason(std::string_view name);

struct RunTrace {
  Algorithm algorithm;
  Geometry geometry;
  std::vector<IterationRecord> records;
  Element final_approx;
  StopReason stop_reason;
  /// ‖f‖ of the target the run approximated (e_0).
  double target_norm;
  std::optional<WeaknessSequence> weakness;
};

/// s_m for ĥ_m: the best scaling of f along h, and 0 when h = 0 (the
/// projection onto span{0}).
double rescale_factor(const Geometry& geometry, const Eigen::Ref<const Vector>& f,
                      const Eigen::Ref<const Vector>& h, double ls_tol = 1e-12);

/// Called after every iteration with the record and the new iterate f_m.
using StepObserver = std::function<void(const IterationRecord&, const Vector& approx)>;

RunTrace rpga_hilbert(const Element& f, const Dictionary& dict, int m_max, double eps = 0.0,
                      const StepObserver& observer = {});
RunTrace wrpga_hilbert(const Element& f, const Dictionary& dict, const WeaknessSequence& ts,
                       int m_max, double eps = 0.0, const StepObserver& observer = {});
RunTrace rpga_banach(const Element& f, const Dictionary& dict, int m_max, double eps = 0.0,
                     double ls_tol = 1e-12, const StepObserver& observer = {});
RunTrace wrpga_banach(const Element& f, const Dictionary& dict, const WeaknessSequence& ts,
                      int m_max, double eps = 0.0, double ls_tol = 1e-12,
                      const StepObserver& observer = {});
RunTrace pga_hilbert(const Element& f, const Dictionary& dict, int m_max, double eps = 0.0,
                     const StepObserver& observer = {});
RunTrace oga_hilbert(const Element& f, const Dictionary& dict, int m_max, double eps = 0.0,
                     const StepObserver& observer = {});

enum class RgaVariant { Classic, Optimized };
RunTrace rga_hilbert(const Element& f, const Dictionary& dict, int m_max, RgaVariant variant,
                     double eps = 0.0, const StepObserver& observer = {});

}  // namespace greedylab
