#include "greedylab/greedy.hpp"

#include "greedylab/errors.hpp"
#include "greedylab/random.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

namespace greedylab {

namespace {

constexpr std::array<std::pair<Algorithm, std::string_view>, 8> kAlgorithmNames{{
    {Algorithm::RpgaHilbert, "rpga_hilbert"},
    {Algorithm::WrpgaHilbert, "wrpga_hilbert"},
    {Algorithm::RpgaBanach, "rpga_banach"},
    {Algorithm::WrpgaBanach, "wrpga_banach"},
    {Algorithm::PgaHilbert, "pga_hilbert"},
    {Algorithm::OgaHilbert, "oga_hilbert"},
    {Algorithm::RgaClassic, "rga_classic"},
    {Algorithm::RgaOptimized, "rga_optimized"},
}};

constexpr std::array<std::pair<StopReason, std::string_view>, 4> kStopNames{{
    {StopReason::MaxIter, "max_iter"},
    {StopReason::ExactRecovery, "exact_recovery"},
    {StopReason::Tolerance, "tolerance"},
    {StopReason::ZeroSupDual, "zero_sup_dual"},
}};

// Result of one algorithm step: the record without m/error, or nothing when
// the dictionary cannot decrease a nonzero residual.
using StepResult = std::optional<IterationRecord>;

class RunLoop {
 public:
  RunLoop(Algorithm algorithm, const Element& f, const Dictionary& dict, int m_max, double eps,
          bool needs_hilbert)
      : algorithm_(algorithm), f_(f), m_max_(m_max), eps_(eps) {
    if (!(f.geometry() == dict.geometry())) {
      throw std::invalid_argument(std::string(to_string(algorithm)) +
                                  ": target and dictionary live in different spaces");
    }
    if (needs_hilbert != f.geometry().is_hilbert()) {
      throw std::invalid_argument(std::string(to_string(algorithm)) +
                                  (needs_hilbert ? ": requires Hilbert geometry"
                                                 : ": requires an l_p geometry"));
    }
    if (m_max < 1) throw std::invalid_argument("m_max must be >= 1");
    if (!(eps >= 0.0)) throw std::invalid_argument("eps must be >= 0");
  }

  template <typename Step>
  RunTrace run(Step&& step, const StepObserver& observer) {
    const Geometry& geo = f_.geometry();
    const Vector& f = f_.coords();
    const double fnorm = norm(f_);
    const double exact = kExactRecoveryRel * fnorm;

    Vector approx = Vector::Zero(f.size());
    std::vector<IterationRecord> records;
    records.reserve(static_cast<std::size_t>(m_max_));
    StopReason reason = StopReason::MaxIter;
    double error = fnorm;

    if (error <= exact) {
      reason = StopReason::ExactRecovery;
    } else {
      for (int m = 1; m <= m_max_; ++m) {
        const Vector residual = f - approx;
        StepResult rec = step(m, residual, approx);
        if (!rec) {
          reason = StopReason::ZeroSupDual;
          break;
        }
        error = norm(geo, f - approx);
        rec->m = m;
        rec->error = error;
        records.push_back(*rec);
        if (observer) observer(*rec, approx);
        if (error <= exact) {
          reason = StopReason::ExactRecovery;
          break;
        }
        if (error <= eps_) {
          reason = StopReason::Tolerance;
          break;
        }
      }
    }
    return RunTrace{algorithm_, geo,    std::move(records), Element(geo, std::move(approx)),
                    reason,     fnorm, std::nullopt};
  }

 private:
  Algorithm algorithm_;
  const Element& f_;
  int m_max_;
  double eps_;
};

std::optional<SelectionResult> try_select(const Vector& residual, const Dictionary& dict,
                                          double t) {
  try {
    return select(residual, dict, t);
  } catch (const NonSpanningDictionary&) {
    return std::nullopt;
  }
}

// One step of the rescaled family: f_m = s_m (f_{m−1} + λ_m φ_m), s_m the best
// scaling of f along ĥ_m. `rescale` = false gives PGA.
template <typename LambdaRule>
StepResult rescaled_step(const Vector& f, const Dictionary& dict, const Vector& residual,
                         Vector& approx, double t, bool rescale, double ls_tol,
                         LambdaRule&& lambda_rule) {
  const auto sel = try_select(residual, dict, t);
  if (!sel) return std::nullopt;
  const double lambda = lambda_rule(*sel, residual);
  Vector h = approx + lambda * dict.atom(sel->index);
  double s = 1.0;
  if (rescale) s = rescale_factor(dict.geometry(), f, h, ls_tol);
  approx = s * h;
  return IterationRecord{0, sel->index, sel->dual_value, lambda, s, 0.0, sel->sup_dual};
}

RunTrace hilbert_rescaled(Algorithm algorithm, const Element& f, const Dictionary& dict,
                          const WeaknessSequence& ts, int m_max, double eps, bool rescale,
                          const StepObserver& observer) {
  RunLoop loop(algorithm, f, dict, m_max, eps, true);
  const Vector& fv = f.coords();
  return loop.run(
      [&](int m, const Vector& residual, Vector& approx) {
        return rescaled_step(fv, dict, residual, approx, ts(m), rescale, 0.0,
                             [](const SelectionResult& sel, const Vector&) {
                               return sel.dual_value;
                             });
      },
      observer);
}

RunTrace banach_rescaled(Algorithm algorithm, const Element& f, const Dictionary& dict,
                         const WeaknessSequence& ts, int m_max, double eps, double ls_tol,
                         const StepObserver& observer) {
  RunLoop loop(algorithm, f, dict, m_max, eps, false);
  if (!(ls_tol > 0.0)) throw std::invalid_argument("ls_tol must be positive");
  const Geometry& geo = f.geometry();
  const double q = geo.q();
  const double step_const = std::pow(2.0 * geo.gamma() * q, 1.0 / (1.0 - q));
  const Vector& fv = f.coords();
  return loop.run(
      [&](int m, const Vector& residual, Vector& approx) {
        return rescaled_step(
            fv, dict, residual, approx, ts(m), true, ls_tol,
            [&](const SelectionResult& sel, const Vector& r) {
              // λ_m = sign(F) ‖r‖ (2γq)^{1/(1−q)} |F|^{1/(q−1)}
              const double F = sel.dual_value;
              const double sgn = (F > 0.0) - (F < 0.0);
              return sgn * norm(geo, r) * step_const * std::pow(std::abs(F), 1.0 / (q - 1.0));
            });
      },
      observer);
}

}  // namespace

double rescale_factor(const Geometry& geometry, const Eigen::Ref<const Vector>& f,
                      const Eigen::Ref<const Vector>& h, double ls_tol) {
  if (h.isZero(0.0)) return 0.0;
  return line_search_scale(geometry, f, h, ls_tol);
}

std::string_view to_string(Algorithm algorithm) {
  for (const auto& [a, name] : kAlgorithmNames)
    if (a == algorithm) return name;
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  for (const auto& [a, n] : kAlgorithmNames)
    if (n == name) return a;
  return std::nullopt;
}

std::string_view to_string(StopReason reason) {
  for (const auto& [r, name] : kStopNames)
    if (r == reason) return name;
  return "unknown";
}

std::optional<StopReason> parse_stop_reason(std::string_view name) {
  for (const auto& [r, n] : kStopNames)
    if (n == name) return r;
  return std::nullopt;
}

WeaknessSequence WeaknessSequence::constant(double t) {
  if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("weakness: t must lie in (0, 1]");
  return WeaknessSequence(Kind::Constant, t, 0.0, {});
}

WeaknessSequence WeaknessSequence::power_law(double c, double alpha) {
  if (!(c > 0.0 && c <= 1.0)) throw std::invalid_argument("weakness: c must lie in (0, 1]");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("weakness: alpha must be finite and >= 0");
  }
  return WeaknessSequence(Kind::PowerLaw, c, alpha, {});
}

WeaknessSequence WeaknessSequence::explicit_values(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("weakness: explicit list is empty");
  for (double t : values) {
    if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("weakness: t must lie in (0, 1]");
  }
  return WeaknessSequence(Kind::Explicit, 0.0, 0.0, std::move(values));
}

double WeaknessSequence::operator()(int k) const {
  if (k < 1) throw std::invalid_argument("weakness: index starts at 1");
  switch (kind_) {
    case Kind::Constant:
      return c_;
    case Kind::PowerLaw:
      return c_ * std::pow(static_cast<double>(k), -alpha_);
    case Kind::Explicit:
      return values_[static_cast<std::size_t>(k - 1) % values_.size()];
  }
  return 1.0;
}

A1Target make_a1_target(const Dictionary& dict, Index sparsity, double M, std::uint64_t seed) {
  if (sparsity < 1 || sparsity > dict.size()) {
    throw std::invalid_argument("make_a1_target: sparsity must lie in [1, K]");
  }
  if (!(M > 0.0) || !std::isfinite(M)) throw std::invalid_argument("make_a1_target: M must be > 0");
  Rng rng(seed);
  std::vector<Index> order(static_cast<std::size_t>(dict.size()));
  std::iota(order.begin(), order.end(), Index{0});
  for (Index i = 0; i < sparsity; ++i) {
    std::uniform_int_distribution<Index> pick(i, dict.size() - 1);
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick(rng))]);
  }
  std::uniform_real_distribution<double> magnitude(0.1, 1.0);
  std::bernoulli_distribution negative(0.5);
  std::vector<double> w(static_cast<std::size_t>(sparsity));
  for (auto& v : w) v = magnitude(rng);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);

  std::map<Index, double> coeffs;
  for (Index i = 0; i < sparsity; ++i) {
    const double c = M * w[static_cast<std::size_t>(i)] / total;
    coeffs[order[static_cast<std::size_t>(i)]] = negative(rng) ? -c : c;
  }
  A1Target target = make_a1_target(dict, coeffs);
  target.M = M;
  return target;
}

A1Target make_a1_target(const Dictionary& dict, const std::map<Index, double>& coeffs) {
  if (coeffs.empty()) throw std::invalid_argument("make_a1_target: no coefficients");
  Vector f = Vector::Zero(dict.dim());
  double M = 0.0;
  for (const auto& [k, c] : coeffs) {
    if (k < 0 || k >= dict.size()) throw std::invalid_argument("make_a1_target: atom index out of range");
    f += c * dict.atom(k);
    M += std::abs(c);
  }
  return A1Target{Element(dict.geometry(), std::move(f)), coeffs, M};
}

RunTrace rpga_hilbert(const Element& f, const Dictionary& dict, int m_max, double eps,
                      const StepObserver& observer) {
  return hilbert_rescaled(Algorithm::RpgaHilbert, f, dict, WeaknessSequence::constant(1.0), m_max,
                          eps, true, observer);
}

RunTrace wrpga_hilbert(const Element& f, const Dictionary& dict, const WeaknessSequence& ts,
                       int m_max, double eps, const StepObserver& observer) {
  RunTrace trace =
      hilbert_rescaled(Algorithm::WrpgaHilbert, f, dict, ts, m_max, eps, true, observer);
  trace.weakness = ts;
  return trace;
}

RunTrace pga_hilbert(const Element& f, const Dictionary& dict, int m_max, double eps,
                     const StepObserver& observer) {
  return hilbert_rescaled(Algorithm::PgaHilbert, f, dict, WeaknessSequence::constant(1.0), m_max,
                          eps, false, observer);
}

RunTrace rpga_banach(const Element& f, const Dictionary& dict, int m_max, double eps,
                     double ls_tol, const StepObserver& observer) {
  return banach_rescaled(Algorithm::RpgaBanach, f, dict, WeaknessSequence::constant(1.0), m_max,
                         eps, ls_tol, observer);
}

RunTrace wrpga_banach(const Element& f, const Dictionary& dict, const WeaknessSequence& ts,
                      int m_max, double eps, double ls_tol, const StepObserver& observer) {
  RunTrace trace =
      banach_rescaled(Algorithm::WrpgaBanach, f, dict, ts, m_max, eps, ls_tol, observer);
  trace.weakness = ts;
  return trace;
}

RunTrace oga_hilbert(const Element& f, const Dictionary& dict, int m_max, double eps,
                     const StepObserver& observer) {
  RunLoop loop(Algorithm::OgaHilbert, f, dict, m_max, eps, true);
  const Vector& fv = f.coords();
  std::vector<Index> support;
  return loop.run(
      [&](int, const Vector& residual, Vector& approx) -> StepResult {
        const auto sel = try_select(residual, dict, 1.0);
        if (!sel) return std::nullopt;
        auto pos = std::find(support.begin(), support.end(), sel->index);
        if (pos == support.end()) {
          support.push_back(sel->index);
          pos = support.end() - 1;
        }
        const Index k = static_cast<Index>(support.size());
        Matrix A(dict.dim(), k);
        for (Index j = 0; j < k; ++j) A.col(j) = dict.atom(support[static_cast<std::size_t>(j)]);
        Matrix gram = A.transpose() * A;
        const Vector rhs = A.transpose() * fv;
        Eigen::LDLT<Matrix> ldlt(gram);
        const Vector d = ldlt.vectorD();
        const double dmax = d.cwiseAbs().maxCoeff();
        if (ldlt.info() != Eigen::Success || d.minCoeff() <= 1e-12 * dmax) {
          gram.diagonal().array() += 1e-12;
          ldlt.compute(gram);
        }
        const Vector coef = ldlt.solve(rhs);
        approx = A * coef;
        return IterationRecord{0,   sel->index, sel->dual_value, coef[pos - support.begin()],
                               1.0, 0.0,        sel->sup_dual};
      },
      observer);
}

RunTrace rga_hilbert(const Element& f, const Dictionary& dict, int m_max, RgaVariant variant,
                     double eps, const StepObserver& observer) {
  const Algorithm algorithm =
      variant == RgaVariant::Classic ? Algorithm::RgaClassic : Algorithm::RgaOptimized;
  RunLoop loop(algorithm, f, dict, m_max, eps, true);

  if (variant == RgaVariant::Classic) {
    return loop.run(
        [&](int m, const Vector& residual, Vector& approx) -> StepResult {
          const auto sel = try_select(residual, dict, 1.0);
          if (!sel) return std::nullopt;
          if (m == 1) {
            // f_1 = ⟨f, φ_1⟩ φ_1, shared with the rescaled family.
            approx = sel->dual_value * dict.atom(sel->index);
            return IterationRecord{0, sel->index, sel->dual_value, sel->dual_value, 1.0, 0.0,
                                   sel->sup_dual};
          }
          // Symmetric dictionary: the selected direction is sign(dual)·φ.
          const double a = 1.0 / m;
          const double signed_a = sel->dual_value > 0.0 ? a : -a;
          approx = (1.0 - a) * approx + signed_a * dict.atom(sel->index);
          return IterationRecord{0, sel->index, sel->dual_value, signed_a, 1.0 - a, 0.0,
                                 sel->sup_dual};
        },
        observer);
  }

  return loop.run(
      [&](int, const Vector& residual, Vector& approx) -> StepResult {
        // min over a ∈ [0,1], ψ ∈ ±D of ‖r − a(ψ − g)‖² with r = f − g.
        const Vector r_dots = dict.atoms().transpose() * residual;
        const Vector g_dots = dict.atoms().transpose() * approx;
        const double sup = r_dots.cwiseAbs().maxCoeff();
        if (sup == 0.0) return std::nullopt;
        const double r_g = residual.dot(approx);
        const double g_g = approx.squaredNorm();
        const double r_r = residual.squaredNorm();

        double best_err2 = r_r;
        Index best_k = 0;
        double best_a = 0.0;
        double best_sigma = 1.0;
        bool found = false;
        for (Index k = 0; k < dict.size(); ++k) {
          for (const double sigma : {1.0, -1.0}) {
            const double rd = sigma * r_dots[k] - r_g;
            const double dd = 1.0 - 2.0 * sigma * g_dots[k] + g_g;
            const double a = dd > 0.0 ? std::clamp(rd / dd, 0.0, 1.0) : 0.0;
            const double err2 = r_r - 2.0 * a * rd + a * a * dd;
            if (!found || err2 < best_err2) {
              best_err2 = err2;
              best_k = k;
              best_a = a;
              best_sigma = sigma;
              found = true;
            }
          }
        }
        approx = (1.0 - best_a) * approx + (best_sigma * best_a) * dict.atom(best_k);
        return IterationRecord{0,   best_k, r_dots[best_k], best_sigma * best_a,
                               1.0 - best_a, 0.0,  sup};
      },
      observer);
}

}  // namespace greedylab
