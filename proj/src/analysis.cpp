#include "greedylab/analysis.hpp"

#include "greedylab/errors.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace greedylab {

std::string_view to_string(Theorem theorem) {
  switch (theorem) {
    case Theorem::T31:
      return "T31";
    case Theorem::T41:
      return "T41";
    case Theorem::T53:
      return "T53";
    case Theorem::T61:
      return "T61";
  }
  return "unknown";
}

std::optional<Theorem> applicable_theorem(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::RpgaHilbert:
      return Theorem::T31;
    case Algorithm::WrpgaHilbert:
      return Theorem::T41;
    case Algorithm::RpgaBanach:
      return Theorem::T53;
    case Algorithm::WrpgaBanach:
      return Theorem::T61;
    default:
      return std::nullopt;
  }
}

int first_bounded_step(Theorem theorem) {
  return (theorem == Theorem::T53 || theorem == Theorem::T61) ? 2 : 1;
}

double theorem_bound(Theorem theorem, const Geometry& geometry, double M,
                     const WeaknessSequence* ts, int m) {
  if (m < 1) throw std::invalid_argument("theorem_bound: m must be >= 1");
  if ((theorem == Theorem::T41 || theorem == Theorem::T61) && ts == nullptr) {
    throw std::invalid_argument("theorem_bound: weak bound needs a weakness sequence");
  }
  const double q = geometry.q();
  const double c = (q - 1.0) / q * std::pow(2.0 * geometry.gamma() * q, 1.0 / (1.0 - q));
  switch (theorem) {
    case Theorem::T31:
      return M / std::sqrt(static_cast<double>(m));
    case Theorem::T41: {
      double sum = 0.0;
      for (int k = 1; k <= m; ++k) sum += (*ts)(k) * (*ts)(k);
      return M / std::sqrt(sum);
    }
    case Theorem::T53:
      return M * std::pow(1.0 + c * (m - 1), 1.0 / q - 1.0);
    case Theorem::T61: {
      const double ell = q / (q - 1.0);
      double sum = 0.0;
      for (int k = 2; k <= m; ++k) sum += std::pow((*ts)(k), ell);
      return M * std::pow(std::pow((*ts)(1), ell) + c * sum, 1.0 / q - 1.0);
    }
  }
  return 0.0;
}

BoundReport check_bound(const RunTrace& trace, const A1Target& target,
                        const std::optional<WeaknessSequence>& ts, double slack) {
  const Element& f = target.f;
  if (!trace.geometry.same_space(f.geometry()) || trace.final_approx.dim() != f.dim()) {
    throw std::invalid_argument("check_bound: trace and target live in different spaces");
  }
  const double fnorm = norm(f);
  // Traces without a recorded ‖f‖ skip this consistency check.
  if (!std::isnan(trace.target_norm) &&
      std::abs(trace.target_norm - fnorm) > 1e-12 * std::max(1.0, fnorm)) {
    throw std::invalid_argument("check_bound: trace was produced from a different target");
  }
  const auto theorem = applicable_theorem(trace.algorithm);
  if (!theorem) {
    throw std::invalid_argument("check_bound: no rate theorem covers " +
                                std::string(to_string(trace.algorithm)));
  }
  const std::optional<WeaknessSequence>& weak = ts ? ts : trace.weakness;
  const bool is_weak = *theorem == Theorem::T41 || *theorem == Theorem::T61;
  if (is_weak && !weak) throw std::invalid_argument("check_bound: weakness sequence missing");

  BoundReport report{*theorem, true, std::numeric_limits<double>::infinity(), 0};
  const int first = first_bounded_step(*theorem);
  for (const IterationRecord& rec : trace.records) {
    if (rec.m < first) continue;
    const double bound =
        theorem_bound(*theorem, trace.geometry, target.M, weak ? &*weak : nullptr, rec.m);
    const double margin = bound - rec.error;
    if (margin < report.margin) {
      report.margin = margin;
      report.worst_m = rec.m;
    }
  }
  report.satisfied = report.margin >= -slack;
  return report;
}

RateFit fit_rate(const RunTrace& trace, int m_min) {
  const double floor =
      std::isnan(trace.target_norm) ? 0.0 : kExactRecoveryRel * trace.target_norm;
  std::vector<double> xs;
  std::vector<double> ys;
  int lo = 0;
  int hi = 0;
  for (const IterationRecord& rec : trace.records) {
    if (rec.m < m_min || !(rec.error > floor)) continue;
    if (xs.empty()) lo = rec.m;
    hi = rec.m;
    xs.push_back(std::log(static_cast<double>(rec.m)));
    ys.push_back(std::log(rec.error));
  }
  if (xs.size() < 3) {
    throw InsufficientData("fit_rate: " + std::to_string(xs.size()) +
                           " usable records with m >= " + std::to_string(m_min) + ", need 3");
  }
  const auto n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (intercept + slope * xs[i]);
    ss_res += r * r;
  }
  // A flat series is fitted exactly by the zero-slope line.
  const double r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return RateFit{slope, intercept, r2, {lo, hi}};
}

bool is_orthonormal(const Dictionary& dict, double tol) {
  if (!dict.geometry().is_hilbert() || dict.size() > dict.dim()) return false;
  const Matrix gram = dict.atoms().transpose() * dict.atoms();
  return (gram - Matrix::Identity(dict.size(), dict.size())).cwiseAbs().maxCoeff() <= tol;
}

namespace {

double binomial(Index n, Index k) {
  k = std::min(k, n - k);
  double result = 1.0;
  for (Index i = 1; i <= k; ++i) result = result * static_cast<double>(n - k + i) / i;
  return result;
}

double projection_error(const Vector& f, const Matrix& atoms) {
  const Vector coef = atoms.colPivHouseholderQr().solve(f);
  return (f - atoms * coef).norm();
}

}  // namespace

MTermApproximation best_mterm_oracle(const Element& f, const Dictionary& dict, int m) {
  if (!f.geometry().is_hilbert() || !(f.geometry() == dict.geometry())) {
    throw std::invalid_argument("best_mterm_oracle: needs a Hilbert target and dictionary");
  }
  if (m < 0) throw std::invalid_argument("best_mterm_oracle: m must be >= 0");
  const Vector& fv = f.coords();
  if (m == 0) return {fv.norm(), {}};
  const Index K = dict.size();
  const Index keep = std::min<Index>(m, K);

  if (is_orthonormal(dict)) {
    const Vector c = dict.atoms().transpose() * fv;
    std::vector<Index> order(static_cast<std::size_t>(K));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return std::abs(c[a]) > std::abs(c[b]); });
    std::vector<Index> support(order.begin(), order.begin() + keep);
    std::sort(support.begin(), support.end());
    // Out-of-span part plus the dropped coefficients (Parseval).
    double err2 = (fv - dict.atoms() * c).squaredNorm();
    for (auto it = order.begin() + keep; it != order.end(); ++it) err2 += c[*it] * c[*it];
    return {std::sqrt(err2), std::move(support)};
  }

  if (binomial(K, keep) > kMaxOracleSubsets) {
    throw ProblemTooLarge("best_mterm_oracle: C(" + std::to_string(K) + ", " +
                          std::to_string(keep) + ") subsets exceed the search budget");
  }
  std::vector<Index> subset(static_cast<std::size_t>(keep));
  std::iota(subset.begin(), subset.end(), Index{0});
  const double tie = 1e-14 * std::max(1.0, fv.norm());
  MTermApproximation best{std::numeric_limits<double>::infinity(), {}};
  Matrix A(dict.dim(), keep);
  while (true) {
    for (Index j = 0; j < keep; ++j) A.col(j) = dict.atom(subset[static_cast<std::size_t>(j)]);
    const double err = projection_error(fv, A);
    if (err < best.error - tie) best = {err, subset};
    // Next combination in lexicographic order.
    Index i = keep - 1;
    while (i >= 0 && subset[static_cast<std::size_t>(i)] == K - keep + i) --i;
    if (i < 0) break;
    ++subset[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < keep; ++j) {
      subset[static_cast<std::size_t>(j)] = subset[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return best;
}

}  // namespace greedylab
