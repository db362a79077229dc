#pragma once

// Scalar-generic ℓ_p kernels on Eigen expressions. These carry no geometry
// object; the Element-level API in spaces.hpp dispatches into them.

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <utility>

namespace greedylab::kernels {

template <typename Scalar>
constexpr Scalar sign(Scalar x) {
  return static_cast<Scalar>((Scalar(0) < x) - (x < Scalar(0)));
}

/// (Σ|x_i|^p)^{1/p}, evaluated on x / max|x_i| to avoid overflow.
template <typename Derived>
typename Derived::Scalar lp_norm(const Eigen::MatrixBase<Derived>& x,
                                 typename Derived::Scalar p) {
  using Scalar = typename Derived::Scalar;
  if (x.size() == 0) return Scalar(0);
  if (p == Scalar(2)) return x.norm();
  const Scalar scale = x.cwiseAbs().maxCoeff();
  if (scale == Scalar(0)) return Scalar(0);
  const Scalar sum = (x.cwiseAbs() / scale).array().pow(p).sum();
  return scale * std::pow(sum, Scalar(1) / p);
}

/// Riesz representer of the ℓ_p norming functional of f: the vector w with
/// F_f(g) = w·g, w_i = sign(f_i)|f_i|^{p-1} / ‖f‖_p^{p-1}. Caller guarantees
/// f ≠ 0.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> norming_weights(
    const Eigen::MatrixBase<Derived>& f, typename Derived::Scalar p) {
  using Scalar = typename Derived::Scalar;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Scalar scale = f.cwiseAbs().maxCoeff();
  const Vec u = f / scale;
  if (p == Scalar(2)) return u / u.norm();
  Vec w = u.unaryExpr([p](Scalar v) { return sign(v) * std::pow(std::abs(v), p - Scalar(1)); });
  return w / std::pow(lp_norm(u, p), p - Scalar(1));
}

/// F_f(g) for the ℓ_p norm. sign(0) = 0.
template <typename DF, typename DG>
typename DF::Scalar norming_dual(const Eigen::MatrixBase<DF>& f,
                                 const Eigen::MatrixBase<DG>& g,
                                 typename DF::Scalar p) {
  return norming_weights(f, p).dot(g);
}

/// argmin_s ‖f − s·h‖_p for h ≠ 0.
///
/// Golden-section on [−B, B], B = 2‖f‖/‖h‖ + 1, while the two interior values
/// differ by more than the rounding noise of evaluating ‖f − s·h‖. The
/// bracket is then widened until the directional derivative −F_{f−sh}(h),
/// monotone in s by convexity, changes sign across it, and cut by bisection on
/// that sign down to adjacent doubles; of the doubles within 8 ulps of the
/// crossing the one with the smallest |derivative| is returned. The second
/// stage keeps resolving s* after the objective itself has gone flat to
/// rounding.
template <typename DF, typename DH>
typename DF::Scalar lp_line_search(const Eigen::MatrixBase<DF>& f,
                                   const Eigen::MatrixBase<DH>& h,
                                   typename DF::Scalar p,
                                   typename DF::Scalar tol) {
  using Scalar = typename DF::Scalar;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Vec fv = f;
  const Vec hv = h;

  const auto objective = [&](Scalar s) { return lp_norm(Vec(fv - s * hv), p); };
  // Derivative of the objective up to the positive factor; 0 at a zero residual.
  const auto slope = [&](Scalar s) {
    const Vec r = fv - s * hv;
    if (r.cwiseAbs().maxCoeff() == Scalar(0)) return Scalar(0);
    return -norming_dual(r, hv, p);
  };

  const Scalar f_norm = lp_norm(fv, p);
  const Scalar h_norm = lp_norm(hv, p);
  const Scalar bound = Scalar(2) * f_norm / h_norm + Scalar(1);
  Scalar lo = -bound;
  Scalar hi = bound;

  const Scalar inv_phi = (std::sqrt(Scalar(5)) - Scalar(1)) / Scalar(2);
  const Scalar resolution = Scalar(64) * std::numeric_limits<Scalar>::epsilon();
  Scalar c = hi - inv_phi * (hi - lo);
  Scalar d = lo + inv_phi * (hi - lo);
  Scalar fc = objective(c);
  Scalar fd = objective(d);
  while (hi - lo > tol) {
    const Scalar noise =
        resolution * (f_norm + std::max(std::abs(c), std::abs(d)) * h_norm);
    if (std::abs(fc - fd) <= noise) break;
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = objective(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = objective(d);
    }
  }

  Scalar step = std::max(hi - lo, tol);
  while (lo > -bound && slope(lo) > Scalar(0)) {
    hi = lo;
    lo = std::max(-bound, lo - step);
    step *= Scalar(2);
  }
  step = std::max(hi - lo, tol);
  while (hi < bound && slope(hi) < Scalar(0)) {
    lo = hi;
    hi = std::min(bound, hi + step);
    step *= Scalar(2);
  }

  for (;;) {
    const Scalar mid = lo + (hi - lo) / Scalar(2);
    if (mid <= lo || mid >= hi) break;
    const Scalar g = slope(mid);
    if (g == Scalar(0)) return mid;
    if (g > Scalar(0)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  // lo and hi are adjacent doubles here. Rounding of f − s·h makes the slope
  // jumpy at this scale, so keep the most stationary of the nearby doubles.
  Scalar best = lo;
  Scalar best_slope = std::abs(slope(lo));
  for (const Scalar dir : {-std::numeric_limits<Scalar>::infinity(),
                           std::numeric_limits<Scalar>::infinity()}) {
    Scalar s = lo;
    for (int k = 0; k < 8; ++k) {
      s = std::nextafter(s, dir);
      const Scalar g = std::abs(slope(s));
      if (g < best_slope) {
        best = s;
        best_slope = g;
      }
    }
  }
  return best;
}

}  // namespace greedylab::kernels
