#include "greedylab/spaces.hpp"

#include "greedylab/errors.hpp"
#include "greedylab/kernels.hpp"
#include "greedylab/random.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace greedylab {

Smoothness smoothness_params(double p) {
  if (!std::isfinite(p) || p <= 1.0) {
    throw std::invalid_argument("smoothness_params: need 1 < p < inf, got " + std::to_string(p));
  }
  if (p <= 2.0) return {1.0 / p, p};
  return {(p - 1.0) / 2.0, 2.0};
}

Geometry Geometry::hilbert(Index n) {
  if (n < 1) throw std::invalid_argument("Geometry: dimension must be >= 1");
  return Geometry(SpaceKind::Hilbert, 2.0, {0.5, 2.0}, n);
}

Geometry Geometry::lp(double p, Index n) {
  if (n < 1) throw std::invalid_argument("Geometry: dimension must be >= 1");
  return Geometry(SpaceKind::Lp, p, smoothness_params(p), n);
}

Element::Element(Geometry geometry, Vector coords)
    : geometry_(geometry), coords_(std::move(coords)) {
  if (coords_.size() != geometry_.dim()) {
    throw std::invalid_argument("Element: " + std::to_string(coords_.size()) +
                                " coordinates for a geometry of dimension " +
                                std::to_string(geometry_.dim()));
  }
  if (!coords_.allFinite()) throw std::invalid_argument("Element: non-finite coordinate");
}

Element Element::zero(const Geometry& geometry) {
  return Element(geometry, Vector::Zero(geometry.dim()));
}

namespace {

void require_same_space(const Element& x, const Element& y, const char* op) {
  if (!(x.geometry() == y.geometry())) {
    throw std::invalid_argument(std::string(op) + ": elements live in different spaces");
  }
}

}  // namespace

double inner(const Element& x, const Element& y) {
  require_same_space(x, y, "inner");
  if (!x.geometry().is_hilbert()) {
    throw std::invalid_argument("inner: geometry has no inner product");
  }
  return x.coords().dot(y.coords());
}

double norm(const Geometry& geometry, const Eigen::Ref<const Vector>& x) {
  if (geometry.is_hilbert()) return x.norm();
  return kernels::lp_norm(x, geometry.p());
}

double norm(const Element& x) { return norm(x.geometry(), x.coords()); }

Vector norming_representer(const Geometry& geometry, const Eigen::Ref<const Vector>& f) {
  const double fnorm = norm(geometry, f);
  if (fnorm == 0.0) throw UndefinedFunctional("norming functional of the zero element");
  if (geometry.is_hilbert()) return f / fnorm;
  return kernels::norming_weights(f, geometry.p());
}

double norming_functional(const Element& f, const Element& g) {
  require_same_space(f, g, "norming_functional");
  if (f.geometry().is_hilbert()) {
    const double fnorm = norm(f);
    if (fnorm == 0.0) throw UndefinedFunctional("norming functional of the zero element");
    return f.coords().dot(g.coords()) / fnorm;
  }
  return norming_representer(f.geometry(), f.coords()).dot(g.coords());
}

double line_search_scale(const Geometry& geometry, const Eigen::Ref<const Vector>& f,
                         const Eigen::Ref<const Vector>& h, double tol) {
  if (f.size() != h.size()) throw std::invalid_argument("line_search_scale: dimension mismatch");
  if (h.isZero(0.0)) throw std::invalid_argument("line_search_scale: zero direction");
  if (geometry.is_hilbert()) return f.dot(h) / h.squaredNorm();
  if (!(tol > 0.0)) throw std::invalid_argument("line_search_scale: tol must be positive");
  return kernels::lp_line_search(f, h, geometry.p(), tol);
}

double line_search_scale(const Element& f, const Element& h, double tol) {
  require_same_space(f, h, "line_search_scale");
  return line_search_scale(f.geometry(), f.coords(), h.coords(), tol);
}

double lemma_sequence_bound(double B, double r, double ell, std::span<const double> r_ks,
                            int m) {
  if (!(B > 0.0) || !(r > 0.0) || !(ell > 0.0)) {
    throw std::invalid_argument("lemma_sequence_bound: B, r, ell must be positive");
  }
  if (m < 2) throw std::invalid_argument("lemma_sequence_bound: m must be >= 2");
  if (r_ks.size() < static_cast<std::size_t>(m - 1)) {
    throw std::invalid_argument("lemma_sequence_bound: need r_2..r_m");
  }
  double tail = 0.0;
  for (int k = 2; k <= m; ++k) tail += r_ks[static_cast<std::size_t>(k - 2)];
  const double lead = std::max(1.0, std::pow(ell, -1.0 / ell));
  return lead * std::pow(r, 1.0 / ell) * std::pow(r * std::pow(B, -ell) + tail, -1.0 / ell);
}

double modulus_objective(const Geometry& geometry, const Eigen::Ref<const Vector>& f,
                         const Eigen::Ref<const Vector>& g, double u) {
  return 0.5 * (norm(geometry, f + u * g) + norm(geometry, f - u * g)) - 1.0;
}

double modulus_estimate(const Geometry& geometry, double u, int samples, std::uint64_t seed) {
  if (!(u > 0.0)) throw std::invalid_argument("modulus_estimate: u must be positive");
  if (samples < 1) throw std::invalid_argument("modulus_estimate: samples must be >= 1");
  Rng rng(seed);
  double best = 0.0;
  for (int i = 0; i < samples; ++i) {
    const Vector f = random_unit_vector(geometry, rng);
    const Vector g = random_unit_vector(geometry, rng);
    best = std::max(best, modulus_objective(geometry, f, g, u));
  }
  return best;
}

}  // namespace greedylab
