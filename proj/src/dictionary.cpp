#include "greedylab/dictionary.hpp"

#include "greedylab/errors.hpp"
#include "greedylab/random.hpp"

#include <Eigen/QR>

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace greedylab {

namespace {

constexpr double kUnitTol = 1e-12;
constexpr int kMaxRedraws = 64;

Index matrix_rank(const Matrix& m) {
  if (m.cols() == 0) return 0;
  return Eigen::ColPivHouseholderQR<Matrix>(m).rank();
}

}  // namespace

Dictionary::Dictionary(Geometry geometry, Matrix atoms, std::string label)
    : geometry_(geometry), atoms_(std::move(atoms)), label_(std::move(label)) {
  if (atoms_.cols() < 1) throw std::invalid_argument("Dictionary: needs at least one atom");
  if (atoms_.rows() != geometry_.dim()) {
    throw std::invalid_argument("Dictionary: atom length " + std::to_string(atoms_.rows()) +
                                " does not match dimension " + std::to_string(geometry_.dim()));
  }
  if (!atoms_.allFinite()) throw std::invalid_argument("Dictionary: non-finite atom entry");
  for (Index k = 0; k < atoms_.cols(); ++k) {
    const double len = norm(geometry_, atoms_.col(k));
    if (std::abs(len - 1.0) > kUnitTol) {
      throw std::invalid_argument("Dictionary: atom " + std::to_string(k) + " has norm " +
                                  std::to_string(len));
    }
  }
}

Index Dictionary::rank() const { return matrix_rank(atoms_); }

Dictionary build_orthonormal(const Geometry& geometry) {
  const Index n = geometry.dim();
  return Dictionary(geometry, Matrix::Identity(n, n), "orthonormal(" + std::to_string(n) + ")");
}

Dictionary build_random_unit(const Geometry& geometry, Index K, std::uint64_t seed,
                             bool require_spanning) {
  const Index n = geometry.dim();
  if (K < 1) throw std::invalid_argument("build_random_unit: K must be >= 1");
  if (require_spanning && K < n) {
    throw std::invalid_argument("build_random_unit: K = " + std::to_string(K) +
                                " atoms cannot span dimension " + std::to_string(n));
  }
  Rng rng(seed);
  Matrix atoms(n, K);
  Index current_rank = 0;
  for (Index k = 0; k < K; ++k) {
    atoms.col(k) = random_unit_vector(geometry, rng);
    if (!require_spanning || current_rank == n) continue;
    int redraws = 0;
    while (matrix_rank(atoms.leftCols(k + 1)) == current_rank) {
      if (++redraws > kMaxRedraws) {
        throw std::runtime_error("build_random_unit: could not reach full rank");
      }
      atoms.col(k) = random_unit_vector(geometry, rng);
    }
    ++current_rank;
  }
  return Dictionary(geometry, std::move(atoms),
                    "random_unit(n=" + std::to_string(n) + ",K=" + std::to_string(K) +
                        ",seed=" + std::to_string(seed) + ")");
}

Dictionary build_union_bases(const Geometry& geometry, Index count, std::uint64_t seed) {
  const Index n = geometry.dim();
  if (count < 1) throw std::invalid_argument("build_union_bases: count must be >= 1");
  Matrix atoms(n, n * count);
  atoms.leftCols(n).setIdentity();
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Index b = 1; b < count; ++b) {
    Matrix g(n, n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i) g(i, j) = gauss(rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    // Sign fix makes the rotation Haar-distributed.
    for (Index j = 0; j < n; ++j) {
      if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    }
    for (Index j = 0; j < n; ++j) {
      Vector col = q.col(j);
      col /= col.norm();
      col /= norm(geometry, col);
      atoms.col(b * n + j) = col;
    }
  }
  return Dictionary(geometry, std::move(atoms),
                    "union_bases(n=" + std::to_string(n) + ",count=" + std::to_string(count) +
                        ",seed=" + std::to_string(seed) + ")");
}

Vector dual_values(const Eigen::Ref<const Vector>& residual, const Dictionary& dict) {
  if (residual.size() != dict.dim()) {
    throw std::invalid_argument("dual_values: residual dimension does not match dictionary");
  }
  if (dict.geometry().is_hilbert()) return dict.atoms().transpose() * residual;
  return dict.atoms().transpose() * norming_representer(dict.geometry(), residual);
}

SelectionResult select(const Eigen::Ref<const Vector>& residual, const Dictionary& dict,
                       double t) {
  if (!(t > 0.0 && t <= 1.0)) {
    throw std::invalid_argument("select: weakness parameter must lie in (0, 1]");
  }
  if (residual.isZero(0.0)) throw std::invalid_argument("select: zero residual");
  const Vector duals = dual_values(residual, dict);
  const double sup = duals.cwiseAbs().maxCoeff();
  if (sup == 0.0) {
    throw NonSpanningDictionary("select: every dual value vanishes at a nonzero residual");
  }
  const double threshold = t * sup;
  for (Index k = 0; k < duals.size(); ++k) {
    if (std::abs(duals[k]) >= threshold) return {k, duals[k], sup};
  }
  // Unreachable: the maximizing atom always meets the threshold.
  throw std::logic_error("select: no atom met the threshold");
}

SelectionResult select(const Element& residual, const Dictionary& dict, double t) {
  if (!residual.geometry().same_space(dict.geometry())) {
    throw std::invalid_argument("select: residual and dictionary live in different spaces");
  }
  return select(residual.coords(), dict, t);
}

}  // namespace greedylab
