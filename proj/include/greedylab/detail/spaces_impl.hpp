#pragma once

#include <random>

namespace greedylab {

template <typename Urbg>
Vector random_unit_vector(const Geometry& geometry, Urbg& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(geometry.dim());
  do {
    for (Index i = 0; i < v.size(); ++i) v[i] = gauss(rng);
  } while (v.norm() == 0.0);
  v /= v.norm();
  v /= norm(geometry, v);
  return v;
}

}  // namespace greedylab
