#pragma once
#include <cmath>
#include <numbers>

#include "isoembed/map.hpp"

namespace isoembed::test {

inline constexpr double two_pi = 2 * std::numbers::pi;

/// R (cos 2 pi t, sin 2 pi t, 0, ..) on the unit circle lattice.
inline EquivariantMap circle_map(int res, double R, int q = 2) {
  GridSpec g(Lattice::identity(1), {res});
  PeriodicField phi = PeriodicField::vector(g, q);
  for (std::size_t p = 0; p < g.size(); ++p) {
    double t = g.lattice_point(p)(0);
    phi.at(0, p) = R * std::cos(two_pi * t);
    phi.at(1, p) = R * std::sin(two_pi * t);
  }
  return EquivariantMap(g, Mat::Zero(q, 1), phi);
}

/// x -> (x, 0, ..): affine part identity, periodic part zero.
inline EquivariantMap identity_map(const GridSpec& g, int q) {
  Mat A = Mat::Zero(q, g.n());
  A.topRows(g.n()).setIdentity();
  return EquivariantMap(g, A, PeriodicField::vector(g, q));
}

}  // namespace isoembed::test
