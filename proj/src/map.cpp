#include "isoembed/map.hpp"

#include "isoembed/errors.hpp"

namespace isoembed {

EquivariantMap::EquivariantMap(GridSpec g, Mat affine, PeriodicField periodic)
    : grid(std::move(g)), A(std::move(affine)), phi(std::move(periodic)) {
  if (A.rows() != phi.comps || A.cols() != grid.n())
    throw std::invalid_argument("affine part must be q x n");
  if (phi.comps < grid.n()) throw std::invalid_argument("q must be at least n");
}

EquivariantMap EquivariantMap::scaled(double c) const {
  EquivariantMap r = *this;
  r.A *= c;
  for (double& v : r.phi.data) v *= c;
  return r;
}

Vec EquivariantMap::sample(std::size_t p) const {
  Vec u = A * grid.point(p);
  for (int k = 0; k < q(); ++k) u(k) += phi.at(k, p);
  return u;
}

Jet compute_jet(const EquivariantMap& u, Method method) {
  Jet j;
  j.n = u.n();
  j.q = u.q();
  j.s = sym_count(j.n);
  j.P = u.grid.size();
  PeriodicField f1 = derivative(u.phi, 1, method);
  PeriodicField f2 = derivative(u.phi, 2, method);
  j.all.resize(j.P * j.block());
  const int n = j.n, s = j.s, q = j.q;
  for_each_index(Exec::parallel, j.P, [&](std::size_t p) {
    double* b = j.all.data() + p * j.block();
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < q; ++k) b[i * q + k] = u.A(k, i) + f1.at(k * n + i, p);
    for (int si = 0; si < s; ++si)
      for (int k = 0; k < q; ++k) b[(n + si) * q + k] = f2.at(k * s + si, p);
  });
  return j;
}

std::vector<double> first_rows(const Jet& jet) {
  const std::size_t blk = static_cast<std::size_t>(jet.n) * jet.q;
  std::vector<double> out(jet.P * blk);
  for (std::size_t p = 0; p < jet.P; ++p) std::copy(jet.at(p), jet.at(p) + blk, out.data() + p * blk);
  return out;
}

}  // namespace isoembed
