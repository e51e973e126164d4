#pragma once
#include "isoembed/fields.hpp"
#include "isoembed/kernels.hpp"

namespace isoembed {

/// u(x) = A x + phi(x) with phi periodic, so u(x + tau) = u(x) + A tau holds by
/// construction.
struct EquivariantMap {
  GridSpec grid;
  Mat A;              // q x n, acting on physical coordinates
  PeriodicField phi;  // vector(q)

  EquivariantMap(GridSpec g, Mat affine, PeriodicField periodic);
  int n() const { return grid.n(); }
  int q() const { return phi.comps; }
  const Lattice& lattice() const { return grid.lattice; }

  EquivariantMap scaled(double c) const;
  /// u at grid point p.
  Vec sample(std::size_t p) const;
  Vec shift(const DeckTransform& tau) const { return A * lattice().translation(tau); }
};

/// Derivatives of a map at every grid point, laid out point-major so that the
/// rows of the free-map matrix at one point are contiguous:
/// all(p) is an (n + s_n) x q row-major block, first rows d_i u then d_i d_j u.
struct Jet {
  int n = 0, q = 0, s = 0;
  std::size_t P = 0;
  std::vector<double> all;

  int rows() const { return n + s; }
  std::size_t block() const { return static_cast<std::size_t>(rows()) * q; }
  const double* at(std::size_t p) const { return all.data() + p * block(); }
  double d1(std::size_t p, int i, int k) const { return all[p * block() + static_cast<std::size_t>(i) * q + k]; }
  double d2(std::size_t p, int si, int k) const {
    return all[p * block() + static_cast<std::size_t>(n + si) * q + k];
  }
};

Jet compute_jet(const EquivariantMap& u, Method method = Method::spectral);
/// First-derivative rows only (n x q per point).
std::vector<double> first_rows(const Jet& jet);

/// Off-grid evaluation through the trigonometric interpolant of phi.
class MapEvaluator {
 public:
  explicit MapEvaluator(const EquivariantMap& u) : A_(u.A), phi_(u.phi) {}
  Vec operator()(const Vec& x) const { return A_ * x + phi_(x); }

 private:
  Mat A_;
  Interpolant phi_;
};

}  // namespace isoembed
