#pragma once
#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "isoembed/lattice.hpp"

namespace isoembed {

inline int sym_count(int n) { return n * (n + 1) / 2; }
/// Position of (i, j), i <= j, in the ordering (0,0),(0,1),..,(0,n-1),(1,1),..
inline int sym_index(int i, int j, int n) {
  if (i > j) std::swap(i, j);
  return i * n - i * (i - 1) / 2 + (j - i);
}

/// Regular periodic grid over the fundamental domain. Point p has lattice
/// coordinates (i_1/N_1, .., i_n/N_n) with the last index fastest.
struct GridSpec {
  Lattice lattice;
  std::vector<int> res;

  GridSpec() : GridSpec(Lattice(), {4}) {}
  GridSpec(Lattice l, std::vector<int> r);
  int n() const { return lattice.dim(); }
  std::size_t size() const { return size_; }
  std::vector<int> index(std::size_t p) const;
  std::size_t linear(const std::vector<int>& idx) const;
  Vec lattice_point(std::size_t p) const;
  Vec point(std::size_t p) const { return lattice.to_physical(lattice_point(p)); }
  /// Shortest physical distance between neighbouring grid points.
  double spacing() const;
  bool operator==(const GridSpec& o) const { return lattice == o.lattice && res == o.res; }

 private:
  std::size_t size_;
};

enum class Rank { scalar, vector, sym2 };
enum class Method { spectral, finite_difference };

/// Samples of a periodic field, stored component-major: data[c * size + p].
struct PeriodicField {
  GridSpec grid;
  Rank rank = Rank::scalar;
  int comps = 1;
  std::vector<double> data;

  PeriodicField() : PeriodicField(GridSpec(), Rank::scalar, 1) {}
  PeriodicField(GridSpec g, Rank r, int c);
  static PeriodicField scalar(const GridSpec& g) { return PeriodicField(g, Rank::scalar, 1); }
  static PeriodicField vector(const GridSpec& g, int q) { return PeriodicField(g, Rank::vector, q); }
  static PeriodicField sym2(const GridSpec& g) { return PeriodicField(g, Rank::sym2, sym_count(g.n())); }

  std::size_t size() const { return grid.size(); }
  double* comp(int c) { return data.data() + static_cast<std::size_t>(c) * size(); }
  const double* comp(int c) const { return data.data() + static_cast<std::size_t>(c) * size(); }
  double& at(int c, std::size_t p) { return data[static_cast<std::size_t>(c) * size() + p]; }
  double at(int c, std::size_t p) const { return data[static_cast<std::size_t>(c) * size() + p]; }
  double sup_norm() const;
};

/// Derivatives of every component. Order 1 yields comps*n components with
/// index c*n + i (d/dx_i of component c); order 2 yields comps*s_n components
/// with index c*s_n + sym_index(i, j). Derivatives are taken with respect to
/// physical coordinates.
PeriodicField derivative(const PeriodicField& f, int order, Method method = Method::spectral);

/// Sharp low-pass: keeps Fourier modes with |k_a| <= cut * N_a / 2 in every direction.
void low_pass(PeriodicField& f, double cut);

/// Trigonometric interpolant of a field, evaluated at arbitrary points.
class Interpolant {
 public:
  explicit Interpolant(const PeriodicField& f);
  /// Values of all components at the physical point x.
  Vec operator()(const Vec& x) const;
  int comps() const { return comps_; }

 private:
  GridSpec grid_;
  int comps_;
  std::size_t half_;
  std::vector<std::complex<double>> spec_;
};

/// Metric ball of the given radius around `center`, lifted from the torus.
struct Chart {
  Vec center;
  double radius = 0;
  int index = 0;
};

/// Chart balls avoid their own nonidentity translates.
bool chart_translate_disjoint(const Chart& chart, const Lattice& lattice);

/// exp(-1/(1-r^2)) for r = |x - center| / radius < 1 (min-image distance), else 0.
double bump(const Chart& chart, const Vec& x, const Lattice& lattice);
PeriodicField bump_field(const Chart& chart, const GridSpec& grid);
/// Grid points strictly inside the chart.
std::vector<std::uint8_t> chart_mask(const Chart& chart, const GridSpec& grid);

/// chi_l with sum_l chi_l^4 = 1; see partition_of_unity in fields.cpp for the normalization.
std::vector<PeriodicField> partition_of_unity(const std::vector<Chart>& charts, const GridSpec& grid);

}  // namespace isoembed
