#include "isoembed/fields.hpp"

#include <cmath>
#include <sstream>

#include "isoembed/errors.hpp"

namespace isoembed {

GridSpec::GridSpec(Lattice l, std::vector<int> r) : lattice(std::move(l)), res(std::move(r)) {
  if (static_cast<int>(res.size()) != lattice.dim())
    throw ConfigError("resolution must list one entry per lattice direction");
  size_ = 1;
  for (int v : res) {
    if (v < 4) throw ConfigError("every resolution entry must be >= 4");
    size_ *= static_cast<std::size_t>(v);
  }
}

std::vector<int> GridSpec::index(std::size_t p) const {
  std::vector<int> idx(n());
  for (int a = n() - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(p % res[a]);
    p /= res[a];
  }
  return idx;
}

std::size_t GridSpec::linear(const std::vector<int>& idx) const {
  std::size_t p = 0;
  for (int a = 0; a < n(); ++a) p = p * res[a] + static_cast<std::size_t>(((idx[a] % res[a]) + res[a]) % res[a]);
  return p;
}

Vec GridSpec::lattice_point(std::size_t p) const {
  auto idx = index(p);
  Vec t(n());
  for (int a = 0; a < n(); ++a) t(a) = static_cast<double>(idx[a]) / res[a];
  return t;
}

double GridSpec::spacing() const {
  double s = INFINITY;
  for (int a = 0; a < n(); ++a) s = std::min(s, lattice.basis().col(a).norm() / res[a]);
  return s;
}

PeriodicField::PeriodicField(GridSpec g, Rank r, int c)
    : grid(std::move(g)), rank(r), comps(c), data(static_cast<std::size_t>(c) * grid.size(), 0.0) {}

double PeriodicField::sup_norm() const {
  double m = 0;
  for (double v : data) m = std::max(m, std::abs(v));
  return m;
}

bool chart_translate_disjoint(const Chart& chart, const Lattice& lattice) {
  return 2.0 * chart.radius < lattice.shortest_vector();
}

double bump(const Chart& chart, const Vec& x, const Lattice& lattice) {
  double r = lattice.min_image(x - chart.center).norm() / chart.radius;
  if (r >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - r * r));
}

PeriodicField bump_field(const Chart& chart, const GridSpec& grid) {
  PeriodicField b = PeriodicField::scalar(grid);
  for (std::size_t p = 0; p < grid.size(); ++p) b.at(0, p) = bump(chart, grid.point(p), grid.lattice);
  return b;
}

std::vector<std::uint8_t> chart_mask(const Chart& chart, const GridSpec& grid) {
  std::vector<std::uint8_t> m(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p)
    m[p] = grid.lattice.min_image(grid.point(p) - chart.center).norm() < chart.radius;
  return m;
}

// chi_l = bump_l / (sum_m bump_m^4)^(1/4). Then chi_l^4 = bump_l^4 / sum_m bump_m^4,
// which is a partition of unity by fourth powers with support in chart l and
// stays well resolved by the spectral operator near the chart boundaries.
std::vector<PeriodicField> partition_of_unity(const std::vector<Chart>& charts, const GridSpec& grid) {
  std::vector<PeriodicField> b;
  b.reserve(charts.size());
  for (const auto& c : charts) b.push_back(bump_field(c, grid));
  const std::size_t P = grid.size();
  // scaled by the largest bump at each point so that fourth powers do not underflow
  std::vector<double> bmax(P, 0.0), s4(P, 0.0);
  for (const auto& f : b)
    for (std::size_t p = 0; p < P; ++p) bmax[p] = std::max(bmax[p], f.at(0, p));
  for (std::size_t p = 0; p < P; ++p) {
    if (!(bmax[p] > 0)) {
      std::ostringstream os;
      os << "grid point " << p << " at x = " << grid.point(p).transpose() << " lies in no chart";
      throw CoverageError(os.str());
    }
    for (const auto& f : b) s4[p] += std::pow(f.at(0, p) / bmax[p], 4);
  }
  for (auto& f : b)
    for (std::size_t p = 0; p < P; ++p) f.at(0, p) = (f.at(0, p) / bmax[p]) / std::pow(s4[p], 0.25);
  return b;
}

}  // namespace isoembed
