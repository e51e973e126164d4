#include "isoembed/metric.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "isoembed/errors.hpp"

namespace isoembed {

MetricField flat_metric(const GridSpec& grid, double c) {
  MetricField m{PeriodicField::sym2(grid), "flat"};
  const int n = grid.n();
  for (int i = 0; i < n; ++i) std::fill_n(m.g.comp(sym_index(i, i, n)), grid.size(), c);
  return m;
}

MetricField conformal_metric(const GridSpec& grid, const std::vector<PhiTerm>& phi) {
  MetricField m{PeriodicField::sym2(grid), "conformal"};
  const int n = grid.n();
  for (std::size_t p = 0; p < grid.size(); ++p) {
    Vec t = grid.lattice_point(p);
    double f = 0;
    for (const auto& term : phi) {
      double v = term.amp;
      for (int a = 0; a < n; ++a) {
        double ang = 2 * std::numbers::pi * term.freq[a] * t(a);
        v *= term.kind[a] == 's' ? std::sin(ang) : std::cos(ang);
      }
      f += v;
    }
    for (int i = 0; i < n; ++i) m.g.at(sym_index(i, i, n), p) = std::exp(2 * f);
  }
  return m;
}

Mat sym_at(const PeriodicField& f, std::size_t p) {
  const int n = f.grid.n();
  Mat s(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) s(i, j) = s(j, i) = f.at(sym_index(i, j, n), p);
  return s;
}

double min_eigenvalue(const Mat& s) {
  if (s.rows() == 1) return s(0, 0);
  Eigen::SelfAdjointEigenSolver<Mat> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

void validate_metric(const MetricField& m) {
  if (m.g.rank != Rank::sym2 || m.g.comps != sym_count(m.g.grid.n()))
    throw ConfigError("metric must be a symmetric 2-tensor field");
  for (std::size_t p = 0; p < m.g.size(); ++p) {
    double e = min_eigenvalue(sym_at(m.g, p));
    if (!(e > 1e-10)) {
      std::ostringstream os;
      os << "metric is not positive-definite at grid point " << p << " (min eigenvalue " << e << ")";
      throw ConfigError(os.str());
    }
  }
}

MetricField induced_metric(const Jet& jet, const GridSpec& grid, Exec e) {
  MetricField m{PeriodicField::sym2(grid), "induced"};
  const int n = jet.n, s = jet.s;
  std::vector<double> gram(jet.P * s);
  // first-derivative rows are the leading n rows of each block
  std::vector<double> rows = first_rows(jet);
  gram_batch(rows.data(), jet.P, n, jet.q, gram.data(), e);
  for (std::size_t p = 0; p < jet.P; ++p)
    for (int k = 0; k < s; ++k) m.g.at(k, p) = gram[p * s + k];
  return m;
}

MetricField induced_metric(const EquivariantMap& u, Exec e) {
  return induced_metric(compute_jet(u), u.grid, e);
}

double shortness_margin(const MetricField& g, double delta_short) {
  const int n = g.g.grid.n();
  double tr = 0;
  for (std::size_t p = 0; p < g.g.size(); ++p)
    for (int i = 0; i < n; ++i) tr += g.g.at(sym_index(i, i, n), p);
  return delta_short * tr / static_cast<double>(g.g.size());
}

ShortnessReport defect_report(const MetricField& g, const EquivariantMap& u, double delta_short) {
  MetricField ind = induced_metric(u);
  ShortnessReport r{MetricField{g.g, "defect"}, INFINITY, 0, shortness_margin(g, delta_short)};
  for (std::size_t i = 0; i < r.G.g.data.size(); ++i) r.G.g.data[i] -= ind.g.data[i];
  for (std::size_t p = 0; p < g.g.size(); ++p) {
    double e = min_eigenvalue(sym_at(r.G.g, p));
    if (e < r.min_eigenvalue) {
      r.min_eigenvalue = e;
      r.worst_point = p;
    }
  }
  return r;
}

ShortnessReport shortness_defect(const MetricField& g, const EquivariantMap& u, double delta_short) {
  ShortnessReport r = defect_report(g, u, delta_short);
  if (!(r.min_eigenvalue > r.margin)) {
    std::ostringstream os;
    os << "g - du.du has min eigenvalue " << r.min_eigenvalue << " <= margin " << r.margin
       << " at grid point " << r.worst_point;
    throw NotShortError(os.str());
  }
  return r;
}

ScaledMap scale_until_short(const MetricField& g, const EquivariantMap& u, double delta_short) {
  double c = 1.0;
  for (int h = 0; h <= 60; ++h) {
    EquivariantMap v = u.scaled(c);
    ShortnessReport r = defect_report(g, v, delta_short);
    if (r.min_eigenvalue > r.margin) return {v, c, h};
    c *= 0.5;
  }
  throw ScalingError("metric defect not positive-definite after 60 halvings; g is degenerate");
}

}  // namespace isoembed
