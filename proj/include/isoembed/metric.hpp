#pragma once
#include <string>

#include "isoembed/map.hpp"

namespace isoembed {

struct MetricField {
  PeriodicField g;  // sym2
  std::string provenance;
};

/// One product term amp * prod_a trig_a(2 pi k_a t_a) of the conformal factor,
/// with trig_a in {sin, cos} and t the lattice coordinates.
struct PhiTerm {
  double amp = 0;
  std::vector<char> kind;  // 's' or 'c' per direction
  std::vector<int> freq;
};

MetricField flat_metric(const GridSpec& grid, double c);
/// e^{2 phi} * identity.
MetricField conformal_metric(const GridSpec& grid, const std::vector<PhiTerm>& phi);
/// Throws ConfigError unless g is symmetric positive-definite with eigenvalues > 1e-10.
void validate_metric(const MetricField& m);

/// Symmetric matrix of a sym2 field at a grid point.
Mat sym_at(const PeriodicField& f, std::size_t p);
double min_eigenvalue(const Mat& s);

MetricField induced_metric(const EquivariantMap& u, Exec e = Exec::parallel);
MetricField induced_metric(const Jet& jet, const GridSpec& grid, Exec e = Exec::parallel);

struct ShortnessReport {
  MetricField G;
  double min_eigenvalue = 0;
  std::size_t worst_point = 0;
  double margin = 0;
};

/// Margin delta_short * mean trace of g.
double shortness_margin(const MetricField& g, double delta_short);
/// G = g - du.du; throws NotShortError when min eigenvalue <= margin.
ShortnessReport shortness_defect(const MetricField& g, const EquivariantMap& u, double delta_short = 1e-6);
/// Same without the error (for reporting).
ShortnessReport defect_report(const MetricField& g, const EquivariantMap& u, double delta_short = 1e-6);

struct ScaledMap {
  EquivariantMap u;
  double c;
  int halvings;
};
ScaledMap scale_until_short(const MetricField& g, const EquivariantMap& u, double delta_short = 1e-6);

}  // namespace isoembed
