#pragma once
#include <cstdint>

#include "isoembed/freemap.hpp"

namespace isoembed {

struct IsometryReport {
  double residual = 0;
  std::size_t worst_point = 0;
  int worst_entry = 0;
  double tol = 0;
  bool passed = false;
};
IsometryReport check_isometry(const EquivariantMap& u, const MetricField& g, double tol);

FreenessCertificate check_freeness(const EquivariantMap& u, double threshold = 1e-8);

struct InjectivityReport {
  bool passed = false;
  bool doubled = false;
  long pairs = 0;
  double c_inj = 0;
  double worst_ratio = INFINITY;  // min |u(x) - u(y')| / |x - y'| over checked pairs
  Vec x, y;                       // worst pair, y' = y + tau
  DeckTransform tau;
  FreenessCertificate local;      // first-derivative block
};
/// sqrt(mean trace(g) / n).
double mean_metric_scale(const MetricField& g);
InjectivityReport check_injectivity(const EquivariantMap& u, int samples, std::uint64_t seed, double c_inj,
                                    double local_threshold = 1e-8);

struct EquivarianceReport {
  double max_residual = 0;
  bool passed = false;
};
EquivarianceReport check_equivariance(const EquivariantMap& u, int trials, std::uint64_t seed, double tol = 1e-12);

}  // namespace isoembed
