#pragma once
#include "isoembed/metric.hpp"

namespace isoembed {

/// The tensor a^4 f f^T with f a unit linear form and a supported in the chart.
struct RankOneTerm {
  Chart chart;
  Vec f;
  PeriodicField a;  // scalar
  int form = 0;
  double c_min = 0;  // smallest coefficient c_k over the chart
};

PeriodicField term_tensor(const RankOneTerm& t);

struct DecomposeOptions {
  int per_direction = 2;       // initial charts per lattice direction
  double overlap = 1.8;        // chart radius over the covering radius of the centres
  double delta_pos = 1e-6;     // relative to |G|_inf
  int max_refinements = 5;
};

struct PropertyEDecomposition {
  std::vector<RankOneTerm> terms;
  std::vector<Chart> charts;
  MetricField target;
  double reconstruction_error = 0;
  double target_norm = 0;
  double min_coefficient = 0;
  int per_direction = 0;
  int refinements = 0;
};

/// {e_i} and {(e_i + e_j)/sqrt2, (e_i - e_j)/sqrt2} for i < j.
std::vector<Vec> positive_span_forms(int n);

/// Charts centred at basis * k / m; radius = overlap * covering radius, capped
/// below half the shortest lattice vector.
std::vector<Chart> chart_cover(const GridSpec& grid, int m, double overlap);

std::vector<RankOneTerm> chart_decompose(const MetricField& G, const Chart& chart, const PeriodicField& chi,
                                         double delta_pos);

PropertyEDecomposition decompose_defect(const MetricField& G, const GridSpec& grid,
                                        const DecomposeOptions& opt = {});

/// sup-norm of sum of term tensors minus target.
double reconstruction_error(const std::vector<RankOneTerm>& terms, const MetricField& target);

}  // namespace isoembed
