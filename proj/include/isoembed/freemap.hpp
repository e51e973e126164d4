#pragma once
#include <cstdint>

#include "isoembed/metric.hpp"

namespace isoembed {

struct FreenessCertificate {
  double sigma_min = 0;  // raw smallest singular value over the grid
  double sigma_rel = 0;  // after scaling each row by its largest norm over the grid
  std::size_t worst_point = 0;
  double threshold = 1e-8;
  bool valid = false;
};

/// Certificate for rows [row0, row0 + rows) of every jet block.
FreenessCertificate block_certificate(const Jet& jet, int row0, int rows, double threshold,
                                      Exec e = Exec::parallel);
/// Certificate of the full (n + s_n) x q block of first and second derivatives.
FreenessCertificate freeness_certificate(const Jet& jet, double threshold = 1e-8, Exec e = Exec::parallel);

/// (cos 2 pi t_1, sin 2 pi t_1, ..) as a pure periodic map into R^{2n}.
EquivariantMap whitney_torus(const GridSpec& grid);
/// Appends the monomials y_i y_j (i <= j) to a pure periodic map.
EquivariantMap veronese_lift(const EquivariantMap& w);

/// Orthonormal basis of v-perp obtained from a Householder completion of v (q x (q-1)).
Mat perp_basis(const Vec& v);
/// Applies P^T to the map (both parts).
EquivariantMap project(const EquivariantMap& f, const Mat& P);

struct ProjectionCheck {
  FreenessCertificate first, second;
  bool accepted = false;
};
/// Certificates of the first- and second-derivative blocks after projecting along v.
ProjectionCheck check_projection(const Jet& jet, const Vec& v, double threshold = 1e-8);

struct ProjectionResult {
  EquivariantMap map;
  std::vector<Vec> directions;
  std::vector<int> rejections;  // per reduction step
};
/// With candidates > 1 the step keeps the best of that many admissible
/// directions (largest relative sigma of either block) instead of the first.
ProjectionResult generic_projection_reduce(const EquivariantMap& f, int target_q, std::uint64_t seed,
                                           double threshold = 1e-8, int retries = 16, int candidates = 1);

struct InitialEmbedding {
  EquivariantMap u0;
  FreenessCertificate certificate;
  double scale = 1;
  int halvings = 0;
  std::vector<Vec> directions;
  std::vector<int> rejections;
};
/// affine_fraction <= 0 scales the whole map until short; a value in (0, 1]
/// fixes the affine block at sqrt(fraction * min eigenvalue of g) and scales
/// only the periodic block.
InitialEmbedding initial_embedding(const MetricField& g, const GridSpec& grid, std::uint64_t seed,
                                   double threshold = 1e-8, int retries = 16, double delta_short = 1e-6,
                                   double affine_fraction = 0, int candidates = 1);

}  // namespace isoembed
