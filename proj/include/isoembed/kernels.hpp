#pragma once
#include <cstddef>
#include <vector>

namespace isoembed {

/// Every grid-point kernel has a serial reference path and an OpenMP path;
/// both run the same per-point body, so results agree bit for bit.
enum class Exec { serial, parallel };

template <class F>
void for_each_index(Exec e, std::size_t count, F&& f) {
  if (e == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) f(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < count; ++i) f(i);
  }
}

/// Minimum-norm pseudo-inverses of a batch of r x q matrices (row-major,
/// contiguous per matrix). Writes q x r row-major inverses and the smallest
/// singular value of each matrix.
void pinv_batch(const double* mats, std::size_t count, int r, int q, double* pinv, double* sigma,
                Exec e = Exec::parallel);

/// out_m = pinv_m * rhs_m for every matrix in the batch.
void apply_batch(const double* pinv, const double* rhs, std::size_t count, int r, int q, double* out,
                 Exec e = Exec::parallel);

/// Smallest singular value of each r x q matrix after dividing row i by
/// rowscale[i]; rows with zero scale count as zero rows.
void scaled_sigma_batch(const double* mats, std::size_t count, int r, int q, const double* rowscale,
                        double* sigma, Exec e = Exec::parallel);

/// Gram entries rows_i . rows_j (i <= j) of each r x q matrix; out has r(r+1)/2 per matrix.
void gram_batch(const double* mats, std::size_t count, int r, int q, double* out, Exec e = Exec::parallel);

}  // namespace isoembed
