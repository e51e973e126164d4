#include <cmath>
#include <limits>

#include "doctest.h"
#include "helpers.hpp"
#include "isoembed/pipeline.hpp"
#include "isoembed/verify.hpp"

using namespace isoembed;
using isoembed::test::circle_map;
using isoembed::test::identity_map;
using isoembed::test::two_pi;

TEST_CASE("isometry check on circles") {
  const double R = 0.4;
  auto u = circle_map(64, R, 3);
  auto g = flat_metric(u.grid, std::pow(two_pi * R, 2));
  auto ok = check_isometry(u, g, 1e-10);
  CHECK(ok.passed);
  CHECK(ok.residual < 1e-12);
  const double R2 = 0.45;
  auto bad = check_isometry(circle_map(64, R2, 3), g, 1e-10);
  CHECK_FALSE(bad.passed);
  CHECK(bad.residual == doctest::Approx(std::abs(std::pow(two_pi * R2, 2) - std::pow(two_pi * R, 2))).epsilon(1e-12));
}

TEST_CASE("a short map fails the isometry check by its defect") {
  GridSpec grid(Lattice::identity(1), {64});
  auto g = flat_metric(grid, two_pi * two_pi);
  auto e = initial_embedding(g, grid, 7);
  auto r = check_isometry(e.u0, g, 1e-6);
  CHECK_FALSE(r.passed);
  CHECK(r.residual == doctest::Approx(defect_report(g, e.u0).G.g.sup_norm()).epsilon(1e-14));
}

TEST_CASE("injectivity of the identity map") {
  for (int n : {1, 2}) {
    GridSpec g(Lattice::identity(n), std::vector<int>(n, 16));
    auto r = check_injectivity(identity_map(g, 7), 2000, 1, 1.0);
    // an affine isometry has ratio exactly 1, which the check must accept
    CHECK(r.worst_ratio == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.passed == (r.worst_ratio >= 1.0));
  }
  GridSpec g(Lattice::identity(2), {16, 16});
  CHECK(check_injectivity(identity_map(g, 7), 2000, 1, 1.0 - 1e-12).passed);
}

TEST_CASE("pinched map fails and names the pair") {
  // (cos 2 pi t, sin 4 pi t) sends t = 1/4 and t = 3/4 to the origin
  GridSpec g(Lattice::identity(1), {8});
  PeriodicField phi = PeriodicField::vector(g, 2);
  for (std::size_t p = 0; p < g.size(); ++p) {
    double t = g.lattice_point(p)(0);
    phi.at(0, p) = std::cos(two_pi * t);
    phi.at(1, p) = std::sin(2 * two_pi * t);
  }
  EquivariantMap u(g, Mat::Zero(2, 1), phi);
  auto r = check_injectivity(u, 1000, 0, 1e-3);
  CHECK_FALSE(r.passed);
  CHECK(r.worst_ratio < 1e-12);
  double a = r.x(0), b = r.y(0) + r.tau.k[0];
  double lo = std::min(a, b) - std::floor(std::min(a, b)), hi = std::max(a, b) - std::floor(std::max(a, b));
  CHECK(std::min(lo, hi) == doctest::Approx(0.25));
  CHECK(std::max(lo, hi) == doctest::Approx(0.75));
}

TEST_CASE("equivariance of maps") {
  GridSpec g(Lattice::identity(2), {16, 16});
  auto e = initial_embedding(flat_metric(g, 1.0), g, 0);
  auto r = check_equivariance(e.u0, 1000, 3);
  CHECK(r.passed);
  CHECK(r.max_residual <= 1e-12);
  CHECK(check_equivariance(circle_map(32, 1.0, 3), 200, 1).max_residual <= 1e-12);
}

TEST_CASE("corrupted samples are detected") {
  auto u = circle_map(32, 1.0, 3);
  u.phi.at(1, 9) = std::numeric_limits<double>::quiet_NaN();
  auto r = check_equivariance(u, 200, 1);
  CHECK_FALSE(r.passed);
  CHECK(r.max_residual > 1e-12);
}

TEST_CASE("freeness gate") {
  GridSpec g(Lattice::identity(1), {32});
  CHECK_FALSE(check_freeness(identity_map(g, 7)).valid);
  CHECK(check_freeness(veronese_lift(whitney_torus(g))).valid);
}

TEST_CASE("mean metric scale") {
  GridSpec g(Lattice::identity(2), {8, 8});
  CHECK(mean_metric_scale(flat_metric(g, 4.0)) == doctest::Approx(2.0));
}
