#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "isoembed/errors.hpp"
#include "isoembed/freemap.hpp"
#include "isoembed/verify.hpp"

using namespace isoembed;
using isoembed::test::identity_map;
using isoembed::test::two_pi;

namespace {

// smallest singular value over all grid points of rows [row0, row0 + rows)
double dense_sigma(const Jet& jet, int row0, int rows) {
  double s = INFINITY;
  for (std::size_t p = 0; p < jet.P; ++p) {
    Eigen::Map<const Eigen::Matrix<double, -1, -1, Eigen::RowMajor>> A(jet.at(p), jet.rows(), jet.q);
    Mat B = A.middleRows(row0, rows);
    s = std::min(s, Eigen::JacobiSVD<Mat>(B).singularValues().minCoeff());
  }
  return s;
}

}  // namespace

TEST_CASE("Whitney torus values") {
  auto w1 = whitney_torus(GridSpec(Lattice::identity(1), {8}));
  CHECK(w1.sample(0)(0) == 1.0);
  CHECK(w1.sample(0)(1) == 0.0);
  GridSpec g(Lattice::identity(2), {4, 4});
  auto w2 = whitney_torus(g);
  Vec u = w2.sample(g.linear({1, 2}));  // t = (1/4, 1/2)
  Vec expect(4);
  expect << 0, 1, -1, 0;
  CHECK((u - expect).norm() < 1e-15);
  CHECK(w2.A.isZero(0));
}

TEST_CASE("Whitney torus separates grid points") {
  GridSpec g(Lattice::identity(2), {32, 32});
  auto w = whitney_torus(g);
  std::vector<Vec> pts;
  for (std::size_t p = 0; p < g.size(); ++p) pts.push_back(w.sample(p));
  double m = INFINITY;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) m = std::min(m, (pts[i] - pts[j]).norm());
  CHECK(m == doctest::Approx(2 * std::sin(std::numbers::pi / 32)).epsilon(1e-12));
}

TEST_CASE("Veronese lift monomials") {
  GridSpec g(Lattice::identity(1), {4});
  PeriodicField phi = PeriodicField::vector(g, 2);
  for (std::size_t p = 0; p < g.size(); ++p) {
    phi.at(0, p) = p == 1 ? 1.0 : 0.0;
    phi.at(1, p) = p == 1 ? 2.0 : 0.0;
  }
  auto v = veronese_lift(EquivariantMap(g, Mat::Zero(2, 1), phi));
  REQUIRE(v.q() == 5);
  Vec expect(5);
  expect << 1, 2, 1, 2, 4;
  CHECK(v.sample(1) == expect);
  CHECK(v.sample(0).isZero(0));
}

TEST_CASE("lifted Whitney map has independent second derivatives") {
  GridSpec g(Lattice::identity(2), {32, 32});
  auto jet = compute_jet(veronese_lift(whitney_torus(g)));
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> pick(0, g.size() - 1);
  double s = INFINITY;
  for (int i = 0; i < 16; ++i) {
    std::size_t p = pick(rng);
    Eigen::Map<const Eigen::Matrix<double, -1, -1, Eigen::RowMajor>> A(jet.at(p), jet.rows(), jet.q);
    s = std::min(s, Eigen::JacobiSVD<Mat>(Mat(A.bottomRows(3))).singularValues().minCoeff());
  }
  CHECK(s > 1.0);
  CHECK(freeness_certificate(jet).valid);
}

TEST_CASE("perp basis is orthonormal and orthogonal to v") {
  Vec v = Vec::Random(6);
  Mat P = perp_basis(v);
  CHECK(P.cols() == 5);
  CHECK((P.transpose() * P - Mat::Identity(5, 5)).norm() < 1e-14);
  CHECK((P.transpose() * v).norm() < 1e-14);
}

TEST_CASE("generic projection of the lifted circle") {
  GridSpec g(Lattice::identity(1), {256});
  auto lifted = veronese_lift(whitney_torus(g));
  auto same = generic_projection_reduce(lifted, 5, 1);
  CHECK(same.directions.empty());
  CHECK(same.map.phi.data == lifted.phi.data);

  auto r = generic_projection_reduce(lifted, 2, 1);
  REQUIRE(r.map.q() == 2);
  CHECK(r.directions.size() == 3);
  auto jet = compute_jet(r.map);
  CHECK(dense_sigma(jet, 0, 1) > 1e-8);
  CHECK(dense_sigma(jet, 1, 1) > 1e-8);
}

TEST_CASE("projection along an existing second derivative is rejected") {
  GridSpec g(Lattice::identity(1), {64});
  auto lifted = veronese_lift(whitney_torus(g));
  auto jet = compute_jet(lifted);
  Vec v(jet.q);
  for (int k = 0; k < jet.q; ++k) v(k) = jet.d2(17, 0, k);
  v.normalize();
  auto c = check_projection(jet, v);
  CHECK_FALSE(c.accepted);
  CHECK_FALSE(c.second.valid);
  CHECK(c.second.worst_point == 17);
}

TEST_CASE("projection gives up after the retry budget") {
  // relative singular values never exceed 1, so threshold 2 rejects every direction
  GridSpec g(Lattice::identity(1), {32});
  CHECK_THROWS_AS(generic_projection_reduce(veronese_lift(whitney_torus(g)), 2, 0, 2.0, 4), GenericityError);
}

TEST_CASE("initial embedding dimensions") {
  const int expect[] = {3, 7, 12};
  const int res[] = {64, 16, 8};
  for (int n = 1; n <= 3; ++n) {
    GridSpec g(Lattice::identity(n), std::vector<int>(n, res[n - 1]));
    auto e = initial_embedding(flat_metric(g, 1.0), g, 0);
    CHECK(e.u0.q() == expect[n - 1]);
    CHECK(e.certificate.valid);
    CHECK(e.u0.A.bottomRows(e.u0.q() - n).isZero(0));
    CHECK(e.u0.A.topRows(n).isApprox(e.scale * Mat::Identity(n, n)));
    CHECK(defect_report(flat_metric(g, 1.0), e.u0).min_eigenvalue > 0);
  }
}

TEST_CASE("initial embedding is equivariant") {
  GridSpec g(Lattice::identity(2), {16, 16});
  auto e = initial_embedding(flat_metric(g, 1.0), g, 2);
  MapEvaluator ev(e.u0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(0, 1);
  std::uniform_int_distribution<long> uk(-3, 3);
  double m = 0;
  for (int i = 0; i < 100; ++i) {
    Vec x(2);
    x << ux(rng), ux(rng);
    DeckTransform tau{{uk(rng), uk(rng)}};
    Vec d = ev(x + g.lattice.translation(tau)) - ev(x) - e.u0.shift(tau);
    m = std::max(m, d.norm());
  }
  CHECK(m <= 1e-12);
}

TEST_CASE("block scaling keeps the affine part large") {
  GridSpec g(Lattice::identity(2), {16, 16});
  auto metric = flat_metric(g, 1.0);
  auto e = initial_embedding(metric, g, 2, 1e-8, 16, 1e-6, 0.5);
  CHECK(e.u0.A.topRows(2).isApprox(std::sqrt(0.5) * Mat::Identity(2, 2)));
  CHECK(e.certificate.valid);
  auto d = defect_report(metric, e.u0);
  CHECK(d.min_eigenvalue > 0.25 - 1e-12);
}

TEST_CASE("freeness certificate") {
  GridSpec g(Lattice::identity(2), {16, 16});
  CHECK_FALSE(check_freeness(identity_map(g, 7)).valid);
  auto w = veronese_lift(whitney_torus(g));
  auto a = check_freeness(w), b = check_freeness(w.scaled(1e-3));
  CHECK(a.valid);
  CHECK(b.valid == a.valid);
  CHECK(b.sigma_rel == doctest::Approx(a.sigma_rel).epsilon(1e-10));
  CHECK(b.sigma_min == doctest::Approx(1e-3 * a.sigma_min).epsilon(1e-10));
}
