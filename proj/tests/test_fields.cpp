#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "isoembed/errors.hpp"
#include "isoembed/fields.hpp"

using namespace isoembed;
using isoembed::test::two_pi;

namespace {

PeriodicField sample(const GridSpec& g, double (*f)(const Vec&)) {
  PeriodicField out = PeriodicField::scalar(g);
  for (std::size_t p = 0; p < g.size(); ++p) out.at(0, p) = f(g.point(p));
  return out;
}

double max_err(const PeriodicField& a, int comp, const GridSpec& g, double (*f)(const Vec&)) {
  double e = 0;
  for (std::size_t p = 0; p < g.size(); ++p) e = std::max(e, std::abs(a.at(comp, p) - f(g.point(p))));
  return e;
}

}  // namespace

TEST_CASE("spectral derivative of a band-limited field is exact") {
  GridSpec g(Lattice::identity(2), {16, 8});
  auto f = sample(g, [](const Vec& x) { return std::sin(two_pi * x(0)); });
  auto d = derivative(f, 1);
  CHECK(max_err(d, 0, g, [](const Vec& x) { return two_pi * std::cos(two_pi * x(0)); }) < 1e-12);
  CHECK(max_err(d, 1, g, [](const Vec&) { return 0.0; }) < 1e-12);
  auto d2 = derivative(f, 2);
  CHECK(max_err(d2, sym_index(0, 0, 2), g, [](const Vec& x) { return -two_pi * two_pi * std::sin(two_pi * x(0)); }) <
        1e-10);
}

TEST_CASE("finite differences are fourth order") {
  double e[2];
  int k = 0;
  for (int N : {32, 64}) {
    GridSpec g(Lattice::identity(1), {N});
    auto f = sample(g, [](const Vec& x) { return std::sin(two_pi * x(0)); });
    auto d = derivative(f, 1, Method::finite_difference);
    e[k++] = max_err(d, 0, g, [](const Vec& x) { return two_pi * std::cos(two_pi * x(0)); });
  }
  CHECK(e[0] / e[1] == doctest::Approx(16.0).epsilon(0.05));
}

TEST_CASE("derivatives of a constant vanish") {
  GridSpec g(Lattice::identity(2), {8, 8});
  PeriodicField f = PeriodicField::vector(g, 3);
  for (auto& x : f.data) x = 2.5;
  for (int order : {1, 2})
    for (Method m : {Method::spectral, Method::finite_difference}) CHECK(derivative(f, order, m).sup_norm() < 1e-12);
}

TEST_CASE("spectral derivative of exp(sin) converges") {
  auto exact = [](const Vec& x) { return two_pi * std::cos(two_pi * x(0)) * std::exp(std::sin(two_pi * x(0))); };
  for (int N : {64, 128}) {
    GridSpec g(Lattice::identity(1), {N});
    auto f = sample(g, [](const Vec& x) { return std::exp(std::sin(two_pi * x(0))); });
    CHECK(max_err(derivative(f, 1), 0, g, exact) < 1e-10);
  }
}

TEST_CASE("derivatives use physical coordinates on a skew lattice") {
  Mat B(2, 2);
  B << 1.0, 0.5, 0.0, 1.5;
  Lattice L(B);
  GridSpec g(L, {16, 16});
  // f(x) = sin(2 pi t_1), t = B^{-1} x: grad f = 2 pi cos(2 pi t_1) * row 0 of B^{-1}
  PeriodicField f = PeriodicField::scalar(g);
  for (std::size_t p = 0; p < g.size(); ++p) f.at(0, p) = std::sin(two_pi * g.lattice_point(p)(0));
  auto d = derivative(f, 1);
  double e = 0;
  for (std::size_t p = 0; p < g.size(); ++p)
    for (int i = 0; i < 2; ++i)
      e = std::max(e, std::abs(d.at(i, p) - two_pi * std::cos(two_pi * g.lattice_point(p)(0)) * L.inverse_basis()(0, i)));
  CHECK(e < 1e-12);
}

TEST_CASE("trigonometric interpolation reproduces band-limited fields off grid") {
  GridSpec g(Lattice::identity(2), {8, 8});
  auto fn = [](const Vec& x) { return std::cos(two_pi * x(0)) * std::sin(2 * two_pi * x(1)) + 0.5; };
  auto f = sample(g, fn);
  Interpolant I(f);
  for (int i = 0; i < 20; ++i) {
    Vec x = 3.0 * Vec::Random(2);
    CHECK(I(x)(0) == doctest::Approx(fn(x)).epsilon(1e-12));
  }
}

TEST_CASE("low pass removes high modes") {
  GridSpec g(Lattice::identity(1), {32});
  auto f = sample(g, [](const Vec& x) { return std::sin(two_pi * x(0)) + std::sin(12 * two_pi * x(0)); });
  low_pass(f, 0.5);
  CHECK(max_err(f, 0, g, [](const Vec& x) { return std::sin(two_pi * x(0)); }) < 1e-12);
}

TEST_CASE("bump values") {
  Lattice L = Lattice::identity(1);
  Chart c{Vec::Constant(1, 0.5), 0.4, 0};
  CHECK(bump(c, Vec::Constant(1, 0.5), L) == doctest::Approx(std::exp(-1.0)));
  CHECK(bump(c, Vec::Constant(1, 0.9), L) == 0.0);
  CHECK(bump(c, Vec::Constant(1, 0.7), L) == doctest::Approx(0.26360).epsilon(1e-4));
  CHECK(bump(c, Vec::Constant(1, 0.7), L) == doctest::Approx(std::exp(-1.0 / 0.75)));
  // lifted: translate by a lattice vector
  CHECK(bump(c, Vec::Constant(1, 3.7), L) == doctest::Approx(std::exp(-1.0 / 0.75)));
}

TEST_CASE("partition of unity: fourth powers sum to one") {
  GridSpec g(Lattice::identity(1), {256});
  std::vector<Chart> charts;
  for (int l = 0; l < 3; ++l) charts.push_back({Vec::Constant(1, l / 3.0), 0.4, l});
  auto chi = partition_of_unity(charts, g);
  double e = 0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    double s = 0;
    for (const auto& c : chi) s += std::pow(c.at(0, p), 4);
    e = std::max(e, std::abs(s - 1));
  }
  CHECK(e < 1e-14);
  // supports stay inside the charts
  for (int l = 0; l < 3; ++l)
    for (std::size_t p = 0; p < g.size(); ++p)
      if (bump(charts[l], g.point(p), g.lattice) == 0.0) CHECK(chi[l].at(0, p) == 0.0);
}

TEST_CASE("partition of unity: single and duplicated charts") {
  GridSpec g(Lattice::identity(1), {64});
  Chart c{Vec::Constant(1, 0.0), 0.499, 0};
  // one chart covering everything except its boundary points is not a cover
  // at radius < 1/2; use two copies to check the symmetric split
  std::vector<Chart> two{c, c, {Vec::Constant(1, 0.5), 0.499, 2}};
  auto chi = partition_of_unity(two, g);
  for (std::size_t p = 0; p < g.size(); ++p) CHECK(std::pow(chi[0].at(0, p), 4) == doctest::Approx(std::pow(chi[1].at(0, p), 4)));
  std::vector<Chart> one{{Vec::Constant(1, 0.0), 0.6, 0}};
  GridSpec g2(Lattice::identity(1), {16});
  auto chi1 = partition_of_unity(one, g2);
  for (std::size_t p = 0; p < g2.size(); ++p) CHECK(std::pow(chi1[0].at(0, p), 4) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("partition of unity detects gaps") {
  GridSpec g(Lattice::identity(1), {64});
  std::vector<Chart> charts{{Vec::Constant(1, 0.0), 0.2, 0}};
  CHECK_THROWS_AS(partition_of_unity(charts, g), CoverageError);
}

TEST_CASE("chart translate disjointness") {
  Lattice L = Lattice::identity(2);
  CHECK(chart_translate_disjoint({Vec::Zero(2), 0.49, 0}, L));
  CHECK_FALSE(chart_translate_disjoint({Vec::Zero(2), 0.51, 0}, L));
}

TEST_CASE("grid indexing round trip") {
  GridSpec g(Lattice::identity(3), {4, 5, 6});
  CHECK(g.size() == 120);
  for (std::size_t p = 0; p < g.size(); ++p) CHECK(g.linear(g.index(p)) == p);
  CHECK(g.index(1) == std::vector<int>{0, 0, 1});
}
