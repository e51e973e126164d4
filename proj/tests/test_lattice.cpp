#include "doctest.h"
#include "isoembed/errors.hpp"
#include "isoembed/lattice.hpp"

using namespace isoembed;

TEST_CASE("wrap: origin is its own representative") {
  Mat B(2, 2);
  B << 2, 1, 0, 1;
  for (const Lattice& L : {Lattice::identity(2), Lattice(B)}) {
    auto w = wrap(Vec::Zero(2), L);
    CHECK(w.y.norm() == 0.0);
    CHECK(w.tau.is_identity());
  }
}

TEST_CASE("wrap: half-open convention on the identity lattice") {
  Vec x(2);
  x << 1.5, -0.25;
  auto w = wrap(x, Lattice::identity(2));
  CHECK(w.y(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(w.y(1) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(w.tau.k == std::vector<long>{1, -1});
}

TEST_CASE("wrap: skew lattice agrees with exhaustive coefficient search") {
  Mat B(2, 2);
  B << 2, 1, 0, 1;  // columns (2,0), (1,1)
  Lattice L(B);
  Vec x(2);
  x << 3.5, 0.5;
  auto w = wrap(x, L);
  // oracle: the unique k in {-3..3}^2 with B^{-1}(x - Bk) in [0,1)^2
  int found = 0;
  std::vector<long> kk;
  for (long a = -3; a <= 3; ++a)
    for (long b = -3; b <= 3; ++b) {
      Vec k(2);
      k << double(a), double(b);
      Vec t = B.inverse() * (x - B * k);
      if (t(0) >= 0 && t(0) < 1 && t(1) >= 0 && t(1) < 1) {
        ++found;
        kk = {a, b};
      }
    }
  REQUIRE(found == 1);
  CHECK(w.tau.k == kk);
  Vec t = L.to_lattice(w.y);
  CHECK(t(0) >= 0);
  CHECK(t(0) < 1);
  CHECK(t(1) >= 0);
  CHECK(t(1) < 1);
  CHECK((w.y + L.translation(w.tau) - x).norm() < 1e-14);
}

TEST_CASE("wrap: round trip on random points") {
  Mat B(3, 3);
  B << 1, 0.3, 0, 0, 1.2, 0.1, 0.2, 0, 0.9;
  Lattice L(B);
  for (int i = 0; i < 50; ++i) {
    Vec x = 7.0 * Vec::Random(3);
    auto w = wrap(x, L);
    CHECK((w.y + L.translation(w.tau) - x).norm() < 1e-12);
  }
}

TEST_CASE("deck transforms form a group") {
  DeckTransform a{{1, -2}}, b{{3, 5}}, c{{-1, 0}};
  CHECK(a.compose(b).compose(c) == a.compose(b.compose(c)));
  CHECK(a.compose(a.inverse()).is_identity());
  CHECK(a.compose(DeckTransform::identity(2)) == a);
  CHECK(a.compose(b) == b.compose(a));
}

TEST_CASE("neighbor shell") {
  Lattice L = Lattice::identity(2);
  CHECK(neighbor_shell(L, 0.0).empty());
  auto s1 = neighbor_shell(L, 1.0);
  CHECK(s1.size() == 4);
  for (const auto& t : s1) CHECK(std::abs(t.k[0]) + std::abs(t.k[1]) == 1);

  // oracle: enumerate {-2..2}^2 and filter by norm
  std::size_t expect = 0;
  for (int a = -2; a <= 2; ++a)
    for (int b = -2; b <= 2; ++b)
      if ((a || b) && std::hypot(a, b) <= 1.5) ++expect;
  auto s2 = neighbor_shell(L, 1.5);
  CHECK(expect == 8);
  CHECK(s2.size() == expect);
  CHECK(std::is_sorted(s2.begin(), s2.end()));
}

TEST_CASE("neighbor shell cap") {
  CHECK_THROWS_AS(neighbor_shell(Lattice::identity(3), 50.0, 1000), ShellCapError);
}

TEST_CASE("lattice rejects singular bases") {
  Mat B(2, 2);
  B << 1, 2, 2, 4;
  CHECK_THROWS_AS(Lattice{B}, ConfigError);
}

TEST_CASE("shortest vector and minimal image") {
  Mat B(2, 2);
  B << 1, 0.5, 0, 2;
  Lattice L(B);
  CHECK(L.shortest_vector() == doctest::Approx(1.0));
  Vec d(2);
  d << 0.9, 0.1;
  CHECK(L.min_image(d).norm() == doctest::Approx(std::hypot(0.1, 0.1)));
}
