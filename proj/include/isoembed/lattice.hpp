#pragma once
#include <Eigen/Dense>
#include <compare>
#include <cstddef>
#include <vector>

namespace isoembed {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Translation by an integer combination of the lattice generators.
struct DeckTransform {
  std::vector<long> k;

  static DeckTransform identity(int n) { return {std::vector<long>(n, 0)}; }
  bool is_identity() const;
  DeckTransform compose(const DeckTransform& o) const;
  DeckTransform inverse() const;
  auto operator<=>(const DeckTransform&) const = default;
};

/// Full-rank translation lattice; columns of `basis` are the generators.
class Lattice {
 public:
  Lattice() : Lattice(Mat::Identity(1, 1)) {}
  explicit Lattice(Mat basis);
  static Lattice identity(int n);
  /// Row-major list of n*n entries, as used in configuration files.
  static Lattice from_row_major(const std::vector<double>& entries);

  int dim() const { return static_cast<int>(basis_.rows()); }
  const Mat& basis() const { return basis_; }
  const Mat& inverse_basis() const { return inverse_; }

  Vec to_lattice(const Vec& x) const { return inverse_ * x; }
  Vec to_physical(const Vec& t) const { return basis_ * t; }
  Vec translation(const DeckTransform& tau) const;
  /// Length of the shortest nonzero lattice vector.
  double shortest_vector() const;
  /// Displacement of minimal length among d + basis*k, k integer (n <= 3 search).
  Vec min_image(const Vec& d) const;

  bool operator==(const Lattice& o) const { return basis_ == o.basis_; }

 private:
  Mat basis_, inverse_;
};

struct Wrapped {
  Vec y;
  DeckTransform tau;
};

/// x = y + basis*tau with the lattice coordinates of y in [0,1)^n.
Wrapped wrap(const Vec& x, const Lattice& lattice);

/// All nonidentity translations with |basis*k| <= radius, sorted lexicographically.
std::vector<DeckTransform> neighbor_shell(const Lattice& lattice, double radius,
                                          std::size_t cap = 1000000);

}  // namespace isoembed
