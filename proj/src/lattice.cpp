#include "isoembed/lattice.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "isoembed/errors.hpp"

namespace isoembed {

bool DeckTransform::is_identity() const {
  for (long c : k)
    if (c != 0) return false;
  return true;
}

DeckTransform DeckTransform::compose(const DeckTransform& o) const {
  DeckTransform r = *this;
  for (std::size_t i = 0; i < k.size(); ++i) r.k[i] += o.k[i];
  return r;
}

DeckTransform DeckTransform::inverse() const {
  DeckTransform r = *this;
  for (long& c : r.k) c = -c;
  return r;
}

Lattice::Lattice(Mat basis) : basis_(std::move(basis)) {
  if (basis_.rows() != basis_.cols() || basis_.rows() < 1)
    throw ConfigError("lattice basis must be a square n x n matrix");
  const int n = dim();
  const double scale = std::pow(basis_.norm(), n);
  if (std::abs(basis_.determinant()) <= 1e-12 * scale)
    throw ConfigError("lattice basis is singular");
  inverse_ = basis_.inverse();
  Mat check = inverse_ * basis_ - Mat::Identity(n, n);
  if (check.cwiseAbs().maxCoeff() > 1e-12)
    throw ConfigError("lattice basis is too ill-conditioned to invert");
}

Lattice Lattice::identity(int n) { return Lattice(Mat::Identity(n, n)); }

Lattice Lattice::from_row_major(const std::vector<double>& e) {
  const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(e.size()))));
  if (n < 1 || static_cast<std::size_t>(n * n) != e.size())
    throw ConfigError("lattice must list n*n entries");
  Mat b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = e[i * n + j];
  return Lattice(b);
}

Vec Lattice::translation(const DeckTransform& tau) const {
  Vec kv(dim());
  for (int i = 0; i < dim(); ++i) kv(i) = static_cast<double>(tau.k[i]);
  return basis_ * kv;
}

double Lattice::shortest_vector() const {
  double r = basis_.colwise().norm().minCoeff();
  double best = r;
  for (const auto& t : neighbor_shell(*this, r)) best = std::min(best, translation(t).norm());
  return best;
}

Vec Lattice::min_image(const Vec& d) const {
  const int n = dim();
  Vec t = inverse_ * d;
  for (int i = 0; i < n; ++i) t(i) -= std::floor(t(i) + 0.5);
  Vec base = basis_ * t, best = base;
  double bn = base.norm();
  const int total = static_cast<int>(std::pow(3, n));
  for (int c = 0; c < total; ++c) {
    Vec kv(n);
    int r = c;
    for (int i = 0; i < n; ++i) {
      kv(i) = static_cast<double>(r % 3 - 1);
      r /= 3;
    }
    Vec cand = base + basis_ * kv;
    double cn = cand.norm();
    if (cn < bn) {
      bn = cn;
      best = cand;
    }
  }
  return best;
}

Wrapped wrap(const Vec& x, const Lattice& lattice) {
  const int n = lattice.dim();
  Vec t = lattice.to_lattice(x);
  DeckTransform tau = DeckTransform::identity(n);
  for (int i = 0; i < n; ++i) {
    double f = std::floor(t(i));
    double frac = t(i) - f;
    if (frac >= 1.0 - 1e-15) {
      frac = 0.0;
      f += 1.0;
    }
    if (frac < 0.0) frac = 0.0;
    tau.k[i] = static_cast<long>(f);
    t(i) = frac;
  }
  return {lattice.to_physical(t), tau};
}

std::vector<DeckTransform> neighbor_shell(const Lattice& lattice, double radius, std::size_t cap) {
  std::vector<DeckTransform> out;
  if (radius <= 0) return out;
  const int n = lattice.dim();
  std::vector<long> bound(n);
  double count = 1;
  for (int a = 0; a < n; ++a) {
    bound[a] = static_cast<long>(std::floor(radius * lattice.inverse_basis().row(a).norm() + 1e-12));
    count *= 2.0 * bound[a] + 1.0;
  }
  if (count > static_cast<double>(cap)) {
    std::ostringstream os;
    os << "neighbor shell of radius " << radius << " would enumerate " << count
       << " transforms (cap " << cap << ")";
    throw ShellCapError(os.str());
  }
  std::vector<long> k(n);
  for (int a = 0; a < n; ++a) k[a] = -bound[a];
  const double tol = radius * 1e-12;
  while (true) {
    DeckTransform t{k};
    if (!t.is_identity() && lattice.translation(t).norm() <= radius + tol) out.push_back(t);
    int a = n - 1;
    while (a >= 0 && k[a] == bound[a]) {
      k[a] = -bound[a];
      --a;
    }
    if (a < 0) break;
    ++k[a];
  }
  return out;
}

}  // namespace isoembed
