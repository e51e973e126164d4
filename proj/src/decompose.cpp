#include "isoembed/decompose.hpp"

#include <cmath>
#include <sstream>

#include "isoembed/errors.hpp"

namespace isoembed {

namespace {

// Coordinates of a symmetric matrix in which the Frobenius inner product is
// the Euclidean one.
Vec svec(const Mat& s) {
  const int n = static_cast<int>(s.rows());
  Vec v(sym_count(n));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) v(sym_index(i, j, n)) = (i == j ? 1.0 : std::sqrt(2.0)) * s(i, j);
  return v;
}

}  // namespace

PeriodicField term_tensor(const RankOneTerm& t) {
  const GridSpec& g = t.a.grid;
  const int n = g.n();
  PeriodicField h = PeriodicField::sym2(g);
  for (std::size_t p = 0; p < g.size(); ++p) {
    double a4 = std::pow(t.a.at(0, p), 4);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) h.at(sym_index(i, j, n), p) = a4 * t.f(i) * t.f(j);
  }
  return h;
}

std::vector<Vec> positive_span_forms(int n) {
  std::vector<Vec> f;
  for (int i = 0; i < n; ++i) f.push_back(Vec::Unit(n, i));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      f.push_back((Vec::Unit(n, i) + Vec::Unit(n, j)) / std::sqrt(2.0));
      f.push_back((Vec::Unit(n, i) - Vec::Unit(n, j)) / std::sqrt(2.0));
    }
  return f;
}

std::vector<Chart> chart_cover(const GridSpec& grid, int m, double overlap) {
  const int n = grid.n();
  const Lattice& L = grid.lattice;
  std::vector<Chart> charts;
  int total = 1;
  for (int a = 0; a < n; ++a) total *= m;
  for (int c = 0; c < total; ++c) {
    Vec t(n);
    int r = c;
    for (int a = n - 1; a >= 0; --a) {
      t(a) = static_cast<double>(r % m) / m;
      r /= m;
    }
    charts.push_back({L.to_physical(t), 0.0, c});
  }
  double cover = 0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    Vec x = grid.point(p);
    double best = INFINITY;
    for (const auto& ch : charts) best = std::min(best, L.min_image(x - ch.center).norm());
    cover = std::max(cover, best);
  }
  const double cap = 0.49 * L.shortest_vector();
  const double radius = std::min(overlap * cover, cap);
  if (radius <= 1.02 * cover) {
    std::ostringstream os;
    os << m << " charts per direction cannot cover with translate-disjoint balls (covering radius " << cover
       << ", cap " << cap << ")";
    throw CoverageError(os.str());
  }
  for (auto& ch : charts) ch.radius = radius;
  return charts;
}

std::vector<RankOneTerm> chart_decompose(const MetricField& G, const Chart& chart, const PeriodicField& chi,
                                         double delta_pos) {
  const GridSpec& grid = G.g.grid;
  const int n = grid.n();
  const auto forms = positive_span_forms(n);
  const int nf = static_cast<int>(forms.size());

  // G at the centre through the trigonometric interpolant
  Vec gc = Interpolant(G.g)(chart.center);
  Mat Gc(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) Gc(i, j) = Gc(j, i) = gc(sym_index(i, j, n));
  Eigen::SelfAdjointEigenSolver<Mat> es(Gc);
  if (!(es.eigenvalues()(0) > 0)) {
    std::ostringstream os;
    os << "defect is not positive-definite at chart " << chart.index << " centre";
    throw PositivityError(os.str());
  }
  Mat M = es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();

  // forms adapted to G(centre): G(centre) = M I M and I = (1/n) sum f f^T
  std::vector<Vec> adapted(nf);
  Vec c0(nf);
  Mat B(sym_count(n), nf);
  for (int k = 0; k < nf; ++k) {
    Vec g = M * forms[k];
    double len = g.norm();
    adapted[k] = g / len;
    c0(k) = len * len / n;
    B.col(k) = svec(adapted[k] * adapted[k].transpose());
  }
  Mat Bp = B.completeOrthogonalDecomposition().pseudoInverse();
  Vec base = svec(Gc);

  std::vector<RankOneTerm> terms;
  for (int k = 0; k < nf; ++k)
    terms.push_back({chart, adapted[k], PeriodicField::scalar(grid), k, INFINITY});
  for (std::size_t p = 0; p < grid.size(); ++p) {
    double x = chi.at(0, p);
    if (x == 0.0) continue;
    Vec c = c0 + Bp * (svec(sym_at(G.g, p)) - base);
    for (int k = 0; k < nf; ++k) {
      if (!(c(k) >= delta_pos)) {
        std::ostringstream os;
        os << "coefficient " << k << " of chart " << chart.index << " drops to " << c(k) << " < " << delta_pos
           << " at grid point " << p;
        throw PositivityError(os.str());
      }
      terms[k].c_min = std::min(terms[k].c_min, c(k));
      terms[k].a.at(0, p) = x * std::pow(c(k), 0.25);
    }
  }
  return terms;
}

double reconstruction_error(const std::vector<RankOneTerm>& terms, const MetricField& target) {
  PeriodicField sum = PeriodicField::sym2(target.g.grid);
  for (const auto& t : terms) {
    PeriodicField h = term_tensor(t);
    for (std::size_t i = 0; i < sum.data.size(); ++i) sum.data[i] += h.data[i];
  }
  double err = 0;
  for (std::size_t i = 0; i < sum.data.size(); ++i) err = std::max(err, std::abs(sum.data[i] - target.g.data[i]));
  return err;
}

PropertyEDecomposition decompose_defect(const MetricField& G, const GridSpec& grid, const DecomposeOptions& opt) {
  const double gnorm = G.g.sup_norm();
  const double dpos = opt.delta_pos * gnorm;
  int m = opt.per_direction;
  for (int refine = 0;; ++refine, m *= 2) {
    try {
      PropertyEDecomposition d;
      d.charts = chart_cover(grid, m, opt.overlap);
      auto chi = partition_of_unity(d.charts, grid);
      for (std::size_t l = 0; l < d.charts.size(); ++l) {
        PeriodicField w = chi[l];
        auto terms = chart_decompose(G, d.charts[l], w, dpos);
        for (auto& t : terms) d.terms.push_back(std::move(t));
      }
      d.target = G;
      d.target_norm = gnorm;
      d.per_direction = m;
      d.refinements = refine;
      d.reconstruction_error = reconstruction_error(d.terms, G);
      d.min_coefficient = INFINITY;
      for (const auto& t : d.terms) d.min_coefficient = std::min(d.min_coefficient, t.c_min);
      return d;
    } catch (const PositivityError&) {
      if (refine >= opt.max_refinements) throw;
    }
  }
}

}  // namespace isoembed
