#include "isoembed/verify.hpp"

#include <cmath>
#include <random>

namespace isoembed {

IsometryReport check_isometry(const EquivariantMap& u, const MetricField& g, double tol) {
  MetricField ind = induced_metric(u);
  IsometryReport r;
  r.tol = tol;
  for (int c = 0; c < ind.g.comps; ++c)
    for (std::size_t p = 0; p < ind.g.size(); ++p) {
      double d = std::abs(ind.g.at(c, p) - g.g.at(c, p));
      if (!(d <= r.residual)) {
        r.residual = std::isfinite(d) ? d : INFINITY;
        r.worst_point = p;
        r.worst_entry = c;
        if (!std::isfinite(d)) break;
      }
    }
  r.passed = r.residual <= tol;
  return r;
}

FreenessCertificate check_freeness(const EquivariantMap& u, double threshold) {
  return freeness_certificate(compute_jet(u), threshold);
}

double mean_metric_scale(const MetricField& g) {
  const int n = g.g.grid.n();
  double tr = 0;
  for (std::size_t p = 0; p < g.g.size(); ++p)
    for (int i = 0; i < n; ++i) tr += g.g.at(sym_index(i, i, n), p);
  return std::sqrt(tr / static_cast<double>(g.g.size()) / n);
}

namespace {

struct Pair {
  Vec x, y;
  DeckTransform tau;
  double ratio = INFINITY;
  bool checked = false;
};

InjectivityReport injectivity_pass(const EquivariantMap& u, int samples, std::uint64_t seed, double c_inj) {
  const GridSpec& grid = u.grid;
  const Lattice& L = grid.lattice;
  const int n = u.n();
  const double h = grid.spacing();
  std::vector<Pair> pairs;

  // exhaustive over grid pairs when affordable
  const std::size_t P = grid.size();
  if (static_cast<double>(P) * (P - 1) / 2 <= samples)
    for (std::size_t a = 0; a < P; ++a)
      for (std::size_t b = a + 1; b < P; ++b)
        pairs.push_back({grid.point(a), grid.point(b), DeckTransform::identity(n)});

  std::vector<DeckTransform> taus{DeckTransform::identity(n)};
  {
    std::vector<long> k(n, -1);
    while (true) {
      DeckTransform t{k};
      if (!t.is_identity()) taus.push_back(t);
      int a = n - 1;
      while (a >= 0 && k[a] == 1) k[a--] = -1;
      if (a < 0) break;
      ++k[a];
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, taus.size() - 1);
  for (int s = 0; s < samples; ++s) {
    Vec tx(n), ty(n);
    for (int a = 0; a < n; ++a) tx(a) = uni(rng);
    for (int a = 0; a < n; ++a) ty(a) = uni(rng);
    pairs.push_back({L.to_physical(tx), L.to_physical(ty), taus[pick(rng)]});
  }

  MapEvaluator ev(u);
  for_each_index(Exec::parallel, pairs.size(), [&](std::size_t i) {
    Pair& pr = pairs[i];
    Vec yt = pr.y + L.translation(pr.tau);
    double d = (pr.x - yt).norm();
    if (d < h) return;
    Vec ux = ev(pr.x);
    Vec uy = ev(pr.y) + u.shift(pr.tau);
    pr.ratio = (ux - uy).norm() / d;
    if (!std::isfinite(pr.ratio)) pr.ratio = -1;
    pr.checked = true;
  });
  InjectivityReport r;
  r.c_inj = c_inj;
  for (const auto& pr : pairs) {
    if (!pr.checked) continue;
    ++r.pairs;
    if (pr.ratio < r.worst_ratio) {
      r.worst_ratio = pr.ratio;
      r.x = pr.x;
      r.y = pr.y;
      r.tau = pr.tau;
    }
  }
  r.passed = r.worst_ratio >= c_inj;
  return r;
}

}  // namespace

InjectivityReport check_injectivity(const EquivariantMap& u, int samples, std::uint64_t seed, double c_inj,
                                    double local_threshold) {
  InjectivityReport r = injectivity_pass(u, samples, seed, c_inj);
  if (!r.passed) {
    // one retry at double density before declaring failure
    r = injectivity_pass(u, 2 * samples, seed + 1, c_inj);
    r.doubled = true;
  }
  r.local = block_certificate(compute_jet(u), 0, u.n(), local_threshold);
  r.passed = r.passed && r.local.valid;
  return r;
}

EquivarianceReport check_equivariance(const EquivariantMap& u, int trials, std::uint64_t seed, double tol) {
  const int n = u.n();
  const Lattice& L = u.lattice();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  std::uniform_int_distribution<long> kd(-3, 3);
  std::vector<Vec> xs(trials);
  std::vector<DeckTransform> ts(trials);
  for (int i = 0; i < trials; ++i) {
    Vec t(n);
    for (int a = 0; a < n; ++a) t(a) = uni(rng);
    xs[i] = L.to_physical(t);
    ts[i] = DeckTransform::identity(n);
    for (int a = 0; a < n; ++a) ts[i].k[a] = kd(rng);
  }
  MapEvaluator ev(u);
  std::vector<double> res(trials);
  for_each_index(Exec::parallel, trials, [&](std::size_t i) {
    Vec d = ev(xs[i] + L.translation(ts[i])) - ev(xs[i]) - u.shift(ts[i]);
    double r = d.norm();
    res[i] = std::isfinite(r) ? r : INFINITY;
  });
  EquivarianceReport r;
  for (double v : res) r.max_residual = std::max(r.max_residual, v);
  r.passed = r.max_residual <= tol;
  return r;
}

}  // namespace isoembed
