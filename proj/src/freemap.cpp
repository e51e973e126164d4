#include "isoembed/freemap.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "isoembed/errors.hpp"

namespace isoembed {

namespace {

FreenessCertificate certify_rows(const std::vector<double>& rows, std::size_t P, int r, int q,
                                 double threshold, Exec e) {
  std::vector<double> scale(r, 0.0);
  const std::size_t blk = static_cast<std::size_t>(r) * q;
  for (std::size_t p = 0; p < P; ++p)
    for (int i = 0; i < r; ++i) {
      double s = 0;
      for (int k = 0; k < q; ++k) s += rows[p * blk + i * q + k] * rows[p * blk + i * q + k];
      scale[i] = std::max(scale[i], std::sqrt(s));
    }
  std::vector<double> rel(P), raw(P);
  std::vector<double> ones(r, 1.0);
  scaled_sigma_batch(rows.data(), P, r, q, scale.data(), rel.data(), e);
  scaled_sigma_batch(rows.data(), P, r, q, ones.data(), raw.data(), e);
  FreenessCertificate c;
  c.threshold = threshold;
  c.sigma_rel = INFINITY;
  c.sigma_min = INFINITY;
  for (std::size_t p = 0; p < P; ++p) {
    if (rel[p] < c.sigma_rel) {
      c.sigma_rel = rel[p];
      c.worst_point = p;
    }
    c.sigma_min = std::min(c.sigma_min, raw[p]);
  }
  c.valid = c.sigma_rel > threshold;
  return c;
}

std::vector<double> extract_rows(const Jet& jet, int row0, int rows) {
  const std::size_t blk = static_cast<std::size_t>(rows) * jet.q;
  std::vector<double> out(jet.P * blk);
  for (std::size_t p = 0; p < jet.P; ++p) {
    const double* src = jet.at(p) + static_cast<std::size_t>(row0) * jet.q;
    std::copy(src, src + blk, out.data() + p * blk);
  }
  return out;
}

}  // namespace

FreenessCertificate block_certificate(const Jet& jet, int row0, int rows, double threshold, Exec e) {
  return certify_rows(extract_rows(jet, row0, rows), jet.P, rows, jet.q, threshold, e);
}

FreenessCertificate freeness_certificate(const Jet& jet, double threshold, Exec e) {
  return block_certificate(jet, 0, jet.rows(), threshold, e);
}

EquivariantMap whitney_torus(const GridSpec& grid) {
  const int n = grid.n();
  PeriodicField phi = PeriodicField::vector(grid, 2 * n);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    Vec t = grid.lattice_point(p);
    for (int a = 0; a < n; ++a) {
      double ang = 2 * std::numbers::pi * t(a);
      phi.at(2 * a, p) = std::cos(ang);
      phi.at(2 * a + 1, p) = std::sin(ang);
    }
  }
  return EquivariantMap(grid, Mat::Zero(2 * n, n), phi);
}

EquivariantMap veronese_lift(const EquivariantMap& w) {
  if (!w.A.isZero(0)) throw std::invalid_argument("veronese_lift expects a pure periodic map");
  const int m = w.q();
  const int out = m + sym_count(m);
  PeriodicField phi = PeriodicField::vector(w.grid, out);
  for (std::size_t p = 0; p < w.grid.size(); ++p) {
    for (int i = 0; i < m; ++i) phi.at(i, p) = w.phi.at(i, p);
    int idx = m;
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) phi.at(idx++, p) = w.phi.at(i, p) * w.phi.at(j, p);
  }
  return EquivariantMap(w.grid, Mat::Zero(out, w.n()), phi);
}

Mat perp_basis(const Vec& v) {
  const int q = static_cast<int>(v.size());
  Mat vm = v;
  Eigen::HouseholderQR<Mat> qr(vm);
  Mat Q = qr.householderQ() * Mat::Identity(q, q);
  return Q.rightCols(q - 1);
}

EquivariantMap project(const EquivariantMap& f, const Mat& P) {
  const int qo = static_cast<int>(P.cols());
  PeriodicField phi = PeriodicField::vector(f.grid, qo);
  const int qi = f.q();
  for_each_index(Exec::parallel, f.grid.size(), [&](std::size_t p) {
    for (int j = 0; j < qo; ++j) {
      double acc = 0;
      for (int k = 0; k < qi; ++k) acc += P(k, j) * f.phi.at(k, p);
      phi.at(j, p) = acc;
    }
  });
  return EquivariantMap(f.grid, P.transpose() * f.A, phi);
}

ProjectionCheck check_projection(const Jet& jet, const Vec& v, double threshold) {
  Mat P = perp_basis(v.normalized());
  const int qo = jet.q - 1;
  Jet pj;
  pj.n = jet.n;
  pj.q = qo;
  pj.s = jet.s;
  pj.P = jet.P;
  pj.all.resize(pj.P * pj.block());
  const int r = jet.rows();
  for_each_index(Exec::parallel, jet.P, [&](std::size_t p) {
    const double* src = jet.at(p);
    double* dst = pj.all.data() + p * pj.block();
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < qo; ++j) {
        double acc = 0;
        for (int k = 0; k < jet.q; ++k) acc += src[i * jet.q + k] * P(k, j);
        dst[i * qo + j] = acc;
      }
  });
  ProjectionCheck c;
  c.first = block_certificate(pj, 0, pj.n, threshold);
  c.second = block_certificate(pj, pj.n, pj.s, threshold);
  c.accepted = c.first.valid && c.second.valid;
  return c;
}

ProjectionResult generic_projection_reduce(const EquivariantMap& f, int target_q, std::uint64_t seed,
                                           double threshold, int retries, int candidates) {
  const int n = f.n();
  if (target_q < sym_count(n) + n) throw std::invalid_argument("target dimension below s_n + n");
  ProjectionResult res{f, {}, {}};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  while (res.map.q() > target_q) {
    const int q = res.map.q();
    Jet jet = compute_jet(res.map);
    int rejected = 0, admitted = 0;
    Vec best;
    double best_score = -1;
    while (admitted < std::max(candidates, 1)) {
      Vec v(q);
      for (int k = 0; k < q; ++k) v(k) = normal(rng);
      v.normalize();
      ProjectionCheck c = check_projection(jet, v, threshold);
      if (c.accepted) {
        ++admitted;
        double score = std::min(c.first.sigma_rel, c.second.sigma_rel);
        if (score > best_score) {
          best_score = score;
          best = v;
        }
        continue;
      }
      if (++rejected >= retries) {
        std::ostringstream os;
        os << "no admissible projection direction from R^" << q << " after " << rejected << " draws";
        throw GenericityError(os.str());
      }
    }
    res.map = project(res.map, perp_basis(best));
    res.directions.push_back(best);
    res.rejections.push_back(rejected);
  }
  return res;
}

InitialEmbedding initial_embedding(const MetricField& g, const GridSpec& grid, std::uint64_t seed,
                                   double threshold, int retries, double delta_short, double affine_fraction,
                                   int candidates) {
  const int n = grid.n();
  const int s = sym_count(n);
  ProjectionResult w0 = generic_projection_reduce(veronese_lift(whitney_torus(grid)), s + n, seed, threshold, retries,
                                                  candidates);
  const int q = s + 2 * n;
  PeriodicField phi = PeriodicField::vector(grid, q);
  for (int k = 0; k < s + n; ++k) std::copy(w0.map.phi.comp(k), w0.map.phi.comp(k) + grid.size(), phi.comp(n + k));
  Mat A = Mat::Zero(q, n);
  A.topRows(n) = Mat::Identity(n, n);
  InitialEmbedding out{EquivariantMap(grid, A, phi), {}, 1.0, 0, w0.directions, w0.rejections};
  if (affine_fraction <= 0) {
    ScaledMap sc = scale_until_short(g, out.u0, delta_short);
    out.u0 = sc.u;
    out.scale = sc.c;
    out.halvings = sc.halvings;
  } else {
    // the x block and the w0 block are orthogonal, so du.du = a^2 I + b^2 dw0.dw0:
    // a takes a fixed share of g and the w0 block is halved until the defect
    // keeps half of the remainder
    double lmin = INFINITY;
    for (std::size_t p = 0; p < grid.size(); ++p) lmin = std::min(lmin, min_eigenvalue(sym_at(g.g, p)));
    if (!(lmin > 0)) throw ScalingError("metric is not positive-definite");
    const double a = std::sqrt(std::min(affine_fraction, 1.0) * lmin);
    MetricField rest = g;
    for (int i = 0; i < n; ++i)
      for (double* x = rest.g.comp(sym_index(i, i, n)); x != rest.g.comp(sym_index(i, i, n)) + grid.size(); ++x)
        *x -= a * a;
    ScaledMap sc = scale_until_short(rest, EquivariantMap(grid, Mat::Zero(q, n), phi),
                                     std::max(delta_short, 0.5 / n));
    out.u0 = EquivariantMap(grid, a * A, sc.u.phi);
    out.scale = sc.c;
    out.halvings = sc.halvings;
    shortness_defect(g, out.u0, delta_short);
  }
  out.certificate = freeness_certificate(compute_jet(out.u0), threshold);
  return out;
}

}  // namespace isoembed
