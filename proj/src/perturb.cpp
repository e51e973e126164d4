#include "isoembed/perturb.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "isoembed/errors.hpp"

namespace isoembed {

namespace {

double rel_sigma(const Mat& A, double* sigma) {
  Eigen::JacobiSVD<Mat> svd(A);
  const auto& s = svd.singularValues();
  double smin = s.size() < A.rows() ? 0.0 : s(A.rows() - 1);
  if (sigma) *sigma = smin;
  double rmax = A.rowwise().norm().maxCoeff();
  return rmax > 0 ? smin / rmax : 0.0;
}

// Sum over components of d_i v . d_j v at grid point p.
double dvdv(const PeriodicField& dv, int n, int q, std::size_t p, int i, int j) {
  double acc = 0;
  for (int k = 0; k < q; ++k) acc += dv.at(k * n + i, p) * dv.at(k * n + j, p);
  return acc;
}

double sup_dvdv(const PeriodicField& dv, int n, int q) {
  double m = 0;
  for (std::size_t p = 0; p < dv.size(); ++p)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) m = std::max(m, std::abs(dvdv(dv, n, q, p, i, j)));
  return m;
}

EquivariantMap add_periodic(const EquivariantMap& w, const PeriodicField& v) {
  EquivariantMap r = w;
  for (std::size_t i = 0; i < r.phi.data.size(); ++i) r.phi.data[i] += v.data[i];
  return r;
}

PeriodicField metric_difference(const MetricField& a, const MetricField& b) {
  PeriodicField d = a.g;
  for (std::size_t i = 0; i < d.data.size(); ++i) d.data[i] -= b.g.data[i];
  return d;
}

}  // namespace

PointwiseSystem assemble_system(const Jet& jet, std::size_t p, double threshold) {
  PointwiseSystem s;
  s.A.resize(jet.rows(), jet.q);
  for (int i = 0; i < jet.rows(); ++i)
    for (int k = 0; k < jet.q; ++k) s.A(i, k) = jet.at(p)[i * jet.q + k];
  s.rhs = Vec::Zero(jet.rows());
  double rel = rel_sigma(s.A, &s.sigma_min);
  if (!(rel > threshold)) {
    std::ostringstream os;
    os << "normal-system matrix loses rank at grid point " << p << " (relative sigma_min " << rel << ")";
    throw RankError(os.str());
  }
  s.pinv = s.A.completeOrthogonalDecomposition().pseudoInverse();
  return s;
}

ChartSolver::ChartSolver(const EquivariantMap& w, std::vector<std::uint8_t> mask, double rank_threshold)
    : w_(w), mask_(std::move(mask)), jet_(compute_jet(w)) {
  for (std::size_t p = 0; p < mask_.size(); ++p)
    if (mask_[p]) points_.push_back(p);
  const int r = jet_.rows(), q = jet_.q;
  const std::size_t blk = jet_.block();
  std::vector<double> mats(points_.size() * blk);
  for (std::size_t m = 0; m < points_.size(); ++m)
    std::copy(jet_.at(points_[m]), jet_.at(points_[m]) + blk, mats.data() + m * blk);
  pinv_.resize(points_.size() * blk);
  std::vector<double> sigma(points_.size());
  pinv_batch(mats.data(), points_.size(), r, q, pinv_.data(), sigma.data());
  sigma_min_ = INFINITY;
  for (std::size_t m = 0; m < points_.size(); ++m) {
    double rmax = 0;
    for (int i = 0; i < r; ++i) {
      double s = 0;
      for (int k = 0; k < q; ++k) s += mats[m * blk + i * q + k] * mats[m * blk + i * q + k];
      rmax = std::max(rmax, std::sqrt(s));
    }
    double rel = rmax > 0 ? sigma[m] / rmax : 0.0;
    sigma_min_ = std::min(sigma_min_, sigma[m]);
    if (!(rel > rank_threshold)) {
      std::ostringstream os;
      os << "normal-system matrix loses rank at grid point " << points_[m] << " (relative sigma_min " << rel << ")";
      throw RankError(os.str());
    }
  }
}

PeriodicField ChartSolver::iterate(const PeriodicField& h, const PeriodicField* dv) const {
  const int n = jet_.n, s = jet_.s, q = jet_.q, r = jet_.rows();
  const std::size_t count = points_.size();
  std::vector<double> rhs(count * r, 0.0), out(count * q);
  for_each_index(Exec::parallel, count, [&](std::size_t m) {
    std::size_t p = points_[m];
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        int si = sym_index(i, j, n);
        double v = -0.5 * h.at(si, p);
        if (dv) v += 0.5 * dvdv(*dv, n, q, p, i, j);
        rhs[m * r + n + si] = v;
      }
  });
  (void)s;
  apply_batch(pinv_.data(), rhs.data(), count, r, q, out.data());
  PeriodicField v = PeriodicField::vector(h.grid, q);
  for (std::size_t m = 0; m < count; ++m)
    for (int k = 0; k < q; ++k) v.at(k, points_[m]) = out[m * q + k];
  return v;
}

PeriodicField ChartSolver::first_iterate(const PeriodicField& h) const { return iterate(h, nullptr); }

double ChartSolver::residual(const PeriodicField& dv, const PeriodicField& h) const {
  const int n = jet_.n, q = jet_.q;
  const std::size_t P = jet_.P;
  std::vector<double> worst(P, 0.0);
  for_each_index(Exec::parallel, P, [&](std::size_t p) {
    double m = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double acc = dvdv(dv, n, q, p, i, j) - h.at(sym_index(i, j, n), p);
        for (int k = 0; k < q; ++k)
          acc += jet_.d1(p, i, k) * dv.at(k * n + j, p) + jet_.d1(p, j, k) * dv.at(k * n + i, p);
        m = std::max(m, std::abs(acc));
      }
    worst[p] = m;
  });
  double m = 0;
  for (double v : worst) m = std::max(m, v);
  return m;
}

PerturbationState ChartSolver::solve(const PeriodicField& h, double eps_budget, const PerturbOptions& opt) const {
  const int q = jet_.q;
  PerturbationState st{PeriodicField::vector(h.grid, q), 0, {}, 0, false};
  PeriodicField dv = derivative(st.v, 1);
  PeriodicField best_v = st.v;
  double best = h.sup_norm();
  int bad = 0;
  for (int it = 0; it < opt.max_iterations; ++it) {
    if (opt.smoothing) low_pass(dv, opt.rho_cut);
    st.v = iterate(h, &dv);
    dv = derivative(st.v, 1);
    double res = residual(dv, h);
    if (res < best) {
      best = res;
      best_v = st.v;
    }
    st.iterations = it + 1;
    if (!st.residual_history.empty() && !(res < st.residual_history.back()))
      ++bad;
    else
      bad = 0;
    st.residual_history.push_back(res);
    if (res < opt.tol_residual) {
      st.converged = true;
      break;
    }
    if (bad >= 3 || !std::isfinite(res)) {
      if (opt.refine_passes > 0 && best < h.sup_norm()) break;
      std::ostringstream os;
      os << "residual failed to decrease for 3 iterations (at " << res << ", iteration " << it + 1 << ")";
      throw NonContractionError(os.str());
    }
  }
  if (!st.converged && opt.refine_passes > 0 && best < h.sup_norm()) {
    st.v = std::move(best_v);
  } else if (!st.converged) {
    std::ostringstream os;
    os << "iteration cap " << opt.max_iterations << " reached at residual " << st.residual_history.back();
    throw NonContractionError(os.str());
  }
  for (std::size_t p = 0; p < h.size(); ++p) {
    double s = 0;
    for (int k = 0; k < q; ++k) s += st.v.at(k, p) * st.v.at(k, p);
    st.v_sup = std::max(st.v_sup, std::sqrt(s));
  }
  if (st.v_sup > eps_budget) {
    std::ostringstream os;
    os << "|v|_inf = " << st.v_sup << " exceeds the budget " << eps_budget;
    throw BudgetError(os.str());
  }
  return st;
}

PerturbationState fixed_point_solve(const EquivariantMap& w, const PeriodicField& h,
                                    const std::vector<std::uint8_t>& mask, double eps_budget,
                                    const PerturbOptions& opt) {
  ChartSolver solver(w, mask, opt.rank_threshold);
  return solver.solve(h, eps_budget, opt);
}

double displacement(const EquivariantMap& a, const EquivariantMap& b) {
  double m = 0;
  for (std::size_t p = 0; p < a.grid.size(); ++p) {
    double s = 0;
    for (int k = 0; k < a.q(); ++k) {
      double d = a.phi.at(k, p) - b.phi.at(k, p);
      s += d * d;
    }
    m = std::max(m, std::sqrt(s));
  }
  return m;
}

EquivariantMap apply_twist(const EquivariantMap& w, const RankOneTerm& term, double eps, const PerturbOptions& opt,
                           const ChartSolver& solver, TwistInfo& info) {
  const GridSpec& grid = w.grid;
  const int q = w.q(), r = solver.jet().rows();
  const auto& pts = solver.points();
  info.used = true;

  // a^2 and its maximum over the chart
  double a2max = 0;
  for (std::size_t p : pts) a2max = std::max(a2max, term.a.at(0, p) * term.a.at(0, p));
  info.lambda = std::max(a2max / (opt.twist_budget * eps), 2 * std::numbers::pi * opt.min_cycles);
  info.amplitude = a2max / info.lambda;

  // normal frame: coordinate axes on which w vanishes identically, else
  // coordinate axes projected onto the complement of the free-map rows
  std::vector<int> unused;
  for (int k = 0; k < q; ++k) {
    bool zero = w.A.row(k).isZero(0);
    for (std::size_t p = 0; zero && p < grid.size(); ++p) zero = w.phi.at(k, p) == 0.0;
    if (zero) unused.push_back(k);
  }
  std::vector<Vec> xi(grid.size()), eta(grid.size());
  if (unused.size() >= 2) {
    info.frame = "constant";
    info.xi = unused[0];
    info.eta = unused[1];
    for (std::size_t p : pts) {
      xi[p] = Vec::Unit(q, info.xi);
      eta[p] = Vec::Unit(q, info.eta);
    }
  } else {
    info.frame = "projected";
    const std::size_t blk = solver.jet().block();
    // normal projection of axis k at chart point m: e_k - A^+ A e_k
    auto normal_axis = [&](std::size_t m, int k) {
      std::size_t p = pts[m];
      const double* A = solver.jet().at(p);
      const double* Pi = solver.pinv().data() + m * blk;
      Vec e = Vec::Unit(q, k);
      Vec Ae(r);
      for (int i = 0; i < r; ++i) Ae(i) = A[i * q + k];
      for (int j = 0; j < q; ++j) {
        double acc = 0;
        for (int i = 0; i < r; ++i) acc += Pi[j * r + i] * Ae(i);
        e(j) -= acc;
      }
      return e;
    };
    double best = -1;
    for (int a = 0; a < q; ++a)
      for (int b = 0; b < q; ++b) {
        if (a == b) continue;
        double worst = INFINITY;
        for (std::size_t m = 0; m < pts.size() && worst > best; ++m) {
          Vec x = normal_axis(m, a), y = normal_axis(m, b);
          double nx = x.norm();
          if (nx == 0) {
            worst = 0;
            break;
          }
          x /= nx;
          y -= x.dot(y) * x;
          worst = std::min(worst, std::min(nx, y.norm()));
        }
        if (worst > best) {
          best = worst;
          info.xi = a;
          info.eta = b;
        }
      }
    for (std::size_t m = 0; m < pts.size(); ++m) {
      Vec x = normal_axis(m, info.xi).normalized();
      Vec y = normal_axis(m, info.eta);
      y -= x.dot(y) * x;
      xi[pts[m]] = x;
      eta[pts[m]] = y.normalized();
    }
  }

  EquivariantMap out = w;
  for (std::size_t p : pts) {
    double a2 = term.a.at(0, p) * term.a.at(0, p);
    if (a2 == 0.0) continue;
    Vec d = grid.lattice.min_image(grid.point(p) - term.chart.center);
    double th = info.lambda * term.f.dot(d);
    Vec s = (a2 / info.lambda) * (std::cos(th) * xi[p] + std::sin(th) * eta[p]);
    for (int k = 0; k < q; ++k) out.phi.at(k, p) += s(k);
  }
  return out;
}

StagedResult staged_perturb(const EquivariantMap& w, const RankOneTerm& term, double eps_budget,
                            const PerturbOptions& opt) {
  return staged_perturb(w, term_tensor(term), term, eps_budget, opt);
}

StagedResult staged_perturb(const EquivariantMap& w, const PeriodicField& h, const RankOneTerm& term,
                            double eps_budget, const PerturbOptions& opt) {
  const auto mask = chart_mask(term.chart, w.grid);
  const int n = w.n();
  TermDiagnostics diag;
  diag.eps = eps_budget;
  const MetricField base = induced_metric(w);
  MetricField full = base;
  for (std::size_t i = 0; i < full.g.data.size(); ++i) full.g.data[i] += h.data[i];

  EquivariantMap w1 = w;
  {
    ChartSolver solver(w, mask, opt.rank_threshold);
    const double hn = h.sup_norm();
    bool twist = opt.twist == TwistMode::always;
    if (opt.twist == TwistMode::automatic && hn > 0) {
      PeriodicField dv1 = derivative(solver.first_iterate(h), 1);
      diag.twist.ratio = sup_dvdv(dv1, n, w.q()) / hn;
      twist = diag.twist.ratio > opt.twist_ratio;
    }
    if (twist) {
      w1 = apply_twist(w, term, eps_budget, opt, solver, diag.twist);
      PeriodicField e = metric_difference(full, induced_metric(w1));
      diag.twist.error = e.sup_norm();
    }
  }

  const MetricField start = induced_metric(w1);
  std::string last;
  for (int K = 1;; K *= 2) {
    if (K > opt.staging_cap) {
      std::ostringstream os;
      os << "staging exhausted at K = " << opt.staging_cap << " for the term on chart " << term.chart.index
         << " (last: " << last << ")";
      throw StagingExhaustedError(os.str());
    }
    try {
      EquivariantMap cur = w1;
      std::vector<int> its;
      std::vector<double> hist;
      // one solve toward start + t (full - start), absorbing accumulated drift
      auto step = [&](double t, const char* what, int k) {
        MetricField now = induced_metric(cur);
        PeriodicField inc = PeriodicField::sym2(w.grid);
        for (std::size_t i = 0; i < inc.data.size(); ++i)
          inc.data[i] = start.g.data[i] + t * (full.g.data[i] - start.g.data[i]) - now.g.data[i];
        ChartSolver solver(cur, mask, opt.rank_threshold);
        const double left = eps_budget - displacement(cur, w);
        PerturbationState st = solver.solve(inc, left, opt);
        if (opt.smoothing) {
          low_pass(st.v, opt.rho_cut);
          for (std::size_t p = 0; p < mask.size(); ++p)
            if (!mask[p])
              for (int c = 0; c < st.v.comps; ++c) st.v.at(c, p) = 0.0;
        }
        cur = add_periodic(cur, st.v);
        its.push_back(st.iterations);
        hist = st.residual_history;
        FreenessCertificate c = freeness_certificate(compute_jet(cur), opt.freeness_threshold);
        if (!c.valid) {
          std::ostringstream os;
          os << "freeness lost after " << what << " " << k << " of " << K << " (relative sigma " << c.sigma_rel << ")";
          throw NonContractionError(os.str());
        }
        diag.sigma_rel = c.sigma_rel;
      };
      for (int k = 1; k <= K; ++k) step(static_cast<double>(k) / K, "increment", k);
      if (opt.refine_passes > 0) {
        double res = metric_difference(induced_metric(cur), full).sup_norm();
        for (int k = 1; k <= opt.refine_passes && !(res <= opt.tol_residual); ++k) {
          step(1.0, "correction", k);
          res = metric_difference(induced_metric(cur), full).sup_norm();
        }
        if (!(res <= opt.tol_residual)) {
          std::ostringstream os;
          os << "residual " << res << " after " << opt.refine_passes << " correction passes";
          throw NonContractionError(os.str());
        }
      }
      diag.K = K;
      diag.iterations = its;
      diag.residual_history = hist;
      diag.displacement = displacement(cur, w);
      diag.residual = metric_difference(induced_metric(cur), full).sup_norm();
      if (diag.displacement > eps_budget) {
        std::ostringstream os;
        os << "displacement " << diag.displacement << " exceeds eps " << eps_budget;
        throw BudgetError(os.str());
      }
      return {cur, diag};
    } catch (const NonContractionError& e) {
      last = e.what();
    } catch (const BudgetError& e) {
      last = e.what();
    }
  }
}

}  // namespace isoembed
