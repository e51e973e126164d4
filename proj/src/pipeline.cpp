#include "isoembed/pipeline.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "isoembed/errors.hpp"
#include "isoembed/io.hpp"

namespace isoembed {

using nlohmann::json;

EquivariantMap pad_to_q(const EquivariantMap& u, int q) {
  const int n = u.n();
  const int need = sym_count(n) + n + 5;
  if (q < need || q < u.q()) {
    std::ostringstream os;
    os << "q = " << q << " violates q >= s_n + n + 5 = " << need << " (and q >= " << u.q()
       << ", the dimension of the initial embedding)";
    throw DimensionError(os.str());
  }
  if (q == u.q()) return u;
  PeriodicField phi = PeriodicField::vector(u.grid, q);
  std::copy(u.phi.data.begin(), u.phi.data.end(), phi.data.begin());
  Mat A = Mat::Zero(q, n);
  A.topRows(u.q()) = u.A;
  return EquivariantMap(u.grid, A, phi);
}

Separation separation_radius(const EquivariantMap& u, const Chart& chart) {
  const GridSpec& grid = u.grid;
  const Lattice& L = grid.lattice;
  const auto mask = chart_mask(chart, grid);
  std::vector<Vec> U;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    if (!mask[p]) continue;
    Vec x = chart.center + L.min_image(grid.point(p) - chart.center);
    Vec v = u.A * x;
    for (int k = 0; k < u.q(); ++k) v(k) += u.phi.at(k, p);
    U.push_back(v);
  }
  Separation s;
  for (const auto& v : U) s.diameter = std::max(s.diameter, 2 * (v - U.front()).norm());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    double a = 0;
    for (int k = 0; k < u.q(); ++k) a += u.phi.at(k, p) * u.phi.at(k, p);
    s.phi_norm = std::max(s.phi_norm, std::sqrt(a));
  }
  Eigen::JacobiSVD<Mat> svd(u.A);
  const double amin = svd.singularValues()(u.n() - 1);
  if (!(amin > 0)) throw std::invalid_argument("separation_radius needs an injective affine part");

  auto set_distance = [&](const Vec& shift) {
    std::vector<double> best(U.size(), INFINITY);
    for_each_index(Exec::parallel, U.size(), [&](std::size_t i) {
      double b = INFINITY;
      for (const auto& w : U) b = std::min(b, (U[i] - w - shift).squaredNorm());
      best[i] = b;
    });
    double m = INFINITY;
    for (double b : best) m = std::min(m, b);
    return std::sqrt(m);
  };

  double r = L.shortest_vector();
  std::vector<DeckTransform> done;
  while (true) {
    auto shell = neighbor_shell(L, r);
    for (const auto& t : shell) {
      if (std::find(done.begin(), done.end(), t) != done.end()) continue;
      s.radius = std::min(s.radius, set_distance(u.shift(t)));
      done.push_back(t);
    }
    s.shell = shell;
    s.shell_radius = r;
    double need = (s.radius + 2 * s.phi_norm + s.diameter) / amin;
    if (need <= r) break;
    r = need;
  }
  return s;
}

json certificate_json(const FreenessCertificate& c) {
  return {{"sigma_min", c.sigma_min}, {"sigma_rel", c.sigma_rel}, {"worst_point", c.worst_point},
          {"threshold", c.threshold}, {"valid", c.valid}};
}

namespace {

void setup_threads(const Config& c) {
  if (c.threads > 0) omp_set_num_threads(c.threads);
}

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json freemap_json(const InitialEmbedding& e) {
  json dirs = json::array();
  for (const auto& d : e.directions) dirs.push_back(vec_json(d));
  return {{"dimension", e.u0.q()}, {"scale", e.scale}, {"halvings", e.halvings},
          {"directions", dirs}, {"rejections", e.rejections}, {"certificate", certificate_json(e.certificate)}};
}

json decompose_json(const PropertyEDecomposition& d) {
  json charts = json::array();
  for (const auto& ch : d.charts)
    charts.push_back({{"index", ch.index}, {"center", vec_json(ch.center)}, {"radius", ch.radius},
                      {"translate_disjoint", chart_translate_disjoint(ch, d.target.g.grid.lattice)}});
  return {{"terms", d.terms.size()}, {"charts", charts}, {"per_direction", d.per_direction},
          {"refinements", d.refinements}, {"reconstruction_error", d.reconstruction_error},
          {"target_norm", d.target_norm}, {"min_coefficient", d.min_coefficient}};
}

json term_json(const TermDiagnostics& t) {
  return {{"K", t.K}, {"iterations", t.iterations}, {"residual_history", t.residual_history},
          {"displacement", t.displacement}, {"residual", t.residual}, {"sigma_rel", t.sigma_rel},
          {"eps", t.eps},
          {"twist", {{"used", t.twist.used}, {"ratio", t.twist.ratio}, {"lambda", t.twist.lambda},
                     {"frame", t.twist.frame}, {"xi", t.twist.xi}, {"eta", t.twist.eta},
                     {"amplitude", t.twist.amplitude}, {"error", t.twist.error}}}};
}

// Smallest distance between chart samples and samples outside the chart.
double chart_complement_distance(const EquivariantMap& u, const std::vector<std::uint8_t>& mask) {
  std::vector<std::size_t> in, out;
  for (std::size_t p = 0; p < mask.size(); ++p) (mask[p] ? in : out).push_back(p);
  std::vector<Vec> ui(in.size()), uo(out.size());
  for (std::size_t i = 0; i < in.size(); ++i) ui[i] = u.sample(in[i]);
  for (std::size_t i = 0; i < out.size(); ++i) uo[i] = u.sample(out[i]);
  std::vector<double> best(ui.size(), INFINITY);
  for_each_index(Exec::parallel, ui.size(), [&](std::size_t i) {
    double b = INFINITY;
    for (const auto& w : uo) b = std::min(b, (ui[i] - w).squaredNorm());
    best[i] = b;
  });
  double m = INFINITY;
  for (double b : best) m = std::min(m, b);
  return std::sqrt(m);
}

void fail_report(PipelineReport& r, const Error& e, const std::string& stage) {
  r.passed = false;
  r.failed_stage = stage;
  r.failed_property = e.property();
  r.diagnostics["failure"] = {{"stage", stage}, {"error", e.kind()}, {"property", e.property()}, {"message", e.what()}};
}

void run_gates(const Config& c, const MetricField& g, const EquivariantMap& u, PipelineReport& r) {
  json gates;
  IsometryReport iso = check_isometry(u, g, c.isometry_tol);
  gates["isometry"] = {{"residual", iso.residual}, {"worst_point", iso.worst_point}, {"worst_entry", iso.worst_entry},
                       {"tol", iso.tol}, {"passed", iso.passed}};
  FreenessCertificate fc = check_freeness(u, c.freeness_threshold);
  gates["freeness"] = certificate_json(fc);
  gates["freeness"]["passed"] = fc.valid;
  EquivarianceReport eq = check_equivariance(u, c.equivariance_trials, c.verify_seed, c.equivariance_tol);
  gates["equivariance"] = {{"max_residual", eq.max_residual}, {"tol", c.equivariance_tol}, {"passed", eq.passed}};
  const double cinj = c.c_inj > 0 ? c.c_inj : 1e-3 * mean_metric_scale(g);
  InjectivityReport inj = check_injectivity(u, c.injectivity_pairs, c.verify_seed, cinj, c.freeness_threshold);
  gates["injectivity"] = {{"pairs", inj.pairs}, {"c_inj", inj.c_inj}, {"worst_ratio", inj.worst_ratio},
                          {"doubled", inj.doubled}, {"local_sigma_rel", inj.local.sigma_rel}, {"passed", inj.passed}};
  if (inj.x.size() > 0) {
    gates["injectivity"]["worst_pair"] = {{"x", vec_json(inj.x)}, {"y", vec_json(inj.y)}, {"tau", inj.tau.k}};
  }
  r.diagnostics["gates"] = gates;
  r.passed = true;
  const std::pair<const char*, bool> order[] = {
      {"isometry", iso.passed}, {"freeness", fc.valid}, {"equivariance", eq.passed}, {"injectivity", inj.passed}};
  const char* props[] = {"du.du = g", "free map", "u(x + tau) = u(x) + A tau", "embedding (no self-intersection)"};
  for (int i = 0; i < 4; ++i)
    if (!order[i].second) {
      r.passed = false;
      r.failed_stage = std::string("verify/") + order[i].first;
      r.failed_property = props[i];
      r.diagnostics["failure"] = {{"stage", r.failed_stage}, {"property", r.failed_property}};
      break;
    }
}

}  // namespace

PipelineReport run_freemap(const Config& c) {
  setup_threads(c);
  PipelineReport r;
  GridSpec grid = make_grid(c);
  MetricField g = make_metric(c, grid);
  try {
    InitialEmbedding e = initial_embedding(g, grid, c.projection_seed, c.freeness_threshold, c.projection_retries,
                                           c.delta_short, c.affine_fraction, c.projection_candidates);
    r.diagnostics["freemap"] = freemap_json(e);
    ShortnessReport sr = defect_report(g, e.u0, c.delta_short);
    r.diagnostics["freemap"]["defect_min_eigenvalue"] = sr.min_eigenvalue;
    r.diagnostics["freemap"]["shortness_margin"] = sr.margin;
    r.u = e.u0;
    r.passed = e.certificate.valid;
    if (!r.passed) {
      r.failed_stage = "freemap";
      r.failed_property = "free map";
    }
  } catch (const DimensionError&) {
    throw;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail_report(r, e, "freemap");
  }
  return r;
}

PipelineReport run_decompose(const Config& c, PropertyEDecomposition* out) {
  setup_threads(c);
  PipelineReport r;
  GridSpec grid = make_grid(c);
  MetricField g = make_metric(c, grid);
  std::string stage = "freemap";
  try {
    InitialEmbedding e = initial_embedding(g, grid, c.projection_seed, c.freeness_threshold, c.projection_retries,
                                           c.delta_short, c.affine_fraction, c.projection_candidates);
    r.diagnostics["freemap"] = freemap_json(e);
    EquivariantMap u = pad_to_q(e.u0, c.q);
    stage = "shortness";
    ShortnessReport sr = shortness_defect(g, u, c.delta_short);
    stage = "decompose";
    PropertyEDecomposition d = decompose_defect(sr.G, grid, c.charts);
    r.diagnostics["decompose"] = decompose_json(d);
    r.u = u;
    r.passed = d.reconstruction_error <= 1e-8 * d.target_norm;
    if (!r.passed) {
      r.failed_stage = "decompose";
      r.failed_property = "sum of terms = defect";
    }
    if (out) *out = std::move(d);
  } catch (const DimensionError&) {
    throw;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail_report(r, e, stage);
  }
  return r;
}

PipelineReport run_perturb(const Config& c) {
  setup_threads(c);
  PipelineReport r;
  GridSpec grid = make_grid(c);
  MetricField g = make_metric(c, grid);
  std::string stage = "freemap";
  try {
    InitialEmbedding e = initial_embedding(g, grid, c.projection_seed, c.freeness_threshold, c.projection_retries,
                                           c.delta_short, c.affine_fraction, c.projection_candidates);
    EquivariantMap u = pad_to_q(e.u0, c.q);
    stage = "shortness";
    ShortnessReport sr = shortness_defect(g, u, c.delta_short);
    stage = "decompose";
    PropertyEDecomposition d = decompose_defect(sr.G, grid, c.charts);
    if (c.perturb_term >= static_cast<int>(d.terms.size()))
      throw ConfigError("/perturb/term: index beyond the " + std::to_string(d.terms.size()) + " terms");
    const RankOneTerm& term = d.terms[c.perturb_term];
    PeriodicField h = term_tensor(term);
    if (c.perturb_scale > 0) {
      const double factor = c.perturb_scale / h.sup_norm();
      for (double& v : h.data) v *= factor;
    }
    stage = "separation";
    Separation sep = separation_radius(u, term.chart);
    const double eps = std::min(0.5 * sep.radius, c.global_cap);
    stage = "perturb";
    StagedResult res = staged_perturb(u, h, term, eps, c.perturb);
    r.diagnostics["term"] = term_json(res.diag);
    r.diagnostics["term"]["index"] = c.perturb_term;
    r.diagnostics["term"]["separation_radius"] = sep.radius;
    r.diagnostics["term"]["increment_norm"] = h.sup_norm();
    r.u = res.w;
    r.passed = res.diag.residual <= c.tol_residual * res.diag.K;
    if (!r.passed) {
      r.failed_stage = "perturb";
      r.failed_property = "du.du = dw.dw + h on the chart";
    }
  } catch (const DimensionError&) {
    throw;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail_report(r, e, stage);
  }
  return r;
}

PipelineReport run_verify(const Config& c, const EquivariantMap& u) {
  setup_threads(c);
  PipelineReport r;
  GridSpec grid = make_grid(c);
  if (!(u.grid == grid)) throw ConfigError("/resolution: map grid does not match the config");
  MetricField g = make_metric(c, grid);
  run_gates(c, g, u, r);
  r.u = u;
  return r;
}

PipelineReport run(const Config& c) {
  setup_threads(c);
  PipelineReport r;
  GridSpec grid = make_grid(c);
  MetricField g = make_metric(c, grid);
  const int n = grid.n();
  if (c.q < sym_count(n) + n + 5) {
    std::ostringstream os;
    os << "q = " << c.q << " violates q >= s_n + n + 5 = " << sym_count(n) + n + 5;
    throw DimensionError(os.str());
  }
  r.diagnostics["n"] = n;
  r.diagnostics["q"] = c.q;
  std::string stage = "freemap";
  try {
    InitialEmbedding e = initial_embedding(g, grid, c.projection_seed, c.freeness_threshold, c.projection_retries,
                                           c.delta_short, c.affine_fraction, c.projection_candidates);
    r.diagnostics["freemap"] = freemap_json(e);
    if (!e.certificate.valid) throw RankError("initial embedding fails the freeness certificate");
    EquivariantMap u = pad_to_q(e.u0, c.q);
    const EquivariantMap u0 = u;
    stage = "shortness";
    ShortnessReport sr = shortness_defect(g, u, c.delta_short);
    r.diagnostics["shortness"] = {{"min_eigenvalue", sr.min_eigenvalue}, {"margin", sr.margin}};
    stage = "decompose";
    PropertyEDecomposition d = decompose_defect(sr.G, grid, c.charts);
    r.diagnostics["decompose"] = decompose_json(d);

    const std::size_t L = d.terms.size();
    json stages = json::array();
    double eps_sum = 0;
    for (std::size_t l = 0; l < L; ++l) {
      const RankOneTerm& term = d.terms[l];
      stage = "perturb/term " + std::to_string(l);
      Separation sep = separation_radius(u, term.chart);
      const double eps = std::min(0.5 * sep.radius, c.global_cap / static_cast<double>(L));
      StagedResult res = staged_perturb(u, term, eps, c.perturb);
      const auto mask = chart_mask(term.chart, grid);
      long changed_outside = 0;
      for (std::size_t p = 0; p < grid.size(); ++p)
        if (!mask[p])
          for (int k = 0; k < u.q(); ++k)
            if (std::memcmp(&res.w.phi.at(k, p), &u.phi.at(k, p), sizeof(double)) != 0) ++changed_outside;
      json sj = term_json(res.diag);
      sj["chart"] = term.chart.index;
      sj["form"] = term.form;
      sj["separation_radius"] = sep.radius;
      sj["shell_size"] = sep.shell.size();
      sj["changed_outside"] = changed_outside;
      sj["chart_complement_distance"] = chart_complement_distance(res.w, mask);
      stages.push_back(sj);
      r.diagnostics["stages"] = stages;
      eps_sum += eps;
      if (changed_outside != 0) throw BudgetError("samples outside the chart changed");
      u = res.w;
    }
    r.diagnostics["stages"] = stages;
    r.diagnostics["eps_sum"] = eps_sum;
    r.diagnostics["total_displacement"] = displacement(u, u0);
    stage = "verify";
    r.u = u;
    run_gates(c, g, u, r);
  } catch (const DimensionError&) {
    throw;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail_report(r, e, stage);
  }
  return r;
}

}  // namespace isoembed
