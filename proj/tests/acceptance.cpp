// Acceptance criteria; one PASS/FAIL line per criterion.
// Usage: acceptance [--criterion N]
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "isoembed/errors.hpp"
#include "isoembed/io.hpp"
#include "isoembed/pipeline.hpp"

using namespace isoembed;
using json = nlohmann::json;

namespace {

const std::string configs = std::string(ISOEMBED_SOURCE_DIR) + "/configs/";

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome dimensions() {
  const int want_q[] = {7, 10, 14}, want_u0[] = {3, 7, 12}, res[] = {64, 16, 8};
  bool ok = true;
  std::string d;
  for (int n = 1; n <= 3; ++n) {
    json j = {{"n", n}, {"lattice", json::array()}, {"resolution", res[n - 1]}, {"metric", {{"preset", "flat"}}}};
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) j["lattice"].push_back(a == b ? 1.0 : 0.0);
    Config c = parse_config(j);
    GridSpec g = make_grid(c);
    auto e = initial_embedding(make_metric(c, g), g, c.projection_seed);
    bool dim_ok = c.q == want_q[n - 1] && e.u0.q() == want_u0[n - 1] && e.certificate.valid;
    ok = ok && dim_ok;
    d += fmt("n=%d q=%d u0 in R^%d; ", n, c.q, e.u0.q());
  }
  return {ok, d};
}

Outcome circle() {
  Config c = load_config(configs + "circle.json");
  auto t0 = std::chrono::steady_clock::now();
  PipelineReport r = run(c);
  double secs = seconds_since(t0);
  const json& g = r.diagnostics["gates"];
  if (g.is_null()) return {false, "pipeline stopped before the gates: " + r.diagnostics["failure"].dump()};
  double iso = g["isometry"]["residual"], sig = g["freeness"]["sigma_rel"], eq = g["equivariance"]["max_residual"];
  bool inj = g["injectivity"]["passed"];
  bool ok = c.n == 1 && c.resolution == std::vector<int>{256} && c.injectivity_pairs == 10000 && iso <= 1e-6 &&
            sig > 1e-8 && eq <= 1e-12 && inj && secs < 60;
  return {ok, fmt("residual %.3g (<= 1e-6), sigma_rel %.3g (> 1e-8), equivariance %.3g (<= 1e-12), injectivity %s at "
                  "%d pairs, %.2f s (< 60 s)",
                  iso, sig, eq, inj ? "pass" : "fail", c.injectivity_pairs, secs)};
}

Outcome torus() {
  Config c = load_config(configs + "torus.json");
  bool setup = c.n == 2 && c.resolution == std::vector<int>{64, 64} && c.metric_preset == "conformal" &&
               c.phi.size() == 1 && c.phi[0].amp == 0.05;
  auto t0 = std::chrono::steady_clock::now();
  PipelineReport r = run(c);
  double secs = seconds_since(t0);
  if (!r.diagnostics.contains("gates"))
    return {false, fmt("no map: %s/%s failed (%s) after %.1f s", r.failed_stage.c_str(), r.failed_property.c_str(),
                       r.diagnostics["failure"]["message"].get<std::string>().c_str(), secs)};
  double iso = r.diagnostics["gates"]["isometry"]["residual"];
  bool ok = setup && r.passed && iso <= 1e-4 && secs < 600;
  return {ok, fmt("residual %.3g (<= 1e-4), gates %s, %.1f s (< 600 s)", iso, r.passed ? "pass" : "fail", secs)};
}

Outcome decomposition() {
  bool ok = true;
  std::string d;
  for (const char* name : {"circle.json", "torus.json"}) {
    Config c = load_config(configs + name);
    PropertyEDecomposition dec;
    PipelineReport r = run_decompose(c, &dec);
    if (dec.terms.empty()) return {false, std::string(name) + ": decomposition failed"};
    const GridSpec& grid = dec.target.g.grid;
    double recon = reconstruction_error(dec.terms, dec.target);
    double gnorm = dec.target.g.sup_norm();
    double dpos = c.delta_pos * gnorm;
    bool pos = true, disjoint = true;
    for (const auto& t : dec.terms) {
      auto mask = chart_mask(t.chart, grid);
      // c_k = (a / chi)^4 on the chart; recorded as c_min during the decomposition
      pos = pos && t.c_min >= dpos;
      disjoint = disjoint && chart_translate_disjoint(t.chart, grid.lattice);
      for (std::size_t p = 0; p < grid.size(); ++p)
        if (!mask[p] && t.a.at(0, p) != 0.0) disjoint = false;
    }
    ok = ok && recon <= 1e-8 * gnorm && pos && disjoint;
    d += fmt("%s: |sum h - G| = %.3g (<= %.3g), min c = %.3g (>= %.3g), disjoint %s; ", name, recon, 1e-8 * gnorm,
             dec.min_coefficient, dpos, disjoint ? "yes" : "no");
  }
  return {ok, d};
}

Outcome contraction() {
  Config c = load_config(configs + "circle.json");
  GridSpec grid = make_grid(c);
  MetricField g = make_metric(c, grid);
  auto e = initial_embedding(g, grid, c.projection_seed, c.freeness_threshold, c.projection_retries, c.delta_short);
  EquivariantMap w = pad_to_q(e.u0, c.q);
  auto dec = decompose_defect(shortness_defect(g, w, c.delta_short).G, grid, c.charts);
  const RankOneTerm& term = dec.terms[0];
  PeriodicField h = term_tensor(term);
  const double s = 1e-3 / h.sup_norm();
  for (auto& x : h.data) x *= s;
  auto mask = chart_mask(term.chart, grid);

  PerturbOptions opt = c.perturb;
  opt.tol_residual = 1e-9;
  opt.max_iterations = 30;
  ChartSolver solver(w, mask, opt.rank_threshold);
  PerturbationState st;
  try {
    st = solver.solve(h, INFINITY, opt);
  } catch (const Error& ex) {
    return {false, std::string("iteration stopped: ") + ex.what()};
  }
  bool mono = true;
  for (std::size_t i = 1; i < st.residual_history.size(); ++i)
    mono = mono && st.residual_history[i] < st.residual_history[i - 1];

  // first iterate: d(w+v).d(w+v) - dw.dw - h = dv.dv
  PeriodicField v1 = solver.first_iterate(h);
  EquivariantMap wv = w;
  for (std::size_t i = 0; i < v1.data.size(); ++i) wv.phi.data[i] += v1.data[i];
  auto a = induced_metric(wv), b = induced_metric(w);
  auto dv = derivative(v1, 1);
  double ident = 0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    double dd = 0;
    for (int k = 0; k < w.q(); ++k) dd += dv.at(k, p) * dv.at(k, p);
    ident = std::max(ident, std::abs(a.g.at(0, p) - b.g.at(0, p) - h.at(0, p) - dd));
  }
  double last = st.residual_history.back();
  bool ok = st.converged && mono && last < 1e-9 && st.iterations <= 30 && ident <= 1e-10;
  return {ok, fmt("|h| = 1e-3: residual %.3g after %d iterations (< 1e-9 within 30), monotone %s, first-iterate "
                  "identity %.3g (<= 1e-10)",
                  last, st.iterations, mono ? "yes" : "no", ident)};
}

Outcome local_guarantees() {
  Config c = load_config(configs + "circle.json");
  PipelineReport r = run(c);
  if (!r.diagnostics.contains("stages") || r.diagnostics["stages"].empty())
    return {false, "no completed stages"};
  bool ok = true;
  long changed = 0;
  double worst_v = 0, worst_eps = 0;
  for (const auto& st : r.diagnostics["stages"]) {
    changed += st["changed_outside"].get<long>();
    double v = st["displacement"], eps = st["eps"], sep = st["separation_radius"];
    ok = ok && v <= eps && eps <= 0.5 * sep;
    worst_v = std::max(worst_v, v / eps);
    worst_eps = std::max(worst_eps, eps / sep);
  }
  ok = ok && changed == 0;
  return {ok, fmt("%zu stages: samples changed outside charts %ld, max |v|/eps %.3g (<= 1), max eps/sep %.3g (<= 0.5)",
                  r.diagnostics["stages"].size(), changed, worst_v, worst_eps)};
}

Outcome projection() {
  bool ok = true;
  int worst = 0;
  std::string d;
  for (const char* name : {"circle.json", "torus.json"}) {
    Config c = load_config(configs + name);
    GridSpec grid = make_grid(c);
    auto lifted = veronese_lift(whitney_torus(grid));
    const int target = sym_count(c.n) + c.n;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      try {
        auto r = generic_projection_reduce(lifted, target, seed, c.freeness_threshold, 16);
        for (int k : r.rejections) worst = std::max(worst, k);
      } catch (const GenericityError& e) {
        ok = false;
        d += fmt("%s seed %d: %s; ", name, int(seed), e.what());
      }
    }
    // a direction inside the second-derivative span at one grid point
    auto jet = compute_jet(lifted);
    Vec v(jet.q);
    for (int k = 0; k < jet.q; ++k) v(k) = jet.d2(grid.size() / 3, 0, k);
    v.normalize();
    bool r1 = check_projection(jet, v, c.freeness_threshold).accepted;
    bool r2 = check_projection(jet, v, c.freeness_threshold).accepted;
    ok = ok && !r1 && !r2;
    d += fmt("%s: in-span direction %s; ", name, (!r1 && !r2) ? "rejected" : "accepted");
  }
  return {ok, fmt("seeds 0-9 reduce with at most %d rejections per step (<= 16); ", worst) + d};
}

int run_cli(const std::string& args) {
  int s = std::system((std::string(ISOEMBED_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  namespace fs = std::filesystem;
  fs::path base = fs::temp_directory_path() / "isoembed_acceptance_det";
  fs::remove_all(base);
  std::string a, b;
  for (int i = 0; i < 2; ++i) {
    fs::path out = base / std::to_string(i);
    run_cli("embed --config " + configs + "circle.json --out " + out.string());
    (i ? b : a) = slurp(out / "diagnostics.json");
  }
  Config c = load_config(configs + "circle.json");
  std::string l1 = run(c).diagnostics.dump(2), l2 = run(c).diagnostics.dump(2);
  bool ok = !a.empty() && a == b && l1 == l2;
  return {ok, fmt("CLI diagnostics %zu bytes, identical %s; library diagnostics identical %s", a.size(),
                  a == b ? "yes" : "no", l1 == l2 ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::function<Outcome()> criteria[] = {dimensions,    circle,           torus,      decomposition,
                                               contraction,   local_guarantees, projection, determinism};
  const char* names[] = {"dimension reproduction", "end-to-end circle", "end-to-end torus", "decomposition identity",
                         "perturbation contraction", "local guarantees", "generic projection", "determinism"};
  int only = 0;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--criterion") only = std::atoi(argv[i + 1]);
  if (only < 0 || only > 8) {
    std::fprintf(stderr, "criterion must be 1..8\n");
    return 2;
  }
  bool all = true;
  for (int k = 1; k <= 8; ++k) {
    if (only && k != only) continue;
    Outcome o;
    try {
      o = criteria[k - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d (%s): %s  %s\n", k, names[k - 1], o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
