#include "isoembed/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include "isoembed/errors.hpp"
#include "isoembed/io.hpp"

namespace isoembed {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw ConfigError(path + ": " + msg); }

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(path.empty() ? "/" : path, "expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) fail(path + "/" + k, "unknown key");
}

double num(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

double pos(const json& j, const std::string& path) {
  double v = num(j, path);
  if (!(v > 0)) fail(path, "expected a positive number");
  return v;
}

int integer(const json& j, const std::string& path, int lo) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  long v = j.get<long>();
  if (v < lo) fail(path, "expected an integer >= " + std::to_string(lo));
  return static_cast<int>(v);
}

template <class F>
void opt(const json& j, const char* key, const std::string& path, F&& f) {
  if (j.contains(key)) f(j.at(key), path + "/" + key);
}

}  // namespace

int default_q(int n) {
  int s = sym_count(n);
  return std::max(s + 2 * n, s + n + 5);
}

Config parse_config(const json& j, const std::string& base_dir) {
  Config c;
  c.raw = j;
  check_keys(j, "", {"n", "lattice", "metric", "resolution", "q", "seeds", "tolerances", "caps", "charts",
                     "freemap", "perturb", "budget", "verify", "threads"});
  if (!j.contains("n")) fail("/n", "missing");
  c.n = integer(j.at("n"), "/n", 1);
  const int n = c.n;

  if (j.contains("lattice")) {
    const json& l = j.at("lattice");
    if (!l.is_array() || l.size() != static_cast<std::size_t>(n * n)) fail("/lattice", "expected n*n numbers");
    for (std::size_t i = 0; i < l.size(); ++i) c.lattice.push_back(num(l[i], "/lattice/" + std::to_string(i)));
  } else {
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) c.lattice.push_back(i == k ? 1.0 : 0.0);
  }

  if (!j.contains("resolution")) fail("/resolution", "missing");
  const json& r = j.at("resolution");
  if (r.is_number_integer()) {
    c.resolution.assign(n, integer(r, "/resolution", 4));
  } else if (r.is_array() && r.size() == static_cast<std::size_t>(n)) {
    for (std::size_t i = 0; i < r.size(); ++i)
      c.resolution.push_back(integer(r[i], "/resolution/" + std::to_string(i), 4));
  } else {
    fail("/resolution", "expected an integer or n integers");
  }

  c.q = default_q(n);
  opt(j, "q", "", [&](const json& v, const std::string& p) { c.q = integer(v, p, 1); });

  if (!j.contains("metric")) fail("/metric", "missing");
  const json& m = j.at("metric");
  check_keys(m, "/metric", {"preset", "c", "phi", "file"});
  if (m.contains("file")) {
    if (!m.at("file").is_string()) fail("/metric/file", "expected a path");
    c.metric_preset = "loaded";
    std::filesystem::path fp = m.at("file").get<std::string>();
    c.metric_file = fp.is_absolute() ? fp.string() : (std::filesystem::path(base_dir) / fp).string();
  } else {
    if (!m.contains("preset") || !m.at("preset").is_string()) fail("/metric/preset", "expected \"flat\" or \"conformal\"");
    c.metric_preset = m.at("preset").get<std::string>();
    if (c.metric_preset == "flat") {
      c.flat_c = m.contains("c") ? pos(m.at("c"), "/metric/c") : 1.0;
    } else if (c.metric_preset == "conformal") {
      if (!m.contains("phi") || !m.at("phi").is_array()) fail("/metric/phi", "expected a list of terms");
      const json& ph = m.at("phi");
      for (std::size_t i = 0; i < ph.size(); ++i) {
        std::string tp = "/metric/phi/" + std::to_string(i);
        check_keys(ph[i], tp, {"amp", "factors"});
        PhiTerm t;
        if (!ph[i].contains("amp")) fail(tp + "/amp", "missing");
        t.amp = num(ph[i].at("amp"), tp + "/amp");
        const json& f = ph[i].contains("factors") ? ph[i].at("factors") : json();
        if (!f.is_array() || f.size() != static_cast<std::size_t>(n)) fail(tp + "/factors", "expected n entries like \"sin1\"");
        for (std::size_t a = 0; a < f.size(); ++a) {
          std::string fp = tp + "/factors/" + std::to_string(a);
          if (!f[a].is_string()) fail(fp, "expected \"sin<k>\" or \"cos<k>\"");
          std::string s = f[a].get<std::string>();
          if (s.size() < 4 || (s.rfind("sin", 0) != 0 && s.rfind("cos", 0) != 0))
            fail(fp, "expected \"sin<k>\" or \"cos<k>\"");
          t.kind.push_back(s[0] == 's' ? 's' : 'c');
          try {
            t.freq.push_back(std::stoi(s.substr(3)));
          } catch (...) {
            fail(fp, "expected an integer frequency");
          }
        }
        c.phi.push_back(t);
      }
    } else {
      fail("/metric/preset", "unknown preset \"" + c.metric_preset + "\"");
    }
  }

  opt(j, "seeds", "", [&](const json& s, const std::string& p) {
    check_keys(s, p, {"projection", "verify"});
    opt(s, "projection", p, [&](const json& v, const std::string& pp) { c.projection_seed = integer(v, pp, 0); });
    opt(s, "verify", p, [&](const json& v, const std::string& pp) { c.verify_seed = integer(v, pp, 0); });
  });
  opt(j, "tolerances", "", [&](const json& t, const std::string& p) {
    check_keys(t, p, {"tol_residual", "delta_short", "delta_pos", "c_inj", "isometry", "freeness", "equivariance"});
    opt(t, "tol_residual", p, [&](const json& v, const std::string& pp) { c.tol_residual = pos(v, pp); });
    opt(t, "delta_short", p, [&](const json& v, const std::string& pp) { c.delta_short = pos(v, pp); });
    opt(t, "delta_pos", p, [&](const json& v, const std::string& pp) { c.delta_pos = pos(v, pp); });
    opt(t, "c_inj", p, [&](const json& v, const std::string& pp) { c.c_inj = pos(v, pp); });
    opt(t, "isometry", p, [&](const json& v, const std::string& pp) { c.isometry_tol = pos(v, pp); });
    opt(t, "freeness", p, [&](const json& v, const std::string& pp) { c.freeness_threshold = pos(v, pp); });
    opt(t, "equivariance", p, [&](const json& v, const std::string& pp) { c.equivariance_tol = pos(v, pp); });
  });
  opt(j, "caps", "", [&](const json& t, const std::string& p) {
    check_keys(t, p, {"K_max", "projection_retries", "staging_cap"});
    opt(t, "K_max", p, [&](const json& v, const std::string& pp) { c.K_max = integer(v, pp, 1); });
    opt(t, "projection_retries", p, [&](const json& v, const std::string& pp) { c.projection_retries = integer(v, pp, 1); });
    opt(t, "staging_cap", p, [&](const json& v, const std::string& pp) { c.staging_cap = integer(v, pp, 1); });
  });
  opt(j, "charts", "", [&](const json& t, const std::string& p) {
    check_keys(t, p, {"per_direction", "overlap", "max_refinements"});
    opt(t, "per_direction", p, [&](const json& v, const std::string& pp) { c.charts.per_direction = integer(v, pp, 1); });
    opt(t, "overlap", p, [&](const json& v, const std::string& pp) { c.charts.overlap = pos(v, pp); });
    opt(t, "max_refinements", p, [&](const json& v, const std::string& pp) { c.charts.max_refinements = integer(v, pp, 0); });
  });
  opt(j, "freemap", "", [&](const json& t, const std::string& p) {
    check_keys(t, p, {"affine_fraction", "candidates"});
    opt(t, "candidates", p, [&](const json& v, const std::string& pp) { c.projection_candidates = integer(v, pp, 1); });
    opt(t, "affine_fraction", p, [&](const json& v, const std::string& pp) {
      c.affine_fraction = pos(v, pp);
      if (c.affine_fraction > 1) fail(pp, "must lie in (0, 1]");
    });
  });
  opt(j, "perturb", "", [&](const json& t, const std::string& p) {
    check_keys(t, p, {"twist", "twist_ratio", "twist_budget", "min_cycles", "smoothing", "rho_cut", "refine_passes", "term", "scale"});
    opt(t, "twist", p, [&](const json& v, const std::string& pp) {
      std::string s = v.is_string() ? v.get<std::string>() : "";
      if (s == "auto") c.perturb.twist = TwistMode::automatic;
      else if (s == "always") c.perturb.twist = TwistMode::always;
      else if (s == "never") c.perturb.twist = TwistMode::never;
      else fail(pp, "expected \"auto\", \"always\" or \"never\"");
    });
    opt(t, "twist_ratio", p, [&](const json& v, const std::string& pp) { c.perturb.twist_ratio = pos(v, pp); });
    opt(t, "twist_budget", p, [&](const json& v, const std::string& pp) {
      c.perturb.twist_budget = pos(v, pp);
      if (c.perturb.twist_budget >= 1) fail(pp, "expected a fraction below 1");
    });
    opt(t, "min_cycles", p, [&](const json& v, const std::string& pp) { c.perturb.min_cycles = pos(v, pp); });
    opt(t, "smoothing", p, [&](const json& v, const std::string& pp) {
      if (!v.is_boolean()) fail(pp, "expected true or false");
      c.perturb.smoothing = v.get<bool>();
    });
    opt(t, "rho_cut", p, [&](const json& v, const std::string& pp) { c.perturb.rho_cut = pos(v, pp); });
    opt(t, "refine_passes", p, [&](const json& v, const std::string& pp) { c.perturb.refine_passes = integer(v, pp, 0); });
    opt(t, "term", p, [&](const json& v, const std::string& pp) { c.perturb_term = integer(v, pp, 0); });
    opt(t, "scale", p, [&](const json& v, const std::string& pp) { c.perturb_scale = pos(v, pp); });
  });
  opt(j, "budget", "", [&](const json& t, const std::string& p) {
    check_keys(t, p, {"global_cap"});
    opt(t, "global_cap", p, [&](const json& v, const std::string& pp) { c.global_cap = pos(v, pp); });
  });
  opt(j, "verify", "", [&](const json& t, const std::string& p) {
    check_keys(t, p, {"injectivity_pairs", "equivariance_trials"});
    opt(t, "injectivity_pairs", p, [&](const json& v, const std::string& pp) { c.injectivity_pairs = integer(v, pp, 1); });
    opt(t, "equivariance_trials", p, [&](const json& v, const std::string& pp) { c.equivariance_trials = integer(v, pp, 1); });
  });
  opt(j, "threads", "", [&](const json& v, const std::string& p) { c.threads = integer(v, p, 0); });

  c.perturb.tol_residual = c.tol_residual;
  c.perturb.max_iterations = c.K_max;
  c.perturb.staging_cap = c.staging_cap;
  c.perturb.freeness_threshold = c.freeness_threshold;
  c.charts.delta_pos = c.delta_pos;
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_config(j, std::filesystem::path(path).parent_path().string());
}

GridSpec make_grid(const Config& c) { return GridSpec(Lattice::from_row_major(c.lattice), c.resolution); }

MetricField make_metric(const Config& c, const GridSpec& grid) {
  MetricField m = [&] {
    if (c.metric_preset == "flat") return flat_metric(grid, c.flat_c);
    if (c.metric_preset == "conformal") return conformal_metric(grid, c.phi);
    PeriodicField f = load_field(c.metric_file);
    if (!(f.grid == grid) || f.rank != Rank::sym2)
      throw ConfigError("/metric/file: grid or rank does not match the config");
    return MetricField{f, "loaded"};
  }();
  validate_metric(m);
  return m;
}

}  // namespace isoembed
