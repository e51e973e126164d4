#pragma once
#include <cstdint>
#include <string>

#include "json.hpp"
#include "isoembed/decompose.hpp"
#include "isoembed/perturb.hpp"

namespace isoembed {

struct Config {
  int n = 1;
  std::vector<double> lattice;
  std::vector<int> resolution;
  int q = 0;  // resolved default max{s_n + 2n, s_n + n + 5}

  // metric
  std::string metric_preset;  // flat | conformal | loaded
  double flat_c = 1.0;
  std::vector<PhiTerm> phi;
  std::string metric_file;

  std::uint64_t projection_seed = 0;
  std::uint64_t verify_seed = 0;

  double tol_residual = 1e-8;
  double delta_short = 1e-6;
  double delta_pos = 1e-6;
  double c_inj = -1;  // < 0: 1e-3 * mean metric scale
  double isometry_tol = 1e-6;
  double freeness_threshold = 1e-8;
  double equivariance_tol = 1e-12;

  double affine_fraction = 0;  // see initial_embedding
  int projection_candidates = 1;

  int K_max = 60;
  int projection_retries = 16;
  int staging_cap = 256;

  DecomposeOptions charts;
  PerturbOptions perturb;
  double global_cap = 1.0;

  int injectivity_pairs = 10000;
  int equivariance_trials = 1000;
  int threads = 0;

  // single-term solve
  int perturb_term = 0;
  double perturb_scale = 0;  // > 0: rescale the term to this sup-norm

  nlohmann::json raw;
};

int default_q(int n);
/// Parses and validates; ConfigError messages name the offending key path.
Config parse_config(const nlohmann::json& j, const std::string& base_dir = ".");
Config load_config(const std::string& path);

GridSpec make_grid(const Config& c);
MetricField make_metric(const Config& c, const GridSpec& grid);

}  // namespace isoembed
