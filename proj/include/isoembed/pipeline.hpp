#pragma once
#include <optional>

#include "isoembed/config.hpp"
#include "isoembed/verify.hpp"

namespace isoembed {

/// Appends zero coordinates; DimensionError unless q >= s_n + n + 5 and q >= u.q().
EquivariantMap pad_to_q(const EquivariantMap& u, int q);

struct Separation {
  double radius = INFINITY;
  std::vector<DeckTransform> shell;
  double shell_radius = 0;
  double diameter = 0;
  double phi_norm = 0;
};
/// min over nonidentity tau of the distance between u(chart) and u(tau chart), on grid samples.
Separation separation_radius(const EquivariantMap& u, const Chart& chart);

struct PipelineReport {
  std::optional<EquivariantMap> u;
  nlohmann::json diagnostics;
  bool passed = false;
  std::string failed_stage;
  std::string failed_property;
};

/// Initial embedding through final verification.
PipelineReport run(const Config& c);

/// Individual stages, as used by the stage subcommands.
PipelineReport run_freemap(const Config& c);
PipelineReport run_decompose(const Config& c, PropertyEDecomposition* out = nullptr);
PipelineReport run_perturb(const Config& c);
/// Verification gates on an existing map.
PipelineReport run_verify(const Config& c, const EquivariantMap& u);

nlohmann::json certificate_json(const FreenessCertificate& c);

}  // namespace isoembed
