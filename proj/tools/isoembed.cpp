// Command-line front end: embed, freemap, decompose, perturb, verify, export.
#include <chrono>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "isoembed/errors.hpp"
#include "isoembed/io.hpp"
#include "isoembed/pipeline.hpp"

using namespace isoembed;
namespace fs = std::filesystem;

namespace {

int finish(const PipelineReport& r, const std::string& out, bool write_samples) {
  fs::create_directories(out);
  nlohmann::json d = r.diagnostics;
  d["status"] = r.passed ? "pass" : "fail";
  if (r.u) {
    write_json(map_to_json(*r.u), (fs::path(out) / "embedding.json").string());
    if (write_samples) write_samples_csv(*r.u, (fs::path(out) / "samples.csv").string());
  }
  write_json(d, (fs::path(out) / "diagnostics.json").string());
  if (r.passed) {
    std::cout << "all gates passed\n";
    return 0;
  }
  std::cout << "failed at " << r.failed_stage << " (" << r.failed_property << ")\n";
  if (d.contains("failure") && d["failure"].contains("message"))
    std::cout << "  " << d["failure"]["message"].get<std::string>() << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lattice-equivariant isometric embeddings of periodic metrics"};
  app.require_subcommand(1);
  std::string config, out = "out", map_path, format = "csv", output;

  auto* embed = app.add_subcommand("embed", "full pipeline: initial map, decomposition, perturbations, gates");
  auto* freemap = app.add_subcommand("freemap", "short free equivariant initial embedding only");
  auto* decompose = app.add_subcommand("decompose", "decomposition of the metric defect only");
  auto* perturb = app.add_subcommand("perturb", "single-term perturbation solve");
  auto* verify = app.add_subcommand("verify", "verification gates on a saved map");
  auto* exp = app.add_subcommand("export", "export a saved map as csv, json or projected3d");
  for (auto* s : {embed, freemap, decompose, perturb, verify}) {
    s->add_option("--config", config, "config JSON")->required();
    s->add_option("--out", out, "output directory");
  }
  verify->add_option("--map", map_path, "embedding JSON")->required();
  exp->add_option("--map", map_path, "embedding JSON")->required();
  exp->add_option("--format", format, "csv | json | projected3d")->check(CLI::IsMember({"csv", "json", "projected3d"}));
  exp->add_option("--output", output, "output file")->required();

  CLI11_PARSE(app, argc, argv);
  const auto t0 = std::chrono::steady_clock::now();
  int code = 0;
  try {
    if (*exp) {
      EquivariantMap u = load_map(map_path);
      if (format == "csv") write_samples_csv(u, output);
      else if (format == "projected3d") write_projected3d_csv(u, output);
      else write_json(map_to_json(u), output);
      return 0;
    }
    Config c = load_config(config);
    if (*embed) {
      code = finish(run(c), out, true);
    } else if (*freemap) {
      code = finish(run_freemap(c), out, true);
    } else if (*decompose) {
      PropertyEDecomposition d;
      PipelineReport r = run_decompose(c, &d);
      if (r.passed) {
        fs::create_directories(out);
        write_json(decomposition_to_json(d), (fs::path(out) / "decomposition.json").string());
      }
      r.u.reset();
      code = finish(r, out, false);
    } else if (*perturb) {
      code = finish(run_perturb(c), out, true);
    } else if (*verify) {
      EquivariantMap u = load_map(map_path);
      code = finish(run_verify(c, u), out, false);
    }
  } catch (const DimensionError& e) {
    std::cerr << "DimensionError: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << e.kind() << " in " << e.stage() << " (" << e.property() << "): " << e.what() << "\n";
    return 1;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cerr << "elapsed " << secs << " s\n";
  return code;
}
