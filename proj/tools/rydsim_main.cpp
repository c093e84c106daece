// rydsim: batch front end for dressing sweeps, anneal runs, gap scans, and
// the chain benchmark suite.  See README.md and schema/config.schema.json
// for the config format.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rydsim/config.hpp"
#include "rydsim/error.hpp"
#include "rydsim/run.hpp"
#include "rydsim/units.hpp"

namespace {

void emit_error(const std::string& type, const std::string& message,
                const std::string& pointer) {
  nlohmann::json err{{"error", {{"type", type}, {"message", message}}}};
  if (!pointer.empty()) err["error"]["pointer"] = pointer;
  std::cerr << err.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rydsim: quantum-annealing simulator for Rydberg-dressed "
               "neutral-atom registers"};
  app.set_version_flag("--version", std::string(rydsim::kVersion));

  std::string config_path;
  std::string mode_override;
  std::string out_override;
  uint64_t seed_override = 0;
  int threads_override = 0;
  bool plot_data = false;

  app.add_option("--config", config_path, "experiment config JSON file")
      ->required();
  app.add_option("--mode", mode_override,
                 "override the config mode (dressing-sweep | anneal | "
                 "gap-scan | benchmark-suite)");
  app.add_option("--out", out_override, "output directory");
  auto* seed_opt =
      app.add_option("--seed", seed_override, "override the config seed");
  auto* threads_opt = app.add_option("--threads", threads_override,
                                     "worker threads for trajectory runs");
  app.add_flag("--plot-data", plot_data,
               "also write plot.csv (anneal mode: schedule and gap traces)");

  CLI11_PARSE(app, argc, argv);

  try {
    rydsim::ExperimentConfig cfg =
        rydsim::ExperimentConfig::from_file(config_path);

    // Command-line overrides are folded into the effective config before
    // re-validation so that the manifest hash reflects what actually ran.
    nlohmann::json effective = cfg.raw;
    if (!mode_override.empty()) effective["mode"] = mode_override;
    if (seed_opt->count() > 0) effective["seed"] = seed_override;
    if (threads_opt->count() > 0) {
      if (threads_override < 1) {
        throw rydsim::SchemaError("--threads must be >= 1", "/threads");
      }
      effective["threads"] = threads_override;
    }
    if (!out_override.empty()) effective["out_dir"] = out_override;
    if (plot_data) effective["plot_data"] = true;
    cfg = rydsim::ExperimentConfig::from_json(std::move(effective),
                                              cfg.config_dir);

    rydsim::run_experiment(cfg);
    return 0;
  } catch (const rydsim::SchemaError& e) {
    emit_error("schema", e.what(), e.pointer());
    return 2;
  } catch (const rydsim::NumericalError& e) {
    emit_error("numerical", e.what(), "");
    return 3;
  } catch (const rydsim::DomainError& e) {
    emit_error("numerical", e.what(), "");
    return 3;
  } catch (const std::exception& e) {
    emit_error("internal", e.what(), "");
    return 1;
  }
}
