#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rydsim/config.hpp"

namespace rydsim {

struct RunArtifacts {
  nlohmann::json results;
  nlohmann::json manifest;
  std::vector<std::string> files;  // paths written, in write order
};

// Executes the configured computation and writes results.json, the
// mode-specific CSVs (gaps.csv, sweep.csv, plot.csv), and manifest.json
// into cfg.out_dir.  Every file is written to a temporary name and
// renamed into place, so readers never observe partial output.
RunArtifacts run_experiment(const ExperimentConfig& cfg);

}  // namespace rydsim
