#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace rydsim {

// A fully resolved experiment description: the effective JSON (config file
// plus command-line overrides) together with the execution knobs that do
// not affect the numbers (output directory, thread count).
struct ExperimentConfig {
  enum class Mode { DressingSweep, Anneal, GapScan, BenchmarkSuite };

  Mode mode = Mode::Anneal;
  nlohmann::json raw;           // effective config, overrides applied
  std::string config_dir = "."; // base for relative problem_file paths
  std::string out_dir = ".";
  int threads = 1;
  uint64_t seed = 0;
  bool plot_data = false;

  // Validates structure: known top-level keys, the unit-suffix rule, and
  // the mode tag.  Throws SchemaError with a JSON pointer on failure.
  static ExperimentConfig from_json(nlohmann::json j,
                                    std::string config_dir = ".");
  static ExperimentConfig from_file(const std::string& path);

  // Config with the output-only knobs (out_dir, threads, plot_data)
  // removed; two configs hash equal iff this object is equal.
  nlohmann::json canonical() const;
  std::string hash_hex() const;  // fnv1a64 over canonical().dump()
};

uint64_t fnv1a64(std::string_view bytes);

// Enforces the unit-discipline rule: every key holding a number (or an
// array of numbers) must end in a unit suffix (_khz, _mhz, _us, _um, _hz,
// _s), be a documented dimensionless key, or sit inside a unit-suffixed
// parent (e.g. the min/max/count of an axis object).
void validate_unit_suffixes(const nlohmann::json& config);

std::string mode_name(ExperimentConfig::Mode mode);
ExperimentConfig::Mode mode_from_name(const std::string& name,
                                      const std::string& pointer);

}  // namespace rydsim
