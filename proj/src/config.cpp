#include "rydsim/config.hpp"

#include <array>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "rydsim/error.hpp"

namespace rydsim {
namespace {

constexpr std::array<const char*, 6> kUnitSuffixes = {"_khz", "_mhz", "_us",
                                                      "_um", "_hz", "_s"};

// Dimensionless by documented convention (see schema/config.schema.json).
// An axis object's "min"/"max" are deliberately absent: they inherit the
// unit of their parent key, so they are only legal under a suffixed parent
// (where the inside-unit exemption already spares them).
const std::set<std::string>& dimensionless_keys() {
  static const std::set<std::string> keys = {
      "n",        "seed",          "threads",    "n_traj",
      "grid_points", "rel_tol",    "abs_tol",    "readout_split",
      "confidence",  "count",      "k_exponent", "sizes",
      "shape",       "hold_biases", "plot_data", "degeneracy",
  };
  return keys;
}

bool has_unit_suffix(const std::string& key) {
  for (const char* suffix : kUnitSuffixes) {
    const std::string s(suffix);
    if (key.size() >= s.size() &&
        key.compare(key.size() - s.size(), s.size(), s) == 0) {
      return true;
    }
  }
  return false;
}

bool contains_number(const nlohmann::json& value) {
  if (value.is_number()) return true;
  if (value.is_array()) {
    for (const auto& element : value) {
      if (contains_number(element)) return true;
    }
  }
  return false;
}

void walk_units(const nlohmann::json& node, const std::string& pointer,
                bool inside_unit_key) {
  if (node.is_object()) {
    for (const auto& [key, value] : node.items()) {
      const std::string child_pointer = pointer + "/" + key;
      const bool unit_key = has_unit_suffix(key);
      if (contains_number(value) && !unit_key && !inside_unit_key &&
          dimensionless_keys().count(key) == 0) {
        throw SchemaError(
            "config key \"" + key +
                "\" holds a numeric value but carries no unit suffix "
                "(_khz, _mhz, _us, ...) and is not a documented "
                "dimensionless key",
            child_pointer);
      }
      walk_units(value, child_pointer, unit_key || inside_unit_key);
    }
  } else if (node.is_array()) {
    int i = 0;
    for (const auto& element : node) {
      walk_units(element, pointer + "/" + std::to_string(i++),
                 inside_unit_key);
    }
  }
}

const std::set<std::string>& known_top_level_keys() {
  static const std::set<std::string> keys = {
      "mode",    "out_dir",  "seed",    "threads", "plot_data",
      "problem", "problem_file", "benchmark", "schedule", "noise",
      "solver",  "analysis", "dressing", "suite",
  };
  return keys;
}

}  // namespace

uint64_t fnv1a64(std::string_view bytes) {
  uint64_t hash = 14695981039346656037ull;
  for (const char c : bytes) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 1099511628211ull;
  }
  return hash;
}

void validate_unit_suffixes(const nlohmann::json& config) {
  walk_units(config, "", false);
}

std::string mode_name(ExperimentConfig::Mode mode) {
  switch (mode) {
    case ExperimentConfig::Mode::DressingSweep:
      return "dressing-sweep";
    case ExperimentConfig::Mode::Anneal:
      return "anneal";
    case ExperimentConfig::Mode::GapScan:
      return "gap-scan";
    case ExperimentConfig::Mode::BenchmarkSuite:
      return "benchmark-suite";
  }
  throw DomainError("mode_name: unknown mode enum value");
}

ExperimentConfig::Mode mode_from_name(const std::string& name,
                                      const std::string& pointer) {
  if (name == "dressing-sweep") return ExperimentConfig::Mode::DressingSweep;
  if (name == "anneal") return ExperimentConfig::Mode::Anneal;
  if (name == "gap-scan") return ExperimentConfig::Mode::GapScan;
  if (name == "benchmark-suite") return ExperimentConfig::Mode::BenchmarkSuite;
  throw SchemaError(
      "unknown mode \"" + name +
          "\" (expected dressing-sweep | anneal | gap-scan | benchmark-suite)",
      pointer);
}

ExperimentConfig ExperimentConfig::from_json(nlohmann::json j,
                                             std::string config_dir) {
  if (!j.is_object()) {
    throw SchemaError("config root must be a JSON object", "");
  }
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (known_top_level_keys().count(key) == 0) {
      throw SchemaError("unknown config key \"" + key + "\"", "/" + key);
    }
  }
  validate_unit_suffixes(j);

  ExperimentConfig cfg;
  cfg.config_dir = std::move(config_dir);
  if (!j.contains("mode")) {
    throw SchemaError("config is missing \"mode\" (and no --mode override "
                      "was given)",
                      "/mode");
  }
  if (!j.at("mode").is_string()) {
    throw SchemaError("\"mode\" must be a string", "/mode");
  }
  cfg.mode = mode_from_name(j.at("mode").get<std::string>(), "/mode");

  if (j.contains("out_dir")) {
    if (!j.at("out_dir").is_string()) {
      throw SchemaError("\"out_dir\" must be a string", "/out_dir");
    }
    cfg.out_dir = j.at("out_dir").get<std::string>();
  }
  if (j.contains("threads")) {
    if (!j.at("threads").is_number_integer() ||
        j.at("threads").get<int64_t>() < 1) {
      throw SchemaError("\"threads\" must be a positive integer", "/threads");
    }
    cfg.threads = static_cast<int>(j.at("threads").get<int64_t>());
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer() ||
        (!j.at("seed").is_number_unsigned() &&
         j.at("seed").get<int64_t>() < 0)) {
      throw SchemaError("\"seed\" must be a non-negative integer", "/seed");
    }
    cfg.seed = j.at("seed").get<uint64_t>();
  }
  if (j.contains("plot_data")) {
    if (!j.at("plot_data").is_boolean()) {
      throw SchemaError("\"plot_data\" must be a boolean", "/plot_data");
    }
    cfg.plot_data = j.at("plot_data").get<bool>();
  }
  cfg.raw = std::move(j);
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw SchemaError("config file \"" + path + "\" cannot be opened", "");
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("config file \"" + path +
                          "\" is not valid JSON: " + e.what(),
                      "");
  }
  std::string dir = ".";
  const auto slash = path.find_last_of('/');
  if (slash != std::string::npos) dir = path.substr(0, slash);
  return from_json(std::move(j), std::move(dir));
}

nlohmann::json ExperimentConfig::canonical() const {
  nlohmann::json j = raw;
  j.erase("out_dir");
  j.erase("threads");
  j.erase("plot_data");
  return j;
}

std::string ExperimentConfig::hash_hex() const {
  const uint64_t h = fnv1a64(canonical().dump());
  std::ostringstream out;
  out << std::hex;
  for (int shift = 60; shift >= 0; shift -= 4) {
    out << ((h >> shift) & 0xFull);
  }
  return out.str();
}

}  // namespace rydsim
