#include "rydsim/run.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "rydsim/analysis.hpp"
#include "rydsim/dressing.hpp"
#include "rydsim/error.hpp"
#include "rydsim/evolve.hpp"
#include "rydsim/hamiltonian.hpp"
#include "rydsim/ising.hpp"
#include "rydsim/units.hpp"

namespace rydsim {
namespace {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Typed JSON accessors that fail with a pointer into the config.

const nlohmann::json& require_object(const nlohmann::json& parent,
                                     const std::string& key,
                                     const std::string& pointer) {
  if (!parent.contains(key)) {
    throw SchemaError("config is missing the \"" + key + "\" section",
                      pointer);
  }
  if (!parent.at(key).is_object()) {
    throw SchemaError("\"" + key + "\" must be a JSON object", pointer);
  }
  return parent.at(key);
}

double get_number(const nlohmann::json& obj, const std::string& key,
                  const std::string& pointer) {
  if (!obj.contains(key)) {
    throw SchemaError("missing required numeric field \"" + key + "\"",
                      pointer);
  }
  if (!obj.at(key).is_number()) {
    throw SchemaError("field \"" + key + "\" must be a number", pointer);
  }
  return obj.at(key).get<double>();
}

double get_number_or(const nlohmann::json& obj, const std::string& key,
                     const std::string& pointer, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number()) {
    throw SchemaError("field \"" + key + "\" must be a number", pointer);
  }
  return obj.at(key).get<double>();
}

int get_int_or(const nlohmann::json& obj, const std::string& key,
               const std::string& pointer, int fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number_integer()) {
    throw SchemaError("field \"" + key + "\" must be an integer", pointer);
  }
  return static_cast<int>(obj.at(key).get<int64_t>());
}

uint64_t get_u64_or(const nlohmann::json& obj, const std::string& key,
                    const std::string& pointer, uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number_integer() ||
      (!obj.at(key).is_number_unsigned() && obj.at(key).get<int64_t>() < 0)) {
    throw SchemaError("field \"" + key + "\" must be a non-negative integer",
                      pointer);
  }
  return obj.at(key).get<uint64_t>();
}

bool get_bool_or(const nlohmann::json& obj, const std::string& key,
                 const std::string& pointer, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_boolean()) {
    throw SchemaError("field \"" + key + "\" must be a boolean", pointer);
  }
  return obj.at(key).get<bool>();
}

std::string get_string_or(const nlohmann::json& obj, const std::string& key,
                          const std::string& pointer,
                          const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_string()) {
    throw SchemaError("field \"" + key + "\" must be a string", pointer);
  }
  return obj.at(key).get<std::string>();
}

// ---------------------------------------------------------------------------
// Section builders.

IsingProblem make_problem(const ExperimentConfig& cfg) {
  const auto& raw = cfg.raw;
  const int sources = (raw.contains("problem") ? 1 : 0) +
                      (raw.contains("problem_file") ? 1 : 0) +
                      (raw.contains("benchmark") ? 1 : 0);
  if (sources != 1) {
    throw SchemaError(
        "config must contain exactly one of \"problem\", \"problem_file\", "
        "\"benchmark\"",
        "/problem");
  }
  if (raw.contains("problem")) {
    return IsingProblem::from_json(raw.at("problem"));
  }
  if (raw.contains("problem_file")) {
    if (!raw.at("problem_file").is_string()) {
      throw SchemaError("\"problem_file\" must be a path string",
                        "/problem_file");
    }
    fs::path path = raw.at("problem_file").get<std::string>();
    if (path.is_relative()) path = fs::path(cfg.config_dir) / path;
    std::ifstream in(path);
    if (!in) {
      throw SchemaError("problem file \"" + path.string() +
                            "\" cannot be opened",
                        "/problem_file");
    }
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError("problem file \"" + path.string() +
                            "\" is not valid JSON: " + e.what(),
                        "/problem_file");
    }
    return IsingProblem::from_json(j);
  }
  const auto& bench = require_object(raw, "benchmark", "/benchmark");
  const int n = get_int_or(bench, "n", "/benchmark/n", -1);
  if (n < 2) {
    throw SchemaError("\"benchmark\" needs integer n >= 2", "/benchmark/n");
  }
  const double j_nn = get_number_or(bench, "j_nn_khz", "/benchmark/j_nn_khz",
                                    470.0);
  const double de_total = get_number_or(
      bench, "delta_e_total_khz", "/benchmark/delta_e_total_khz", 118.5);
  return benchmark_chain(n, j_nn, de_total);
}

Schedule make_schedule(const nlohmann::json& section) {
  const double t_total =
      get_number(section, "t_total_us", "/schedule/t_total_us");
  if (!section.contains("shape") || section.at("shape").is_string()) {
    const std::string shape =
        get_string_or(section, "shape", "/schedule/shape", "linear");
    if (shape != "linear") {
      throw SchemaError("schedule shape \"" + shape +
                            "\" is not supported (use \"linear\" or an "
                            "array of [t_us, a, b] knots)",
                        "/schedule/shape");
    }
    return Schedule::make_linear(t_total);
  }
  if (!section.at("shape").is_array()) {
    throw SchemaError(
        "schedule shape must be \"linear\" or an array of [t_us, a, b] knots",
        "/schedule/shape");
  }
  Schedule sched;
  sched.total_time_us = t_total;
  sched.linear = false;
  for (const auto& knot : section.at("shape")) {
    if (!knot.is_array() || knot.size() != 3 || !knot[0].is_number() ||
        !knot[1].is_number() || !knot[2].is_number()) {
      throw SchemaError("each schedule knot must be a [t_us, a, b] triple",
                        "/schedule/shape");
    }
    sched.knots.push_back({knot[0].get<double>(), knot[1].get<double>(),
                           knot[2].get<double>()});
  }
  sched.validate();
  return sched;
}

AnnealSpec make_anneal_spec(const ExperimentConfig& cfg,
                            IsingProblem problem) {
  const auto& section = require_object(cfg.raw, "schedule", "/schedule");
  AnnealSpec spec;
  spec.problem = std::move(problem);
  spec.b_x_khz = get_number(section, "b_x_khz", "/schedule/b_x_khz");
  spec.schedule = make_schedule(section);
  spec.hold_biases =
      get_bool_or(section, "hold_biases", "/schedule/hold_biases", false);
  spec.validate();
  return spec;
}

NoiseModel make_noise(const ExperimentConfig& cfg) {
  NoiseModel noise;
  if (!cfg.raw.contains("noise")) {
    noise.gamma_max_khz = 0.0;
    return noise;
  }
  const auto& section = require_object(cfg.raw, "noise", "/noise");
  noise.gamma_max_khz =
      get_number_or(section, "gamma_max_khz", "/noise/gamma_max_khz", 0.0);
  const std::string profile = get_string_or(
      section, "time_profile", "/noise/time_profile", "schedule-envelope");
  if (profile == "schedule-envelope") {
    noise.time_profile = NoiseModel::Profile::ScheduleEnvelope;
  } else if (profile == "constant") {
    noise.time_profile = NoiseModel::Profile::Constant;
  } else {
    throw SchemaError("noise time_profile must be \"schedule-envelope\" or "
                      "\"constant\"",
                      "/noise/time_profile");
  }
  noise.readout_split = get_number_or(section, "readout_split",
                                      "/noise/readout_split", 7.0 / 16.0);
  noise.validate();
  return noise;
}

IntegratorConfig make_integrator(const ExperimentConfig& cfg) {
  IntegratorConfig icfg;
  if (!cfg.raw.contains("solver")) return icfg;
  const auto& section = require_object(cfg.raw, "solver", "/solver");
  icfg.rel_tol = get_number_or(section, "rel_tol", "/solver/rel_tol", 1e-10);
  icfg.abs_tol = get_number_or(section, "abs_tol", "/solver/abs_tol", 1e-13);
  icfg.max_step_us =
      get_number_or(section, "max_step_us", "/solver/max_step_us",
                    std::numeric_limits<double>::infinity());
  icfg.validate();
  return icfg;
}

std::string resolve_method(const ExperimentConfig& cfg,
                           const NoiseModel& noise, int n) {
  std::string method = "auto";
  if (cfg.raw.contains("solver")) {
    method = get_string_or(cfg.raw.at("solver"), "method", "/solver/method",
                           "auto");
  }
  if (method == "auto") {
    if (noise.gamma_max_khz <= 0.0) return "closed";
    return n <= kMasterEquationCap ? "master-equation" : "trajectories";
  }
  if (method != "closed" && method != "master-equation" &&
      method != "trajectories") {
    throw SchemaError("solver method \"" + method +
                          "\" is not one of auto | closed | master-equation "
                          "| trajectories",
                      "/solver/method");
  }
  if (method == "closed" && noise.gamma_max_khz > 0.0) {
    throw SchemaError(
        "the closed solver cannot represent scattering; set "
        "noise.gamma_max_khz to 0 or pick master-equation / trajectories",
        "/solver/method");
  }
  return method;
}

double get_confidence(const ExperimentConfig& cfg) {
  if (!cfg.raw.contains("analysis")) return 0.99;
  return get_number_or(cfg.raw.at("analysis"), "confidence",
                       "/analysis/confidence", 0.99);
}

int get_grid_points(const ExperimentConfig& cfg) {
  if (!cfg.raw.contains("analysis")) return 201;
  return get_int_or(cfg.raw.at("analysis"), "grid_points",
                    "/analysis/grid_points", 201);
}

// ---------------------------------------------------------------------------
// Mode runners.

struct AnnealOutcome {
  std::string method;
  ReadoutDistribution distribution;
  nlohmann::json solver_block;
  nlohmann::json integrator_block;
  nlohmann::json leak_block;  // null unless the open solver ran
};

AnnealOutcome run_anneal_solver(const ExperimentConfig& cfg,
                                const AnnealSpec& spec,
                                const NoiseModel& noise,
                                const IntegratorConfig& icfg) {
  AnnealOutcome outcome;
  outcome.method = resolve_method(cfg, noise, spec.problem.n);
  outcome.solver_block =
      nlohmann::json{{"method", outcome.method},
                     {"rel_tol", icfg.rel_tol},
                     {"abs_tol", icfg.abs_tol}};
  outcome.leak_block = nullptr;

  if (outcome.method == "closed") {
    const ClosedResult result = evolve_closed(spec, icfg);
    outcome.distribution = readout(result, spec.problem.n);
    outcome.integrator_block = result.stats.to_json();
  } else if (outcome.method == "master-equation") {
    const OpenResult result = evolve_open(spec, noise, icfg);
    outcome.distribution = readout(result, noise.readout_split);
    outcome.integrator_block = result.stats.to_json();
    nlohmann::json per_qubit = nlohmann::json::array();
    for (int q = 0; q < result.n; ++q) per_qubit.push_back(result.qubit_leak(q));
    outcome.leak_block = nlohmann::json{{"total_mass", result.leaked_mass()},
                                        {"per_qubit_mass", per_qubit}};
  } else {
    uint64_t n_traj = 10000;
    if (cfg.raw.contains("solver")) {
      n_traj = get_u64_or(cfg.raw.at("solver"), "n_traj", "/solver/n_traj",
                          10000);
    }
    if (n_traj == 0) {
      throw SchemaError("solver n_traj must be >= 1", "/solver/n_traj");
    }
    const TrajectoryHistogram hist = evolve_trajectories(
        spec, noise, icfg, n_traj, cfg.seed, cfg.threads);
    outcome.distribution = readout(hist);
    outcome.solver_block["n_traj"] = n_traj;
    outcome.solver_block["seed"] = cfg.seed;
    outcome.integrator_block = nullptr;
  }
  return outcome;
}

nlohmann::json fidelity_block(const ReadoutDistribution& distribution,
                              const IsingProblem& problem,
                              double confidence) {
  if (problem.n > kBruteForceCapDefault) {
    return nlohmann::json{
        {"note", "problem exceeds the exhaustive-verification cap"}};
  }
  const GroundStateResult ground = brute_force_ground(problem);
  if (ground.degeneracy > 1) {
    return nlohmann::json{
        {"note", "ground state is degenerate; single-target success "
                 "probability is ill-defined"},
        {"degeneracy", ground.degeneracy}};
  }
  return fidelity_report(distribution, problem, confidence).to_json();
}

std::string format_csv_number(double value) {
  std::ostringstream out;
  out << std::setprecision(17) << value;
  return out.str();
}

struct PendingFile {
  std::string name;
  std::string content;
};

void run_anneal_mode(const ExperimentConfig& cfg, nlohmann::json& results,
                     std::vector<PendingFile>& files) {
  const AnnealSpec spec = make_anneal_spec(cfg, make_problem(cfg));
  const NoiseModel noise = make_noise(cfg);
  const IntegratorConfig icfg = make_integrator(cfg);
  const AnnealOutcome outcome = run_anneal_solver(cfg, spec, noise, icfg);
  const double confidence = get_confidence(cfg);

  results["spec"] = spec.to_json();
  results["noise"] = noise.to_json();
  results["solver"] = outcome.solver_block;
  results["distribution"] = outcome.distribution.to_json();
  results["fidelity"] =
      fidelity_block(outcome.distribution, spec.problem, confidence);
  if (results["fidelity"].contains("success_probability")) {
    results["success_probability"] =
        results["fidelity"]["success_probability"];
  }
  if (!outcome.integrator_block.is_null()) {
    results["integrator"] = outcome.integrator_block;
  }
  if (!outcome.leak_block.is_null()) {
    results["leak"] = outcome.leak_block;
  }

  if (cfg.plot_data) {
    const int points = get_grid_points(cfg);
    std::ostringstream csv;
    const bool with_gap = spec.problem.n <= kGapScanCap;
    csv << (with_gap ? "t_us,a,b,gap_khz\n" : "t_us,a,b\n");
    GapScan scan;
    if (with_gap) scan = scan_gap(spec, points);
    for (int i = 0; i < points; ++i) {
      const double t = spec.schedule.total_time_us * static_cast<double>(i) /
                       (points - 1);
      csv << format_csv_number(t) << ',' << format_csv_number(spec.schedule.a(t))
          << ',' << format_csv_number(spec.schedule.b(t));
      if (with_gap) csv << ',' << format_csv_number(scan.gaps_khz(i));
      csv << '\n';
    }
    files.push_back({"plot.csv", csv.str()});
  }
}

void run_gap_scan_mode(const ExperimentConfig& cfg, nlohmann::json& results,
                       std::vector<PendingFile>& files) {
  const AnnealSpec spec = make_anneal_spec(cfg, make_problem(cfg));
  const int points = get_grid_points(cfg);
  const GapScan scan = scan_gap(spec, points);

  results["spec"] = spec.to_json();
  results["grid_points"] = points;
  results["min_gap_khz"] = scan.min_gap_khz;
  results["min_gap_time_us"] = scan.min_gap_time_us;
  try {
    results["adiabatic_heuristic_time_us"] =
        adiabatic_heuristic_time_us(spec, points);
  } catch (const DomainError&) {
    results["adiabatic_heuristic_time_us"] = nullptr;  // degenerate spectrum
  }

  std::ostringstream csv;
  csv << "t_us,gap_khz\n";
  for (Eigen::Index i = 0; i < scan.times_us.size(); ++i) {
    csv << format_csv_number(scan.times_us(i)) << ','
        << format_csv_number(scan.gaps_khz(i)) << '\n';
  }
  files.push_back({"gaps.csv", csv.str()});
}

void run_dressing_sweep_mode(const ExperimentConfig& cfg,
                             nlohmann::json& results,
                             std::vector<PendingFile>& files) {
  const auto& section = require_object(cfg.raw, "dressing", "/dressing");
  const std::vector<SweepRow> rows = dressing_sweep(section);

  std::ostringstream csv;
  csv << "omega_mhz,delta_mhz,v_dd_mhz,j_mhz,admixture_single,"
         "admixture_pair,gamma_khz,kappa\n";
  const SweepRow* best = nullptr;
  for (const auto& row : rows) {
    csv << format_csv_number(row.omega_mhz) << ','
        << format_csv_number(row.delta_mhz) << ','
        << format_csv_number(row.v_dd_mhz) << ','
        << format_csv_number(row.j_mhz) << ','
        << format_csv_number(row.admixture_single) << ','
        << format_csv_number(row.admixture_pair) << ','
        << format_csv_number(row.gamma_khz) << ','
        << format_csv_number(row.kappa) << '\n';
    if (std::isfinite(row.kappa) && (!best || row.kappa > best->kappa)) {
      best = &row;
    }
  }
  files.push_back({"sweep.csv", csv.str()});

  results["grid"] = section;
  results["row_count"] = rows.size();
  if (best != nullptr) {
    results["best"] = nlohmann::json{{"omega_mhz", best->omega_mhz},
                                     {"delta_mhz", best->delta_mhz},
                                     {"v_dd_mhz", best->v_dd_mhz},
                                     {"j_mhz", best->j_mhz},
                                     {"admixture_single", best->admixture_single},
                                     {"admixture_pair", best->admixture_pair},
                                     {"gamma_khz", best->gamma_khz},
                                     {"kappa", best->kappa}};
  } else {
    results["best"] = nullptr;
  }
}

void run_benchmark_suite_mode(const ExperimentConfig& cfg,
                              nlohmann::json& results,
                              std::vector<PendingFile>& files) {
  nlohmann::json suite = nlohmann::json::object();
  if (cfg.raw.contains("suite")) {
    suite = require_object(cfg.raw, "suite", "/suite");
  }
  std::vector<int> sizes = {2, 3, 4};
  if (suite.contains("sizes")) {
    if (!suite.at("sizes").is_array() || suite.at("sizes").empty()) {
      throw SchemaError("suite sizes must be a non-empty array of integers",
                        "/suite/sizes");
    }
    sizes.clear();
    for (const auto& s : suite.at("sizes")) {
      if (!s.is_number_integer()) {
        throw SchemaError("suite sizes must be integers", "/suite/sizes");
      }
      sizes.push_back(static_cast<int>(s.get<int64_t>()));
    }
  }
  std::vector<double> times = {35.0, 90.0, 120.0};
  if (suite.contains("t_total_us")) {
    if (!suite.at("t_total_us").is_array()) {
      throw SchemaError("suite t_total_us must be an array parallel to sizes",
                        "/suite/t_total_us");
    }
    times.clear();
    for (const auto& t : suite.at("t_total_us")) {
      if (!t.is_number()) {
        throw SchemaError("suite t_total_us entries must be numbers",
                          "/suite/t_total_us");
      }
      times.push_back(t.get<double>());
    }
  } else if (sizes != std::vector<int>{2, 3, 4}) {
    throw SchemaError(
        "suite t_total_us is required when sizes deviates from the default",
        "/suite/t_total_us");
  }
  if (times.size() != sizes.size()) {
    throw SchemaError("suite t_total_us must have one entry per size",
                      "/suite/t_total_us");
  }
  const double j_nn =
      get_number_or(suite, "j_nn_khz", "/suite/j_nn_khz", 470.0);
  const double de_total = get_number_or(
      suite, "delta_e_total_khz", "/suite/delta_e_total_khz", 118.5);
  const double b_x = get_number_or(suite, "b_x_khz", "/suite/b_x_khz", 470.0);

  const NoiseModel noise = make_noise(cfg);
  const IntegratorConfig icfg = make_integrator(cfg);
  const double confidence = get_confidence(cfg);
  const int points = get_grid_points(cfg);

  nlohmann::json rows = nlohmann::json::array();
  std::vector<double> min_gaps;
  std::ostringstream csv;
  csv << "n,t_total_us,success_probability,min_gap_khz,ground_bitstring\n";
  for (size_t i = 0; i < sizes.size(); ++i) {
    AnnealSpec spec;
    spec.problem = benchmark_chain(sizes[i], j_nn, de_total);
    spec.b_x_khz = b_x;
    spec.schedule = Schedule::make_linear(times[i]);
    spec.validate();

    const AnnealOutcome outcome = run_anneal_solver(cfg, spec, noise, icfg);
    const nlohmann::json fidelity =
        fidelity_block(outcome.distribution, spec.problem, confidence);
    const GapScan scan = scan_gap(spec, points);
    min_gaps.push_back(scan.min_gap_khz);

    nlohmann::json row{{"n", sizes[i]},
                       {"t_total_us", times[i]},
                       {"method", outcome.method},
                       {"min_gap_khz", scan.min_gap_khz},
                       {"fidelity", fidelity}};
    if (!outcome.leak_block.is_null()) row["leak"] = outcome.leak_block;
    rows.push_back(row);

    csv << sizes[i] << ',' << format_csv_number(times[i]) << ','
        << (fidelity.contains("success_probability")
                ? format_csv_number(
                      fidelity.at("success_probability").get<double>())
                : std::string("nan"))
        << ',' << format_csv_number(scan.min_gap_khz) << ','
        << (fidelity.contains("ground_bitstring")
                ? fidelity.at("ground_bitstring").get<std::string>()
                : std::string(""))
        << '\n';
  }
  files.push_back({"suite.csv", csv.str()});

  results["suite"] = nlohmann::json{{"sizes", sizes},
                                    {"t_total_us", times},
                                    {"j_nn_khz", j_nn},
                                    {"delta_e_total_khz", de_total},
                                    {"b_x_khz", b_x}};
  results["noise"] = noise.to_json();
  results["rows"] = rows;
  if (sizes.size() >= 3) {
    try {
      results["gap_fit"] = gap_scaling_fit(sizes, min_gaps).to_json();
    } catch (const DomainError&) {
      results["gap_fit"] = nullptr;
    }
  } else {
    results["gap_fit"] = nullptr;
  }
}

// ---------------------------------------------------------------------------

void atomic_write(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw DomainError("cannot open \"" + tmp.string() + "\" for writing");
    }
    out << content;
    out.flush();
    if (!out) {
      throw DomainError("short write to \"" + tmp.string() + "\"");
    }
  }
  fs::rename(tmp, path);
}

}  // namespace

RunArtifacts run_experiment(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();

  RunArtifacts artifacts;
  artifacts.results = nlohmann::json::object();
  artifacts.results["mode"] = mode_name(cfg.mode);
  artifacts.results["seed"] = cfg.seed;
  artifacts.results["version"] = kVersion;

  std::vector<PendingFile> extra_files;
  switch (cfg.mode) {
    case ExperimentConfig::Mode::Anneal:
      run_anneal_mode(cfg, artifacts.results, extra_files);
      break;
    case ExperimentConfig::Mode::GapScan:
      run_gap_scan_mode(cfg, artifacts.results, extra_files);
      break;
    case ExperimentConfig::Mode::DressingSweep:
      run_dressing_sweep_mode(cfg, artifacts.results, extra_files);
      break;
    case ExperimentConfig::Mode::BenchmarkSuite:
      run_benchmark_suite_mode(cfg, artifacts.results, extra_files);
      break;
  }

  const fs::path out_dir = cfg.out_dir.empty() ? fs::path(".")
                                               : fs::path(cfg.out_dir);
  fs::create_directories(out_dir);

  atomic_write(out_dir / "results.json", artifacts.results.dump(2) + "\n");
  artifacts.files.push_back((out_dir / "results.json").string());
  for (const auto& file : extra_files) {
    atomic_write(out_dir / file.name, file.content);
    artifacts.files.push_back((out_dir / file.name).string());
  }

  const auto stop = std::chrono::steady_clock::now();
  const double wall_s =
      std::chrono::duration<double>(stop - start).count();
  nlohmann::json outputs = nlohmann::json::array();
  outputs.push_back("results.json");
  for (const auto& file : extra_files) outputs.push_back(file.name);
  outputs.push_back("manifest.json");
  artifacts.manifest = nlohmann::json{{"config_hash", cfg.hash_hex()},
                                      {"version", kVersion},
                                      {"mode", mode_name(cfg.mode)},
                                      {"wall_time_s", wall_s},
                                      {"outputs", outputs}};
  atomic_write(out_dir / "manifest.json", artifacts.manifest.dump(2) + "\n");
  artifacts.files.push_back((out_dir / "manifest.json").string());
  return artifacts;
}

}  // namespace rydsim
