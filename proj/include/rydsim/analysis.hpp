#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "rydsim/evolve.hpp"
#include "rydsim/hamiltonian.hpp"
#include "rydsim/ising.hpp"

namespace rydsim {

// Instantaneous spectral gap E1(t) - E0(t) of H(t) along the schedule.
struct GapScan {
  Eigen::VectorXd times_us;
  Eigen::VectorXd gaps_khz;
  double min_gap_khz = 0.0;
  double min_gap_time_us = 0.0;
};

// Dense diagonalization on a uniform grid (n_points >= 3) followed by a
// golden-section refinement of the coarse minimum.  The Hilbert space is
// diagonalized exactly, so the qubit count is capped at kGapScanCap.
GapScan scan_gap(const AnnealSpec& spec, int n_points = 201);

// Power-law fit  min_gap(n) = C * n^alpha  by least squares in log-log
// coordinates.  Requires >= 3 distinct sizes and strictly positive gaps.
struct GapFit {
  double exponent = 0.0;        // alpha
  double prefactor_khz = 0.0;   // C
  double rms_log_residual = 0.0;

  nlohmann::json to_json() const;
};

GapFit gap_scaling_fit(const std::vector<int>& sizes,
                       const std::vector<double>& min_gaps_khz);

// Success statistics of a readout distribution against the exact ground
// state of the problem.  Refuses degenerate problems (a single target
// bitstring is then ill-defined).
struct FidelityReport {
  uint32_t ground_index = 0;
  std::string ground_bitstring;
  double success_probability = 0.0;
  uint32_t modal_index = 0;
  std::string modal_bitstring;
  bool modal_matches_ground = false;
  double confidence = 0.0;
  // Independent repetitions needed to see the ground state at least once
  // with the requested confidence; +inf when success_probability == 0.
  double trials_to_confidence = 0.0;

  nlohmann::json to_json() const;
};

FidelityReport fidelity_report(const ReadoutDistribution& distribution,
                               const IsingProblem& problem,
                               double confidence = 0.99);

// Adiabatic-timescale estimate max_s |<E1(s)| dH/ds |E0(s)>| / gap(s)^2,
// converted to microseconds.  A total time a safety factor above this value
// keeps the final ground-state population high for generic instances; it is
// a heuristic, not a bound.
double adiabatic_heuristic_time_us(const AnnealSpec& spec, int n_points = 201);

}  // namespace rydsim
