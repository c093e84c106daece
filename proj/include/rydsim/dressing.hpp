#pragma once

#include <limits>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace rydsim {

// Laser / level parameters of a dressed pair.  MHz inside this module;
// kHz only for the linewidth and scattering rate, matching how the scales
// are usually quoted.
struct DressingParams {
  double omega_mhz = 0.0;       // Rydberg Rabi frequency Omega_r
  double delta_mhz = 0.0;       // laser detuning Delta_r = w_L - w_gr, signed
  double gamma_line_khz = 0.0;  // Rydberg linewidth Gamma_r / 2pi
  double v_dd_mhz =
      std::numeric_limits<double>::infinity();  // blockade shift; +inf = perfect

  void validate() const;  // omega_mhz > 0, gamma_line_khz >= 0
};

struct DressedPairResult {
  double j_coupling_mhz = 0.0;        // pair shift minus twice the single shift
  double single_light_shift_mhz = 0.0;
  double pair_light_shift_mhz = 0.0;
  double rydberg_admixture_single = 0.0;  // Rydberg population, dressed atom
  double rydberg_admixture_pair = 0.0;    // excited-character population of the
                                          // dressed pair state (bright + 2 |rr>)
  double scattering_rate_khz = 0.0;       // gamma_r / 2pi
  double kappa = 0.0;                     // |J| / gamma_r (infinite if gamma=0)
  double dressed_gap_mhz = 0.0;  // blockaded pair splitting sqrt(2 Omega^2 + Delta^2)
};

// Long-range tail of the coupling: plateau at the blockaded value for
// r <= reference_distance, power-law falloff J(r0) (r0/r)^k beyond.
struct TailModel {
  int k_exponent = 6;              // 3 (Forster) or 6 (van der Waals)
  double reference_distance_um = 0.0;
  double reference_coupling_mhz = 0.0;

  void validate() const;
};

// Perfect-blockade entangling shift of the laser-dressed ground branch,
//   J = -sgn(Delta) Omega^4 / [(|Delta| + S1)(|Delta| + S2)(S1 + S2)],
//   S1 = sqrt(Delta^2 + Omega^2),  S2 = sqrt(Delta^2 + 2 Omega^2),
// which is the textbook 1/2 (Delta + S2 - 2 S1) for Delta > 0 rewritten as
// a product so the fourth-order cancellation never happens in floating
// point.  Odd in Delta (the ground branch flips sign with the detuning;
// J < 0 for Delta > 0).  Total function; Delta = 0 returns the blue-side
// limit -(1 - 1/sqrt 2) Omega; v_dd is ignored.
double j_closed_form(const DressingParams& p);

// Fourth-order weak-dressing limit J ~ -Omega^4 / (8 Delta^3).
double j_perturbative(const DressingParams& p);

// Diagonalizes the symmetric-subspace pair model
//   { |gg> at 0,  bright (|rg>+|gr>)/sqrt2 at -Delta,  |rr> at -2 Delta + V }
// with couplings Omega/sqrt2 on both links, plus the single-atom two-level
// problem for the single light shift.  Dressed energies are assigned to bare
// levels by maximum overlap; at Delta = 0 the branches touch and the
// assignment is ambiguous, which is a NumericalError, never silently
// resolved.  The blockaded (v_dd = +inf) case reduces to two-level problems
// solved analytically in extended precision: J is a fourth-order residue of
// the light shifts, so the final subtraction needs guard digits to stay
// meaningful at weak dressing (Omega << |Delta|).
DressedPairResult diagonalize_pair(const DressingParams& p);

// gamma_r = N_r * Gamma_r with N_r the Rydberg population of the dressed
// pair state (the blockaded pair shares one excitation; this is not twice
// the single-atom population), and kappa = |J| / gamma_r.
struct ScatteringAndMerit {
  double gamma_khz = 0.0;
  double kappa = 0.0;
};
ScatteringAndMerit scattering_and_merit(const DressingParams& p);

// J(r): plateau for r <= r0, J(r0) (r0/r)^k beyond; continuous at r0.
double j_at_distance(const TailModel& tail, double r_um);

// One row of a parameter sweep, mirroring the CSV columns.
struct SweepRow {
  double omega_mhz, delta_mhz, v_dd_mhz;
  double j_mhz, admixture_single, admixture_pair, gamma_khz, kappa;
};

// Cartesian sweep over the grids given in a JSON description of the form
//   {"omega_mhz": [...] | {"min":, "max":, "count":}, "delta_mhz": ...,
//    "v_dd_mhz": ... (optional, default infinity), "gamma_line_khz": x}
// Rows are emitted in row-major omega/delta/v_dd order.
std::vector<SweepRow> dressing_sweep(const nlohmann::json& grid_spec);

}  // namespace rydsim
