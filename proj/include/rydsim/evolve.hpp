#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "rydsim/hamiltonian.hpp"

namespace rydsim {

// Spontaneous-emission channel: each qubit scatters independently at rate
// gamma_max * profile(t).  A scattered atom leaves coherent evolution for
// good (its bias and couplings are dropped; nothing re-dresses it) and its
// readout bit is drawn from `readout_split` (probability of logical 1),
// the uniform-over-Zeeman-sublevels default 7/16 for a caesium ground
// manifold read out by hyperfine lumping.
struct NoiseModel {
  enum class Profile { ScheduleEnvelope, Constant };

  double gamma_max_khz = 0.0;
  Profile time_profile = Profile::ScheduleEnvelope;  // rate follows B(t)
  double readout_split = 7.0 / 16.0;

  void validate() const;
  nlohmann::json to_json() const;
};

// Adaptive embedded Runge-Kutta (Dormand-Prince 5(4)) configuration.  An
// explicit stepper accumulates norm/population error proportional to
// steps * rel_tol (about 0.01 * steps * rel_tol for the benchmark family),
// so rel_tol is a local tolerance, not the final accuracy.  The default
// keeps the norm drift near 1e-7 over the longest documented ramp (280 us).
struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-13;
  double max_step_us = std::numeric_limits<double>::infinity();

  void validate() const;
};

struct IntegratorStats {
  uint64_t accepted_steps = 0;
  uint64_t rejected_steps = 0;
  uint64_t rhs_evaluations = 0;
  double conservation_drift = 0.0;  // |norm^2 - 1| or |trace + leak - 1|

  nlohmann::json to_json() const;
};

struct ClosedResult {
  StateVector psi;
  IntegratorStats stats;
};

// One scattered-subset sector of the open-system state: the reduced density
// matrix of the still-coherent qubits, conditioned on exactly the qubits in
// `scattered_mask` having scattered.
struct Sector {
  uint32_t scattered_mask = 0;
  std::vector<int> active;  // qubits not in the mask, ascending
  Eigen::MatrixXcd rho;     // dim 2^active.size()
};

struct OpenResult {
  int n = 0;
  std::vector<Sector> sectors;  // ordered by popcount, then mask value
  IntegratorStats stats;

  double leaked_mass() const;            // 1 - trace of the no-scatter sector
  double total_trace() const;            // sum of all sector traces
  double qubit_leak(int qubit) const;    // mass in sectors containing `qubit`
};

// Probability distribution over logical bitstrings (index bit i = ket label
// of qubit i).
struct ReadoutDistribution {
  int n = 0;
  Eigen::VectorXd probs;

  double success_probability(uint32_t basis_index) const {
    return probs(static_cast<Eigen::Index>(basis_index));
  }
  nlohmann::json to_json() const;  // {"bitstring": probability}
};

struct TrajectoryHistogram {
  int n = 0;
  uint64_t n_traj = 0;
  std::vector<uint64_t> counts;  // per basis index

  ReadoutDistribution distribution() const;
};

// Integrates i d|psi>/dt = H(t) |psi> from |+>^n over [0, T] (coefficients
// in kHz enter with the kPhasePerKhzUs conversion).  The final norm drift
// is reported in stats.conservation_drift; a NumericalError fires only if
// it exceeds 100 * steps * rel_tol, far beyond honest truncation error --
// that tripwire catches a non-Hermitian right-hand side or a blow-up, and
// callers enforce their own absolute drift budgets from the stats.
ClosedResult evolve_closed(const AnnealSpec& spec, const IntegratorConfig& cfg);

// Sector-resolved master equation: reduced density matrices indexed by the
// scattered subset S evolve under
//   d rho_S/dt = -i [H_S, rho_S] - (n - |S|) g(t) rho_S
//                + g(t) sum_{q in S} Tr_q rho_{S \ {q}},
// which conserves the total trace exactly and keeps every sector consistent
// with "scattered atoms are gone".  Memory is sum_k C(n,k) 4^(n-k) = 5^n
// complex entries, capped at n <= 7.
OpenResult evolve_open(const AnnealSpec& spec, const NoiseModel& noise,
                       const IntegratorConfig& cfg);

// Monte Carlo unraveling of evolve_open.  Jump times are state-independent
// (first-passage of the inhomogeneous rate), so they are drawn up front;
// at a jump the atom's bit is measured (Born back-action on the register),
// its Hamiltonian terms are dropped, and its readout bit is replaced by a
// readout_split draw.  Each trajectory derives its own RNG stream from
// (seed, index), making the histogram independent of the thread count.
TrajectoryHistogram evolve_trajectories(const AnnealSpec& spec,
                                        const NoiseModel& noise,
                                        const IntegratorConfig& cfg,
                                        uint64_t n_traj, uint64_t seed,
                                        int threads = 1);

// Computational-basis readout.
ReadoutDistribution readout(const ClosedResult& state, int n_qubits);
// Scattered atoms' bits are distributed per readout_split.
ReadoutDistribution readout(const OpenResult& state, double readout_split);
ReadoutDistribution readout(const TrajectoryHistogram& hist);

namespace detail {

// Generic schedule-driven propagation A(t) H_left + [B(t) or 1] H_right
// pieces; exposed for tests that need a non-Ising problem Hamiltonian.
ClosedResult integrate_schedule(const SparseOperator& h_b,
                                const SparseOperator& h_couplings,
                                const SparseOperator& h_biases,
                                const Schedule& schedule, bool hold_biases,
                                StateVector psi0, const IntegratorConfig& cfg);

// Deterministic per-trajectory RNG substream.
class SplitMix64 {
 public:
  SplitMix64(uint64_t seed, uint64_t stream);
  uint64_t next();
  double uniform01();  // in [0, 1), 53-bit resolution

 private:
  uint64_t state_;
};

}  // namespace detail

}  // namespace rydsim
