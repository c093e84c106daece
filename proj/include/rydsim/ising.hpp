#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "rydsim/units.hpp"

namespace rydsim {

// Binary quadratic cost  f(x) = sum_i h_i x_i + sum_{i<j} J_ij x_i x_j,
// x_i in {0,1}.  `quadratic` is stored as a full symmetric matrix with a
// zero diagonal; each pair contributes once to f (the symmetric halves are
// averaged on evaluation).
struct QuboInstance {
  int n = 0;
  Eigen::VectorXd linear_khz;      // h_i
  Eigen::MatrixXd quadratic_khz;   // J_ij, symmetric, zero diagonal

  // Throws SchemaError if dimensions mismatch, the matrix is not symmetric
  // (1e-12 relative), or the diagonal is nonzero.
  void validate() const;
  double evaluate(uint32_t assignment) const;  // bit i of `assignment` = x_i
};

// Spin Hamiltonian  E(sigma) = sum_i h~_i sigma_i + sum_{i<j} J~_ij sigma_i sigma_j,
// sigma_i in {-1,+1}, plus a constant `energy_offset` so that
// f(x) = E(sigma(x)) + offset exactly under x_i = (1 + sigma_i)/2.
//
// Basis conventions (pinned project-wide):
//   ket |0>  <->  sigma_z = +1  <->  x = 1
//   bit i of a basis index is the ket label of qubit i (qubit 0 = LSB);
//   bitstrings render with qubit 0 leftmost.
// Hence the ket label b_i and the binary variable satisfy x_i = 1 - b_i.
struct IsingProblem {
  int n = 0;
  Eigen::VectorXd h_tilde_khz;
  Eigen::MatrixXd j_tilde_khz;     // symmetric, zero diagonal
  double energy_offset_khz = 0.0;

  void validate() const;
  double energy(uint32_t basis_index) const;   // E(sigma), offset excluded
  std::vector<std::pair<int, int>> edges() const;  // i<j with J~_ij != 0

  nlohmann::json to_json() const;
  static IsingProblem from_json(const nlohmann::json& j);
};

// A computational basis state of n qubits.
struct SpinConfiguration {
  uint32_t index = 0;
  int n = 0;

  int bit(int qubit) const { return static_cast<int>((index >> qubit) & 1u); }
  int sigma(int qubit) const { return bit(qubit) == 0 ? +1 : -1; }
  std::string to_string() const;  // qubit 0 leftmost
};

struct GroundStateResult {
  SpinConfiguration configuration;
  double energy_khz = 0.0;             // E(sigma) of the minimizer (no offset)
  double gap_khz = 0.0;                // to the second-lowest distinct energy
  int degeneracy = 1;                  // states sharing the minimum energy
};

// Per-edge dressing choice realizing the requested coupling signs with a
// physically negative J (blue-detuned dressing).  Dressing the equal pair
// states (x1 == x2) keeps the sign of the physical coupling in the
// sigma.sigma coefficient (+J/4); dressing unequal states flips it (-J/4).
struct DressingAssignment {
  std::vector<int> atom_level;                      // 0/1 per atom
  std::vector<std::pair<int, int>> equal_edges;     // edges dressed x1 == x2
  std::vector<std::pair<int, int>> unequal_edges;   // edges dressed x1 != x2
};

// Expands the projector identity x_i = (1 + sigma_i)/2:
//   J~_ij = J_ij / 4
//   h~_i  = h_i / 2 + sum_j J~_ij
//   offset = sum_i h_i / 2 + sum_{i<j} J_ij / 4
IsingProblem qubo_to_ising(const QuboInstance& q);

// The nearest-neighbour chain family used throughout: QUBO couplings
// J on edges (i, i+1) and site energies h_i = -(i/n) * deltaE_total
// (i = 1..n), mapped through qubo_to_ising.  The sign of the site ladder is
// chosen so the sigma_z ground state is the alternating pattern ending in
// ket |0> (|10>, |010>, |1010>, ...), with problem-Hamiltonian gap
// deltaE_total / n.  Requires n >= 2 and n * deltaE < J, where
// deltaE = deltaE_total / n; outside that window the solution pattern is
// not guaranteed and construction fails.
IsingProblem benchmark_chain(int n, double j_nn_khz, double delta_e_total_khz);

// Exhaustive minimizer over all 2^n spin configurations.  Ties are broken
// toward the lexicographically smallest bitstring (qubit 0 leftmost);
// `degeneracy` counts states at the minimum energy, and `gap_khz` is the
// distance to the second-lowest distinct energy (0 if fully degenerate).
GroundStateResult brute_force_ground(const IsingProblem& p,
                                     int enumeration_cap = kBruteForceCapDefault);

// Chooses which computational pair state each edge dresses so that the
// effective +-(J/4) sigma.sigma signs reproduce p's coupling signs, assuming
// physical J < 0.  Reduces to parity-constrained two-coloring; throws
// DomainError listing the frustrated edges when no consistent assignment
// exists (for chains one always does).
DressingAssignment sign_mask_for_couplings(const IsingProblem& p);

}  // namespace rydsim
