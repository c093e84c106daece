#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "rydsim/ising.hpp"
#include "rydsim/units.hpp"

namespace rydsim {

using Complex = std::complex<double>;
using StateVector = Eigen::VectorXcd;

// Hermitian operator on n qubits in the sigma_z product basis, in kHz.
// Small systems store a dense matrix, larger ones a CSR layout; both apply
// paths accumulate contributions in ascending column order per row, so the
// two representations produce bit-identical results.
class SparseOperator {
 public:
  enum class Representation { Auto, Dense, Sparse };

  struct Triplet {
    uint64_t row, col;
    Complex value;
  };

  SparseOperator() = default;
  static SparseOperator from_triplets(int n_qubits,
                                      std::vector<Triplet> entries,
                                      Representation rep = Representation::Auto);

  int n_qubits() const { return n_qubits_; }
  uint64_t dimension() const { return dim_; }
  bool is_dense() const { return dense_; }
  bool is_diagonal() const;
  double hermiticity_defect() const;  // max |H - H^dagger| entry

  void apply(const StateVector& in, StateVector* out) const;  // out = H in
  StateVector apply(const StateVector& in) const;
  Complex coeff(uint64_t row, uint64_t col) const;
  Eigen::MatrixXcd dense_matrix() const;

  SparseOperator scaled_sum(double a, const SparseOperator& other,
                            double b) const;  // a*this + b*other

 private:
  int n_qubits_ = 0;
  uint64_t dim_ = 0;
  bool dense_ = true;
  Eigen::MatrixXcd mat_;          // dense storage
  std::vector<uint64_t> row_ptr_; // CSR storage
  std::vector<uint64_t> cols_;
  std::vector<Complex> vals_;
};

// Ramp envelopes A(t), B(t) on [0, T].  The linear shape is A = 1 - t/T,
// B = t/T; a piecewise-linear shape interpolates user knots (t, a, b),
// which must start at (0, 1, 0), end at (T, 0, 1), and be time-ordered.
struct Schedule {
  double total_time_us = 0.0;
  bool linear = true;
  std::vector<std::array<double, 3>> knots;  // used when !linear

  void validate() const;
  double a(double t_us) const;
  double b(double t_us) const;
  // Slopes da/dt, db/dt at t (right-continuous at knots).
  double da_dt(double t_us) const;
  double db_dt(double t_us) const;

  static Schedule make_linear(double total_time_us);
  nlohmann::json to_json() const;
};

// A full annealing problem: H(t) = A(t) H_B + B(t) H_P, starting from the
// ground state of H_B = -B_x sum_i sigma_x.  When `hold_biases` is set the
// bias part of H_P stays at full strength throughout (the couplings still
// ramp with B); by default biases ramp together with the couplings.
struct AnnealSpec {
  IsingProblem problem;
  double b_x_khz = 0.0;
  Schedule schedule;
  bool hold_biases = false;

  void validate() const;
  nlohmann::json to_json() const;
};

// -B_x sum_i sigma_x^(i); ground state |+>^n at energy -n B_x.
SparseOperator build_h_b(int n_qubits, double b_x_khz,
                         SparseOperator::Representation rep =
                             SparseOperator::Representation::Auto);

// Diagonal sum_i h~_i sigma_z + sum_{i<j} J~_ij sigma_z sigma_z; the diagonal
// entry at basis index k equals IsingProblem::energy(k).
SparseOperator build_h_p(const IsingProblem& p,
                         SparseOperator::Representation rep =
                             SparseOperator::Representation::Auto);

// Bias-only and coupling-only parts of H_P (they sum to build_h_p).
SparseOperator build_h_p_bias(const IsingProblem& p,
                              SparseOperator::Representation rep =
                                  SparseOperator::Representation::Auto);
SparseOperator build_h_p_couplings(const IsingProblem& p,
                                   SparseOperator::Representation rep =
                                       SparseOperator::Representation::Auto);

// H(t) = A(t) H_B + B(t) H_P (with the hold_biases variant as documented on
// AnnealSpec).  Throws DomainError for t outside [0, T].
SparseOperator h_of_t(const AnnealSpec& spec, double t_us);

}  // namespace rydsim
