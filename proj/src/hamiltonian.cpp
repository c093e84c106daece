#include "rydsim/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

#include "rydsim/error.hpp"

namespace rydsim {

SparseOperator SparseOperator::from_triplets(int n_qubits,
                                             std::vector<Triplet> entries,
                                             Representation rep) {
  if (n_qubits < 1 || n_qubits > kStateVectorCap) {
    throw DomainError("SparseOperator: qubit count " +
                      std::to_string(n_qubits) + " outside [1, " +
                      std::to_string(kStateVectorCap) + "]");
  }
  SparseOperator op;
  op.n_qubits_ = n_qubits;
  op.dim_ = uint64_t{1} << n_qubits;
  op.dense_ = rep == Representation::Auto
                  ? n_qubits < kDenseOperatorQubitLimit
                  : rep == Representation::Dense;

  // Coalesce duplicates; keep deterministic (row, col) order.
  std::map<std::pair<uint64_t, uint64_t>, Complex> cells;
  for (const auto& t : entries) {
    if (t.row >= op.dim_ || t.col >= op.dim_) {
      throw DomainError("SparseOperator: entry outside matrix");
    }
    cells[{t.row, t.col}] += t.value;
  }
  if (op.dense_) {
    op.mat_ = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(op.dim_),
                                     static_cast<Eigen::Index>(op.dim_));
    for (const auto& [rc, v] : cells) {
      op.mat_(static_cast<Eigen::Index>(rc.first),
              static_cast<Eigen::Index>(rc.second)) = v;
    }
  } else {
    op.row_ptr_.assign(op.dim_ + 1, 0);
    for (const auto& [rc, v] : cells) {
      (void)v;
      ++op.row_ptr_[rc.first + 1];
    }
    for (uint64_t r = 0; r < op.dim_; ++r) op.row_ptr_[r + 1] += op.row_ptr_[r];
    op.cols_.resize(cells.size());
    op.vals_.resize(cells.size());
    uint64_t idx = 0;
    for (const auto& [rc, v] : cells) {  // map order = ascending (row, col)
      op.cols_[idx] = rc.second;
      op.vals_[idx] = v;
      ++idx;
    }
  }
  return op;
}

bool SparseOperator::is_diagonal() const {
  if (dense_) {
    for (Eigen::Index r = 0; r < mat_.rows(); ++r) {
      for (Eigen::Index c = 0; c < mat_.cols(); ++c) {
        if (r != c && mat_(r, c) != Complex{0.0, 0.0}) return false;
      }
    }
    return true;
  }
  for (uint64_t r = 0; r < dim_; ++r) {
    for (uint64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      if (cols_[k] != r && vals_[k] != Complex{0.0, 0.0}) return false;
    }
  }
  return true;
}

double SparseOperator::hermiticity_defect() const {
  double worst = 0.0;
  if (dense_) {
    for (Eigen::Index r = 0; r < mat_.rows(); ++r) {
      for (Eigen::Index c = r; c < mat_.cols(); ++c) {
        worst = std::max(worst, std::abs(mat_(r, c) - std::conj(mat_(c, r))));
      }
    }
    return worst;
  }
  for (uint64_t r = 0; r < dim_; ++r) {
    for (uint64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      worst = std::max(worst,
                       std::abs(vals_[k] - std::conj(coeff(cols_[k], r))));
    }
  }
  return worst;
}

Complex SparseOperator::coeff(uint64_t row, uint64_t col) const {
  if (dense_) {
    return mat_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
  }
  const auto begin = cols_.begin() + static_cast<ptrdiff_t>(row_ptr_[row]);
  const auto end = cols_.begin() + static_cast<ptrdiff_t>(row_ptr_[row + 1]);
  const auto it = std::lower_bound(begin, end, col);
  if (it == end || *it != col) return Complex{0.0, 0.0};
  return vals_[static_cast<size_t>(it - cols_.begin())];
}

void SparseOperator::apply(const StateVector& in, StateVector* out) const {
  if (static_cast<uint64_t>(in.size()) != dim_) {
    throw DomainError("SparseOperator::apply: dimension mismatch");
  }
  out->resize(in.size());
  if (dense_) {
    // Explicit ascending-column accumulation (not Eigen's GEMV) so the dense
    // and sparse paths stay bit-identical; adding structural zeros is exact.
    for (uint64_t r = 0; r < dim_; ++r) {
      Complex acc{0.0, 0.0};
      for (uint64_t c = 0; c < dim_; ++c) {
        acc += mat_(static_cast<Eigen::Index>(r),
                    static_cast<Eigen::Index>(c)) *
               in(static_cast<Eigen::Index>(c));
      }
      (*out)(static_cast<Eigen::Index>(r)) = acc;
    }
    return;
  }
  for (uint64_t r = 0; r < dim_; ++r) {
    Complex acc{0.0, 0.0};
    for (uint64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      acc += vals_[k] * in(static_cast<Eigen::Index>(cols_[k]));
    }
    (*out)(static_cast<Eigen::Index>(r)) = acc;
  }
}

StateVector SparseOperator::apply(const StateVector& in) const {
  StateVector out;
  apply(in, &out);
  return out;
}

Eigen::MatrixXcd SparseOperator::dense_matrix() const {
  if (dense_) return mat_;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(
      static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
  for (uint64_t r = 0; r < dim_; ++r) {
    for (uint64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(cols_[k])) =
          vals_[k];
    }
  }
  return m;
}

SparseOperator SparseOperator::scaled_sum(double a, const SparseOperator& other,
                                          double b) const {
  if (other.n_qubits_ != n_qubits_) {
    throw DomainError("SparseOperator::scaled_sum: qubit count mismatch");
  }
  std::vector<Triplet> entries;
  auto collect = [&entries](const SparseOperator& op, double scale) {
    if (op.dense_) {
      for (Eigen::Index r = 0; r < op.mat_.rows(); ++r) {
        for (Eigen::Index c = 0; c < op.mat_.cols(); ++c) {
          const Complex v = op.mat_(r, c);
          if (v != Complex{0.0, 0.0}) {
            entries.push_back(Triplet{static_cast<uint64_t>(r),
                                      static_cast<uint64_t>(c), scale * v});
          }
        }
      }
    } else {
      for (uint64_t r = 0; r < op.dim_; ++r) {
        for (uint64_t k = op.row_ptr_[r]; k < op.row_ptr_[r + 1]; ++k) {
          entries.push_back(Triplet{r, op.cols_[k], scale * op.vals_[k]});
        }
      }
    }
  };
  collect(*this, a);
  collect(other, b);
  return from_triplets(n_qubits_, std::move(entries),
                       dense_ ? Representation::Dense : Representation::Sparse);
}

void Schedule::validate() const {
  if (!(total_time_us > 0.0)) {
    throw SchemaError("schedule: total time must be > 0", "/schedule/t_total_us");
  }
  if (linear) return;
  if (knots.size() < 2) {
    throw SchemaError("schedule: piecewise shape needs at least 2 knots",
                      "/schedule/shape");
  }
  if (knots.front()[0] != 0.0 || knots.front()[1] != 1.0 ||
      knots.front()[2] != 0.0) {
    throw SchemaError("schedule: first knot must be (0, 1, 0)",
                      "/schedule/shape");
  }
  if (knots.back()[0] != total_time_us || knots.back()[1] != 0.0 ||
      knots.back()[2] != 1.0) {
    throw SchemaError("schedule: last knot must be (T, 0, 1)",
                      "/schedule/shape");
  }
  for (size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i][0] > knots[i - 1][0])) {
      throw SchemaError("schedule: knot times must strictly increase",
                        "/schedule/shape");
    }
  }
}

namespace {

double interp(const std::vector<std::array<double, 3>>& knots, double t,
              int component) {
  size_t hi = 1;
  while (hi + 1 < knots.size() && knots[hi][0] < t) ++hi;
  const auto& k0 = knots[hi - 1];
  const auto& k1 = knots[hi];
  const double w = (t - k0[0]) / (k1[0] - k0[0]);
  return k0[static_cast<size_t>(component)] +
         w * (k1[static_cast<size_t>(component)] -
              k0[static_cast<size_t>(component)]);
}

double slope(const std::vector<std::array<double, 3>>& knots, double t,
             int component) {
  size_t hi = 1;
  while (hi + 1 < knots.size() && knots[hi][0] <= t) ++hi;
  const auto& k0 = knots[hi - 1];
  const auto& k1 = knots[hi];
  return (k1[static_cast<size_t>(component)] -
          k0[static_cast<size_t>(component)]) /
         (k1[0] - k0[0]);
}

}  // namespace

double Schedule::a(double t_us) const {
  if (linear) return 1.0 - t_us / total_time_us;
  return interp(knots, t_us, 1);
}

double Schedule::b(double t_us) const {
  if (linear) return t_us / total_time_us;
  return interp(knots, t_us, 2);
}

double Schedule::da_dt(double t_us) const {
  if (linear) return -1.0 / total_time_us;
  return slope(knots, t_us, 1);
}

double Schedule::db_dt(double t_us) const {
  if (linear) return 1.0 / total_time_us;
  return slope(knots, t_us, 2);
}

Schedule Schedule::make_linear(double total_time_us) {
  Schedule s;
  s.total_time_us = total_time_us;
  s.linear = true;
  s.validate();
  return s;
}

nlohmann::json Schedule::to_json() const {
  nlohmann::json j;
  j["t_total_us"] = total_time_us;
  if (linear) {
    j["shape"] = "linear";
  } else {
    j["shape"] = knots;
  }
  return j;
}

void AnnealSpec::validate() const {
  problem.validate();
  schedule.validate();
  if (!(b_x_khz > 0.0)) {
    throw SchemaError("anneal: b_x_khz must be > 0", "/schedule/b_x_khz");
  }
}

nlohmann::json AnnealSpec::to_json() const {
  nlohmann::json j;
  j["problem"] = problem.to_json();
  j["b_x_khz"] = b_x_khz;
  j["schedule"] = schedule.to_json();
  j["hold_biases"] = hold_biases;
  return j;
}

SparseOperator build_h_b(int n_qubits, double b_x_khz,
                         SparseOperator::Representation rep) {
  std::vector<SparseOperator::Triplet> entries;
  const uint64_t dim = uint64_t{1} << n_qubits;
  entries.reserve(dim * static_cast<uint64_t>(n_qubits));
  for (uint64_t k = 0; k < dim; ++k) {
    for (int i = 0; i < n_qubits; ++i) {
      entries.push_back(SparseOperator::Triplet{
          k ^ (uint64_t{1} << i), k, Complex{-b_x_khz, 0.0}});
    }
  }
  return SparseOperator::from_triplets(n_qubits, std::move(entries), rep);
}

namespace {

SparseOperator diagonal_operator(const IsingProblem& p, bool biases,
                                 bool couplings,
                                 SparseOperator::Representation rep) {
  p.validate();
  std::vector<SparseOperator::Triplet> entries;
  const uint64_t dim = uint64_t{1} << p.n;
  entries.reserve(dim);
  for (uint64_t k = 0; k < dim; ++k) {
    double e = 0.0;
    for (int i = 0; i < p.n; ++i) {
      const double si = ((k >> i) & 1u) ? -1.0 : 1.0;
      if (biases) e += p.h_tilde_khz(i) * si;
      if (couplings) {
        for (int j = i + 1; j < p.n; ++j) {
          const double sj = ((k >> j) & 1u) ? -1.0 : 1.0;
          e += p.j_tilde_khz(i, j) * si * sj;
        }
      }
    }
    if (e != 0.0) {
      entries.push_back(SparseOperator::Triplet{k, k, Complex{e, 0.0}});
    }
  }
  return SparseOperator::from_triplets(p.n, std::move(entries), rep);
}

}  // namespace

SparseOperator build_h_p(const IsingProblem& p,
                         SparseOperator::Representation rep) {
  return diagonal_operator(p, true, true, rep);
}

SparseOperator build_h_p_bias(const IsingProblem& p,
                              SparseOperator::Representation rep) {
  return diagonal_operator(p, true, false, rep);
}

SparseOperator build_h_p_couplings(const IsingProblem& p,
                                   SparseOperator::Representation rep) {
  return diagonal_operator(p, false, true, rep);
}

SparseOperator h_of_t(const AnnealSpec& spec, double t_us) {
  spec.validate();
  if (t_us < 0.0 || t_us > spec.schedule.total_time_us) {
    throw DomainError("h_of_t: t = " + std::to_string(t_us) +
                      " outside [0, " +
                      std::to_string(spec.schedule.total_time_us) + "]");
  }
  const double a = spec.schedule.a(t_us);
  const double b = spec.schedule.b(t_us);
  const SparseOperator hb = build_h_b(spec.problem.n, spec.b_x_khz);
  if (!spec.hold_biases) {
    return hb.scaled_sum(a, build_h_p(spec.problem), b);
  }
  const SparseOperator ramped =
      hb.scaled_sum(a, build_h_p_couplings(spec.problem), b);
  return ramped.scaled_sum(1.0, build_h_p_bias(spec.problem), 1.0);
}

}  // namespace rydsim
