#include "rydsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "rydsim/error.hpp"
#include "rydsim/units.hpp"

namespace rydsim {
namespace {

// E1 - E0 of the dense instantaneous Hamiltonian at time t.
double gap_at(const AnnealSpec& spec, const Eigen::MatrixXcd& h_mixer,
              const Eigen::MatrixXcd& h_couplings,
              const Eigen::MatrixXcd& h_biases, double t_us) {
  const double a = spec.schedule.a(t_us);
  const double b = spec.schedule.b(t_us);
  const double bb = spec.hold_biases ? 1.0 : b;
  const Eigen::MatrixXcd h = a * h_mixer + b * h_couplings + bb * h_biases;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h,
                                                     Eigen::EigenvaluesOnly);
  return es.eigenvalues()(1) - es.eigenvalues()(0);
}

}  // namespace

GapScan scan_gap(const AnnealSpec& spec, int n_points) {
  spec.validate();
  if (spec.problem.n > kGapScanCap) {
    throw DomainError("scan_gap: n = " + std::to_string(spec.problem.n) +
                      " exceeds the dense-diagonalization cap " +
                      std::to_string(kGapScanCap));
  }
  if (n_points < 3) {
    throw DomainError("scan_gap: n_points must be >= 3");
  }

  const Eigen::MatrixXcd h_mixer =
      build_h_b(spec.problem.n, spec.b_x_khz).dense_matrix();
  const Eigen::MatrixXcd h_couplings =
      build_h_p_couplings(spec.problem).dense_matrix();
  const Eigen::MatrixXcd h_biases =
      build_h_p_bias(spec.problem).dense_matrix();

  const double t_total = spec.schedule.total_time_us;
  GapScan scan;
  scan.times_us.resize(n_points);
  scan.gaps_khz.resize(n_points);
  int coarse_min = 0;
  for (int i = 0; i < n_points; ++i) {
    const double t = t_total * static_cast<double>(i) / (n_points - 1);
    scan.times_us(i) = t;
    scan.gaps_khz(i) =
        gap_at(spec, h_mixer, h_couplings, h_biases, t);
    if (scan.gaps_khz(i) < scan.gaps_khz(coarse_min)) coarse_min = i;
  }

  // Golden-section refinement in the bracket around the coarse minimum.
  double lo = scan.times_us(std::max(coarse_min - 1, 0));
  double hi = scan.times_us(std::min(coarse_min + 1, n_points - 1));
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = gap_at(spec, h_mixer, h_couplings, h_biases, x1);
  double f2 = gap_at(spec, h_mixer, h_couplings, h_biases, x2);
  for (int iter = 0; iter < 80 && (hi - lo) > 1e-10 * std::max(t_total, 1.0);
       ++iter) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = gap_at(spec, h_mixer, h_couplings, h_biases, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = gap_at(spec, h_mixer, h_couplings, h_biases, x2);
    }
  }
  const double t_star = 0.5 * (lo + hi);
  const double refined = gap_at(spec, h_mixer, h_couplings, h_biases, t_star);
  if (refined < scan.gaps_khz(coarse_min)) {
    scan.min_gap_khz = refined;
    scan.min_gap_time_us = t_star;
  } else {
    scan.min_gap_khz = scan.gaps_khz(coarse_min);
    scan.min_gap_time_us = scan.times_us(coarse_min);
  }
  return scan;
}

nlohmann::json GapFit::to_json() const {
  return nlohmann::json{{"exponent", exponent},
                        {"prefactor_khz", prefactor_khz},
                        {"rms_log_residual", rms_log_residual}};
}

GapFit gap_scaling_fit(const std::vector<int>& sizes,
                       const std::vector<double>& min_gaps_khz) {
  if (sizes.size() != min_gaps_khz.size()) {
    throw DomainError("gap_scaling_fit: sizes and gaps must pair up");
  }
  if (sizes.size() < 3) {
    throw DomainError(
        "gap_scaling_fit: need at least 3 system sizes for a power-law fit");
  }
  std::set<int> distinct(sizes.begin(), sizes.end());
  if (distinct.size() != sizes.size()) {
    throw DomainError("gap_scaling_fit: system sizes must be distinct");
  }

  const auto m = static_cast<Eigen::Index>(sizes.size());
  Eigen::VectorXd x(m), y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (sizes[i] < 1) {
      throw DomainError("gap_scaling_fit: sizes must be >= 1");
    }
    if (!(min_gaps_khz[i] > 0.0)) {
      throw DomainError(
          "gap_scaling_fit: gaps must be strictly positive (got " +
          std::to_string(min_gaps_khz[i]) + " kHz at n = " +
          std::to_string(sizes[i]) + ")");
    }
    x(i) = std::log(static_cast<double>(sizes[i]));
    y(i) = std::log(min_gaps_khz[i]);
  }

  const double x_mean = x.mean();
  const double y_mean = y.mean();
  const Eigen::VectorXd dx = x.array() - x_mean;
  const double sxx = dx.squaredNorm();
  GapFit fit;
  fit.exponent = dx.dot(y - Eigen::VectorXd::Constant(m, y_mean)) / sxx;
  const double intercept = y_mean - fit.exponent * x_mean;
  fit.prefactor_khz = std::exp(intercept);
  const Eigen::VectorXd resid =
      y - (fit.exponent * x + Eigen::VectorXd::Constant(m, intercept));
  fit.rms_log_residual = std::sqrt(resid.squaredNorm() / static_cast<double>(m));
  return fit;
}

nlohmann::json FidelityReport::to_json() const {
  nlohmann::json j{{"ground_bitstring", ground_bitstring},
                   {"success_probability", success_probability},
                   {"modal_bitstring", modal_bitstring},
                   {"modal_matches_ground", modal_matches_ground},
                   {"confidence", confidence}};
  if (std::isinf(trials_to_confidence)) {
    j["trials_to_confidence"] = "inf";
  } else {
    j["trials_to_confidence"] = trials_to_confidence;
  }
  return j;
}

FidelityReport fidelity_report(const ReadoutDistribution& distribution,
                               const IsingProblem& problem,
                               double confidence) {
  problem.validate();
  if (distribution.n != problem.n) {
    throw DomainError("fidelity_report: distribution is over " +
                      std::to_string(distribution.n) +
                      " qubits, problem has " + std::to_string(problem.n));
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw DomainError("fidelity_report: confidence must lie in (0, 1)");
  }
  const GroundStateResult ground = brute_force_ground(problem);
  if (ground.degeneracy > 1) {
    throw DomainError(
        "fidelity_report: ground state is " +
        std::to_string(ground.degeneracy) +
        "-fold degenerate; a single success bitstring is ill-defined");
  }

  FidelityReport report;
  report.ground_index = ground.configuration.index;
  report.ground_bitstring = ground.configuration.to_string();
  report.success_probability =
      distribution.probs(static_cast<Eigen::Index>(report.ground_index));
  Eigen::Index modal = 0;
  distribution.probs.maxCoeff(&modal);
  report.modal_index = static_cast<uint32_t>(modal);
  report.modal_bitstring =
      SpinConfiguration{report.modal_index, problem.n}.to_string();
  report.modal_matches_ground = report.modal_index == report.ground_index;
  report.confidence = confidence;

  const double p = report.success_probability;
  if (p <= 0.0) {
    report.trials_to_confidence = std::numeric_limits<double>::infinity();
  } else if (p >= 1.0) {
    report.trials_to_confidence = 1.0;
  } else {
    report.trials_to_confidence =
        std::ceil(std::log1p(-confidence) / std::log1p(-p));
  }
  return report;
}

double adiabatic_heuristic_time_us(const AnnealSpec& spec, int n_points) {
  spec.validate();
  if (spec.problem.n > kGapScanCap) {
    throw DomainError("adiabatic_heuristic_time_us: n = " +
                      std::to_string(spec.problem.n) +
                      " exceeds the dense-diagonalization cap " +
                      std::to_string(kGapScanCap));
  }
  if (n_points < 3) {
    throw DomainError("adiabatic_heuristic_time_us: n_points must be >= 3");
  }

  const Eigen::MatrixXcd h_mixer =
      build_h_b(spec.problem.n, spec.b_x_khz).dense_matrix();
  const Eigen::MatrixXcd h_couplings =
      build_h_p_couplings(spec.problem).dense_matrix();
  const Eigen::MatrixXcd h_biases =
      build_h_p_bias(spec.problem).dense_matrix();
  const double t_total = spec.schedule.total_time_us;

  double worst = 0.0;
  for (int i = 0; i < n_points; ++i) {
    const double t = t_total * static_cast<double>(i) / (n_points - 1);
    const double a = spec.schedule.a(t);
    const double b = spec.schedule.b(t);
    const double bb = spec.hold_biases ? 1.0 : b;
    const Eigen::MatrixXcd h =
        a * h_mixer + b * h_couplings + bb * h_biases;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    const double gap = es.eigenvalues()(1) - es.eigenvalues()(0);
    if (!(gap > 0.0)) {
      throw DomainError(
          "adiabatic_heuristic_time_us: spectrum is degenerate at t = " +
          std::to_string(t) + " us; the estimate diverges");
    }
    // dH/ds with s = t / T; a held bias does not ramp, so it drops out.
    const double da_ds = spec.schedule.da_dt(t) * t_total;
    const double db_ds = spec.schedule.db_dt(t) * t_total;
    Eigen::MatrixXcd dh_ds = da_ds * h_mixer + db_ds * h_couplings;
    if (!spec.hold_biases) dh_ds += db_ds * h_biases;
    const Eigen::VectorXcd v = dh_ds * es.eigenvectors().col(0);
    const double element = std::abs(es.eigenvectors().col(1).dot(v));
    worst = std::max(worst, element / (gap * gap));
  }
  return worst / kPhasePerKhzUs;
}

}  // namespace rydsim
