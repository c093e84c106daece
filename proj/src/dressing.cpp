#include "rydsim/dressing.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "rydsim/error.hpp"

namespace rydsim {

void DressingParams::validate() const {
  if (!(omega_mhz > 0.0)) {
    throw SchemaError("dressing: omega_mhz must be > 0");
  }
  if (gamma_line_khz < 0.0) {
    throw SchemaError("dressing: gamma_line_khz must be >= 0");
  }
}

void TailModel::validate() const {
  if (k_exponent != 3 && k_exponent != 6) {
    throw SchemaError("tail model: k exponent must be 3 or 6");
  }
  if (!(reference_distance_um > 0.0)) {
    throw SchemaError("tail model: reference distance must be > 0");
  }
}

double j_closed_form(const DressingParams& p) {
  // Algebraically identical to  1/2 (|Delta| + sqrt(Delta^2 + 2 Omega^2)
  // - 2 sqrt(Delta^2 + Omega^2))  but free of the catastrophic cancellation
  // that form suffers for weak dressing: every factor below is a sum of
  // positives, so the value is accurate to a few ulp even when
  // |J| ~ Omega^4 / (8 |Delta|^3) is many orders below the light shifts.
  const double o2 = p.omega_mhz * p.omega_mhz;
  const double ad = std::abs(p.delta_mhz);
  const double s1 = std::sqrt(ad * ad + o2);
  const double s2 = std::sqrt(ad * ad + 2.0 * o2);
  const double magnitude = o2 * o2 / ((ad + s1) * (ad + s2) * (s1 + s2));
  // Adiabatic branch: blue detuning presses the pair level down relative to
  // twice the single shift (J < 0); red detuning mirrors it.  At Delta = 0
  // the branches touch and the blue-side limit is kept for continuity.
  return p.delta_mhz < 0.0 ? magnitude : -magnitude;
}

double j_perturbative(const DressingParams& p) {
  const double o = p.omega_mhz;
  const double d = p.delta_mhz;
  return -(o * o * o * o) / (8.0 * d * d * d);
}

namespace {

// Ground-branch light shift of the two-level problem [[0, c], [c, -delta]]
// (the small-magnitude root of lambda^2 + delta*lambda - c^2), evaluated in
// extended precision.  The entangling coupling is the difference of two such
// shifts that agree to ~Omega^2/Delta^2 relative, so computing the branches
// with only double-precision guard digits would leave the difference with no
// correct bits in the weak-dressing regime the equivalence tests probe.
long double ground_branch_shift(long double delta, long double c2) {
  const long double s = sqrtl(delta * delta + 4.0L * c2);
  // Large-magnitude (Rydberg-dominant) root first: no cancellation.
  const long double big = -0.5L * (delta + (delta > 0.0L ? s : -s));
  return -c2 / big;
}

// Index (into ascending eigenvalues) of the dressed state adiabatically
// connected to the bare level at energy `bare` among `levels`.  The coupled
// matrix is tridiagonal with nonzero off-diagonals for any Omega > 0, so its
// eigenvalues stay simple as the laser is ramped on: branches never cross,
// and the connection is simply the bare level's rank.  (Maximum overlap is
// NOT equivalent -- at strong mixing the most |gg>-like dressed state can
// belong to a different branch.)  A bare degeneracy involving the requested
// level is a genuine crossing and is reported, never silently broken.
int connected_branch(const std::vector<double>& levels, double bare) {
  int rank = 0;
  for (double e : levels) {
    if (e == bare) {
      throw NumericalError(
          "diagonalize_pair: ambiguous adiabatic connection (bare levels "
          "cross at these parameters)");
    }
    if (e < bare) ++rank;
  }
  return rank;
}

}  // namespace

DressedPairResult diagonalize_pair(const DressingParams& p) {
  p.validate();
  const double omega = p.omega_mhz;
  const double delta = p.delta_mhz;
  if (delta == 0.0) {
    throw NumericalError(
        "diagonalize_pair: ambiguous adiabatic connection (dressed branches "
        "touch at Delta = 0)");
  }
  DressedPairResult r;

  // Single atom: { |g> at 0, |r> at -Delta }, coupling Omega/2.  The 2x2
  // eigenproblem is solved via the stable root formula; the eigenvector of
  // the ground branch is (c, lambda)/norm, so the Rydberg population is
  // lambda^2 / (lambda^2 + c^2).
  const long double o2 = static_cast<long double>(omega) * omega;
  const long double lam_g = ground_branch_shift(delta, 0.25L * o2);
  r.single_light_shift_mhz = static_cast<double>(lam_g);
  r.rydberg_admixture_single =
      static_cast<double>(lam_g * lam_g / (lam_g * lam_g + 0.25L * o2));

  // Pair, symmetric subspace.  Perfect blockade removes |rr>, leaving
  // { |gg> at 0, bright at -Delta } with coupling Omega/sqrt(2).
  const bool blockaded = std::isinf(p.v_dd_mhz);
  if (blockaded) {
    const long double lam_gg = ground_branch_shift(delta, 0.5L * o2);
    r.pair_light_shift_mhz = static_cast<double>(lam_gg);
    r.rydberg_admixture_pair =
        static_cast<double>(lam_gg * lam_gg / (lam_gg * lam_gg + 0.5L * o2));
    r.j_coupling_mhz = static_cast<double>(lam_gg - 2.0L * lam_g);
  } else {
    Eigen::MatrixXd h(3, 3);
    const double c = omega / std::sqrt(2.0);
    h << 0.0, c, 0.0,
         c, -delta, c,
         0.0, c, -2.0 * delta + p.v_dd_mhz;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    if (solver.info() != Eigen::Success) {
      throw NumericalError("diagonalize_pair: eigensolver failed");
    }
    const Eigen::MatrixXd& v = solver.eigenvectors();
    // eigenvalues come back ascending, so the branch index is the rank of
    // bare |gg> (at 0) among the bare levels
    const int gg =
        connected_branch({-delta, -2.0 * delta + p.v_dd_mhz}, 0.0);
    r.pair_light_shift_mhz = solver.eigenvalues()(gg);
    // Excited character: the bright state carries one shared excitation,
    // |rr> carries two.
    r.rydberg_admixture_pair =
        v(1, gg) * v(1, gg) + 2.0 * v(2, gg) * v(2, gg);
    r.j_coupling_mhz = r.pair_light_shift_mhz - 2.0 * r.single_light_shift_mhz;
  }

  r.dressed_gap_mhz = std::sqrt(2.0 * omega * omega + delta * delta);
  r.scattering_rate_khz = r.rydberg_admixture_pair * p.gamma_line_khz;
  if (r.scattering_rate_khz > 0.0) {
    r.kappa = std::abs(r.j_coupling_mhz) * 1e3 / r.scattering_rate_khz;
  } else {
    r.kappa = std::numeric_limits<double>::infinity();
  }
  return r;
}

ScatteringAndMerit scattering_and_merit(const DressingParams& p) {
  const DressedPairResult r = diagonalize_pair(p);
  return ScatteringAndMerit{r.scattering_rate_khz, r.kappa};
}

double j_at_distance(const TailModel& tail, double r_um) {
  tail.validate();
  if (!(r_um > 0.0)) {
    throw DomainError("j_at_distance: r must be > 0");
  }
  if (r_um <= tail.reference_distance_um) {
    return tail.reference_coupling_mhz;
  }
  return tail.reference_coupling_mhz *
         std::pow(tail.reference_distance_um / r_um, tail.k_exponent);
}

namespace {

std::vector<double> parse_axis(const nlohmann::json& spec, const char* key,
                               const std::vector<double>& fallback) {
  if (!spec.contains(key)) {
    if (!fallback.empty()) return fallback;
    throw SchemaError(std::string("dressing sweep: missing grid axis \"") +
                          key + "\"",
                      std::string("/grid/") + key);
  }
  const auto& axis = spec.at(key);
  if (axis.is_array()) {
    auto vals = axis.get<std::vector<double>>();
    if (vals.empty()) {
      throw SchemaError(std::string("dressing sweep: empty grid axis \"") +
                            key + "\"",
                        std::string("/grid/") + key);
    }
    return vals;
  }
  if (axis.is_object()) {
    const double lo = axis.at("min").get<double>();
    const double hi = axis.at("max").get<double>();
    const int count = axis.at("count").get<int>();
    if (count < 1) {
      throw SchemaError("dressing sweep: grid count must be >= 1",
                        std::string("/grid/") + key + "/count");
    }
    std::vector<double> vals(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
      vals[static_cast<size_t>(i)] =
          count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
    }
    return vals;
  }
  throw SchemaError(std::string("dressing sweep: grid axis \"") + key +
                        "\" must be an array or {min,max,count}",
                    std::string("/grid/") + key);
}

}  // namespace

std::vector<SweepRow> dressing_sweep(const nlohmann::json& grid_spec) {
  const auto omegas = parse_axis(grid_spec, "omega_mhz", {});
  const auto deltas = parse_axis(grid_spec, "delta_mhz", {});
  const auto vdds = parse_axis(
      grid_spec, "v_dd_mhz",
      {std::numeric_limits<double>::infinity()});
  const double gamma_line = grid_spec.value("gamma_line_khz", 0.0);
  std::vector<SweepRow> rows;
  rows.reserve(omegas.size() * deltas.size() * vdds.size());
  for (const double o : omegas) {
    for (const double d : deltas) {
      for (const double v : vdds) {
        DressingParams p{o, d, gamma_line, v};
        const DressedPairResult res = diagonalize_pair(p);
        rows.push_back(SweepRow{o, d, v, res.j_coupling_mhz,
                                res.rydberg_admixture_single,
                                res.rydberg_admixture_pair,
                                res.scattering_rate_khz, res.kappa});
      }
    }
  }
  return rows;
}

}  // namespace rydsim
