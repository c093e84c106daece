#include "rydsim/evolve.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <utility>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "rydsim/error.hpp"
#include "rydsim/ising.hpp"
#include "rydsim/units.hpp"

namespace rydsim {
namespace {

constexpr Complex kMinusI{0.0, -1.0};

// ---------------------------------------------------------------------------
// Adaptive Dormand-Prince 5(4) pair with first-same-as-last reuse.

constexpr double kC2 = 1.0 / 5.0;
constexpr double kC3 = 3.0 / 10.0;
constexpr double kC4 = 4.0 / 5.0;
constexpr double kC5 = 8.0 / 9.0;

constexpr double kA21 = 1.0 / 5.0;
constexpr double kA31 = 3.0 / 40.0, kA32 = 9.0 / 40.0;
constexpr double kA41 = 44.0 / 45.0, kA42 = -56.0 / 15.0, kA43 = 32.0 / 9.0;
constexpr double kA51 = 19372.0 / 6561.0, kA52 = -25360.0 / 2187.0,
                 kA53 = 64448.0 / 6561.0, kA54 = -212.0 / 729.0;
constexpr double kA61 = 9017.0 / 3168.0, kA62 = -355.0 / 33.0,
                 kA63 = 46732.0 / 5247.0, kA64 = 49.0 / 176.0,
                 kA65 = -5103.0 / 18656.0;
// 5th-order solution weights (also the last stage's row: FSAL).
constexpr double kB1 = 35.0 / 384.0, kB3 = 500.0 / 1113.0, kB4 = 125.0 / 192.0,
                 kB5 = -2187.0 / 6784.0, kB6 = 11.0 / 84.0;
// Difference between the 5th- and 4th-order weights (error estimate).
constexpr double kE1 = 71.0 / 57600.0, kE3 = -71.0 / 16695.0,
                 kE4 = 71.0 / 1920.0, kE5 = -17253.0 / 339200.0,
                 kE6 = 22.0 / 525.0, kE7 = -1.0 / 40.0;

// Integrates y' = rhs(t, y) in place over [t0, t1].  `rhs` must have
// signature rhs(double t, const VectorXcd& y, VectorXcd& dydt).
template <class Rhs>
IntegratorStats integrate_adaptive(Rhs& rhs, double t0, double t1,
                                   Eigen::VectorXcd& y,
                                   const IntegratorConfig& cfg) {
  IntegratorStats stats;
  const double span = t1 - t0;
  if (!(span > 0.0)) return stats;

  const Eigen::Index dim = y.size();
  Eigen::VectorXcd k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim),
      k7(dim), ytmp(dim), y_new(dim), err_vec(dim);

  const auto scaled_rms = [&](const Eigen::VectorXcd& ya,
                              const Eigen::VectorXcd& yb,
                              const Eigen::VectorXcd& e) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double scale =
          cfg.abs_tol +
          cfg.rel_tol * std::max(std::abs(ya(i)), std::abs(yb(i)));
      const double r = std::abs(e(i)) / scale;
      acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(dim));
  };

  rhs(t0, y, k1);
  ++stats.rhs_evaluations;

  // Initial step from the ratio of solution scale to slope scale.
  double h;
  {
    double d0 = 0.0, d1 = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double scale = cfg.abs_tol + cfg.rel_tol * std::abs(y(i));
      d0 += std::norm(y(i)) / (scale * scale);
      d1 += std::norm(k1(i)) / (scale * scale);
    }
    h = (d1 > 1e-300) ? 0.01 * std::sqrt(d0 / d1) : span / 100.0;
    if (!(h > 0.0) || !std::isfinite(h)) h = span / 100.0;
    h = std::min({h, span, cfg.max_step_us});
  }

  double t = t0;
  int consecutive_rejects = 0;
  const double h_floor =
      16.0 * std::numeric_limits<double>::epsilon() * std::abs(span);
  while (t < t1) {
    if (h > t1 - t) h = t1 - t;
    if (h < h_floor) {
      throw NumericalError(
          "integrator step size underflow at t = " + std::to_string(t) +
          " us; requested tolerances appear unattainable");
    }

    ytmp = y + h * (kA21 * k1);
    rhs(t + kC2 * h, ytmp, k2);
    ytmp = y + h * (kA31 * k1 + kA32 * k2);
    rhs(t + kC3 * h, ytmp, k3);
    ytmp = y + h * (kA41 * k1 + kA42 * k2 + kA43 * k3);
    rhs(t + kC4 * h, ytmp, k4);
    ytmp = y + h * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4);
    rhs(t + kC5 * h, ytmp, k5);
    ytmp = y + h * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 + kA65 * k5);
    rhs(t + h, ytmp, k6);
    y_new = y + h * (kB1 * k1 + kB3 * k3 + kB4 * k4 + kB5 * k5 + kB6 * k6);
    rhs(t + h, y_new, k7);
    stats.rhs_evaluations += 6;

    err_vec = h * (kE1 * k1 + kE3 * k3 + kE4 * k4 + kE5 * k5 + kE6 * k6 +
                   kE7 * k7);
    const double err = scaled_rms(y, y_new, err_vec);

    if (err <= 1.0) {
      t += h;
      y.swap(y_new);
      k1.swap(k7);  // FSAL: last stage is the next step's first stage
      ++stats.accepted_steps;
      consecutive_rejects = 0;
      const double factor =
          (err > 1e-300) ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0)
                         : 5.0;
      h = std::min(h * factor, cfg.max_step_us);
    } else {
      ++stats.rejected_steps;
      if (++consecutive_rejects > 64) {
        throw NumericalError(
            "integrator rejected 64 consecutive steps near t = " +
            std::to_string(t) + " us; requested tolerances appear "
            "unattainable");
      }
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
    }
  }
  return stats;
}

// A tolerance-tau adaptive integrator legitimately accumulates ~steps*tau of
// norm drift, so "unitarity lost" means exceeding that scale by a wide
// margin: the tripwire catches wrong physics (a non-Hermitian right-hand
// side, a blow-up), not honest truncation error.  Callers enforce their own
// drift budgets from stats.conservation_drift.
double unitarity_tripwire(const IntegratorStats& stats,
                          const IntegratorConfig& cfg) {
  const auto steps =
      std::max<uint64_t>(stats.accepted_steps + stats.rejected_steps, 100);
  return 100.0 * static_cast<double>(steps) * cfg.rel_tol;
}

// ---------------------------------------------------------------------------
// Schroedinger right-hand side for H(t) = A(t) H_B + B(t) H_cpl [+ bias].

class ScheduleRhs {
 public:
  ScheduleRhs(const SparseOperator& mixer, const SparseOperator& couplings,
              const SparseOperator& biases, const Schedule& schedule,
              bool hold_biases)
      : mixer_(mixer),
        couplings_(couplings),
        biases_(biases),
        schedule_(schedule),
        hold_(hold_biases) {
    const auto dim = static_cast<Eigen::Index>(mixer.dimension());
    mix_buf_.resize(dim);
    cpl_buf_.resize(dim);
    bias_buf_.resize(dim);
  }

  void operator()(double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& dydt) {
    mixer_.apply(y, &mix_buf_);
    couplings_.apply(y, &cpl_buf_);
    biases_.apply(y, &bias_buf_);
    const double a = schedule_.a(t);
    const double b = schedule_.b(t);
    const double bb = hold_ ? 1.0 : b;
    dydt = (kMinusI * kPhasePerKhzUs) *
           (a * mix_buf_ + b * cpl_buf_ + bb * bias_buf_);
  }

 private:
  const SparseOperator& mixer_;
  const SparseOperator& couplings_;
  const SparseOperator& biases_;
  const Schedule& schedule_;
  bool hold_;
  Eigen::VectorXcd mix_buf_, cpl_buf_, bias_buf_;
};

// Scattering rate in events per microsecond per still-coherent atom.
double scatter_rate_per_us(const NoiseModel& noise, const Schedule& schedule,
                           double t_us) {
  const double envelope =
      noise.time_profile == NoiseModel::Profile::ScheduleEnvelope
          ? schedule.b(t_us)
          : 1.0;
  return kRatePerKhzUs * noise.gamma_max_khz * envelope;
}

// Ising problem restricted to `active` (ascending qubit list); terms that
// touch a dropped qubit disappear.  The offset is irrelevant for dynamics.
IsingProblem restrict_problem(const IsingProblem& p,
                              const std::vector<int>& active) {
  IsingProblem sub;
  sub.n = static_cast<int>(active.size());
  sub.h_tilde_khz.resize(sub.n);
  sub.j_tilde_khz = Eigen::MatrixXd::Zero(sub.n, sub.n);
  for (int a = 0; a < sub.n; ++a) {
    sub.h_tilde_khz(a) = p.h_tilde_khz(active[a]);
    for (int b = 0; b < sub.n; ++b) {
      if (a != b) sub.j_tilde_khz(a, b) = p.j_tilde_khz(active[a], active[b]);
    }
  }
  return sub;
}

// Inserts `bit` at position `pos` of an index (lower positions preserved).
uint32_t insert_bit(uint32_t index, int pos, uint32_t bit) {
  const uint32_t low = index & ((1u << pos) - 1u);
  return ((index >> pos) << (pos + 1)) | (bit << pos) | low;
}

// ---------------------------------------------------------------------------
// Sector-resolved master equation plumbing.

struct FeedTable {
  int parent_sector = -1;
  // child linear index (col-major), parent index for traced bit 0 / bit 1
  std::vector<std::array<uint32_t, 3>> entries;
};

struct SectorWorkspace {
  uint32_t mask = 0;
  std::vector<int> active;
  int dim = 1;
  uint64_t offset = 0;  // into the flat packed state, in complex entries
  Eigen::MatrixXcd h_mixer, h_couplings, h_biases;
  std::vector<FeedTable> feeds;
  Eigen::MatrixXcd h_total, comm;  // scratch
};

std::vector<SectorWorkspace> build_sectors(const AnnealSpec& spec) {
  const int n = spec.problem.n;
  const uint32_t n_masks = 1u << n;
  std::vector<uint32_t> order(n_masks);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [](uint32_t a, uint32_t b) {
    const int pa = std::popcount(a), pb = std::popcount(b);
    return pa != pb ? pa < pb : a < b;
  });

  std::vector<int> sector_of_mask(n_masks, -1);
  std::vector<SectorWorkspace> sectors(n_masks);
  uint64_t offset = 0;
  for (uint32_t s = 0; s < n_masks; ++s) {
    SectorWorkspace& w = sectors[s];
    w.mask = order[s];
    sector_of_mask[w.mask] = static_cast<int>(s);
    for (int q = 0; q < n; ++q) {
      if (((w.mask >> q) & 1u) == 0u) w.active.push_back(q);
    }
    const int m = static_cast<int>(w.active.size());
    w.dim = 1 << m;
    w.offset = offset;
    offset += static_cast<uint64_t>(w.dim) * w.dim;
    if (m == 0) {
      w.h_mixer = w.h_couplings = w.h_biases = Eigen::MatrixXcd::Zero(1, 1);
    } else {
      const IsingProblem sub = restrict_problem(spec.problem, w.active);
      w.h_mixer = build_h_b(m, spec.b_x_khz, SparseOperator::Representation::Dense)
                      .dense_matrix();
      w.h_couplings =
          build_h_p_couplings(sub, SparseOperator::Representation::Dense)
              .dense_matrix();
      w.h_biases = build_h_p_bias(sub, SparseOperator::Representation::Dense)
                       .dense_matrix();
    }
    w.h_total.resize(w.dim, w.dim);
    w.comm.resize(w.dim, w.dim);
  }

  // Refill feed tables: sector S receives population from S \ {q} for each
  // scattered qubit q, via a partial trace over q.
  for (auto& w : sectors) {
    for (int q = 0; q < n; ++q) {
      if (((w.mask >> q) & 1u) == 0u) continue;
      FeedTable table;
      const uint32_t parent_mask = w.mask & ~(1u << q);
      table.parent_sector = sector_of_mask[parent_mask];
      const SectorWorkspace& parent = sectors[table.parent_sector];
      // q's position within the parent's active list
      const int pos = std::popcount(~parent_mask & ((1u << q) - 1u));
      const uint32_t pdim = static_cast<uint32_t>(parent.dim);
      table.entries.reserve(static_cast<size_t>(w.dim) * w.dim);
      for (uint32_t c = 0; c < static_cast<uint32_t>(w.dim); ++c) {
        for (uint32_t r = 0; r < static_cast<uint32_t>(w.dim); ++r) {
          const uint32_t child_lin = r + c * static_cast<uint32_t>(w.dim);
          const uint32_t p0 =
              insert_bit(r, pos, 0) + insert_bit(c, pos, 0) * pdim;
          const uint32_t p1 =
              insert_bit(r, pos, 1) + insert_bit(c, pos, 1) * pdim;
          table.entries.push_back({child_lin, p0, p1});
        }
      }
      w.feeds.push_back(std::move(table));
    }
  }
  return sectors;
}

class SectorRhs {
 public:
  SectorRhs(std::vector<SectorWorkspace>* sectors, const Schedule* schedule,
            bool hold_biases, const NoiseModel* noise)
      : sectors_(sectors),
        schedule_(schedule),
        hold_(hold_biases),
        noise_(noise) {}

  void operator()(double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& d) {
    const double a = schedule_->a(t);
    const double b = schedule_->b(t);
    const double bb = hold_ ? 1.0 : b;
    const double g = scatter_rate_per_us(*noise_, *schedule_, t);
    d.setZero();
    for (auto& w : *sectors_) {
      const int m = static_cast<int>(w.active.size());
      Eigen::Map<const Eigen::MatrixXcd> rho(y.data() + w.offset, w.dim, w.dim);
      Eigen::Map<Eigen::MatrixXcd> drho(d.data() + w.offset, w.dim, w.dim);
      if (m > 0) {
        w.h_total = a * w.h_mixer + b * w.h_couplings + bb * w.h_biases;
        w.comm.noalias() = w.h_total * rho;
        w.comm.noalias() -= rho * w.h_total;
        drho = (kMinusI * kPhasePerKhzUs) * w.comm - (m * g) * rho;
      }
      for (const auto& feed : w.feeds) {
        const SectorWorkspace& parent = (*sectors_)[feed.parent_sector];
        const Complex* py = y.data() + parent.offset;
        Complex* dy = d.data() + w.offset;
        for (const auto& e : feed.entries) {
          dy[e[0]] += g * (py[e[1]] + py[e[2]]);
        }
      }
    }
  }

 private:
  std::vector<SectorWorkspace>* sectors_;
  const Schedule* schedule_;
  bool hold_;
  const NoiseModel* noise_;
};

// ---------------------------------------------------------------------------
// State-independent jump-time sampling: cumulative hazard inversion.

struct HazardSegment {
  double t0 = 0.0, length = 0.0;
  double g0 = 0.0, slope = 0.0;  // rate g(t) = g0 + slope * (t - t0)
  double cum0 = 0.0;             // hazard accumulated before this segment
};

struct HazardTable {
  std::vector<HazardSegment> segments;
  double total = 0.0;

  // First-passage time for accumulated hazard `target`; +inf if the total
  // hazard over [0, T] never reaches it.
  double invert(double target) const {
    if (!(target < total)) return std::numeric_limits<double>::infinity();
    for (const auto& seg : segments) {
      const double seg_mass =
          (seg.g0 + 0.5 * seg.slope * seg.length) * seg.length;
      if (target > seg.cum0 + seg_mass) continue;
      const double r = target - seg.cum0;
      if (r <= 0.0) return seg.t0;
      const double a = 0.5 * seg.slope;
      const double b = seg.g0;
      double dt;
      if (std::abs(a) * seg.length < 1e-14 * std::max(b, 1e-300)) {
        dt = r / b;
      } else {
        // a dt^2 + b dt = r; the discriminant equals (b + 2 a L)^2 >= 0
        // at r = seg_mass, so it cannot go negative for r inside the
        // segment.  The 2r / (b + sqrt) form is stable for either sign of a.
        const double disc = std::max(b * b + 4.0 * a * r, 0.0);
        dt = 2.0 * r / (b + std::sqrt(disc));
      }
      return seg.t0 + std::min(dt, seg.length);
    }
    return std::numeric_limits<double>::infinity();
  }
};

HazardTable build_hazard(const NoiseModel& noise, const Schedule& schedule) {
  HazardTable table;
  const double c = kRatePerKhzUs * noise.gamma_max_khz;
  if (c <= 0.0) return table;  // total = 0: never jumps
  const double t_total = schedule.total_time_us;

  std::vector<std::pair<double, double>> nodes;  // (t, rate)
  if (noise.time_profile == NoiseModel::Profile::Constant) {
    nodes = {{0.0, c}, {t_total, c}};
  } else if (schedule.linear) {
    nodes = {{0.0, 0.0}, {t_total, c}};
  } else {
    for (const auto& knot : schedule.knots) {
      nodes.emplace_back(knot[0], c * knot[2]);
    }
  }
  double cum = 0.0;
  for (size_t i = 0; i + 1 < nodes.size(); ++i) {
    HazardSegment seg;
    seg.t0 = nodes[i].first;
    seg.length = nodes[i + 1].first - nodes[i].first;
    seg.g0 = nodes[i].second;
    seg.slope =
        seg.length > 0.0 ? (nodes[i + 1].second - seg.g0) / seg.length : 0.0;
    seg.cum0 = cum;
    cum += (seg.g0 + 0.5 * seg.slope * seg.length) * seg.length;
    if (seg.length > 0.0) table.segments.push_back(seg);
  }
  table.total = cum;
  return table;
}

struct JumpEvent {
  double t_us = 0.0;
  int qubit = -1;
};

}  // namespace

// ---------------------------------------------------------------------------

void NoiseModel::validate() const {
  if (!(gamma_max_khz >= 0.0) || !std::isfinite(gamma_max_khz)) {
    throw SchemaError("noise: gamma_max_khz must be finite and >= 0",
                      "/noise/gamma_max_khz");
  }
  if (!(readout_split >= 0.0 && readout_split <= 1.0)) {
    throw SchemaError("noise: readout_split must lie in [0, 1]",
                      "/noise/readout_split");
  }
}

nlohmann::json NoiseModel::to_json() const {
  return nlohmann::json{
      {"gamma_max_khz", gamma_max_khz},
      {"time_profile", time_profile == Profile::ScheduleEnvelope
                           ? "schedule-envelope"
                           : "constant"},
      {"readout_split", readout_split}};
}

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !std::isfinite(rel_tol)) {
    throw SchemaError("integrator: rel_tol must be finite and > 0",
                      "/integrator/rel_tol");
  }
  if (!(abs_tol >= 0.0) || !std::isfinite(abs_tol)) {
    throw SchemaError("integrator: abs_tol must be finite and >= 0",
                      "/integrator/abs_tol");
  }
  if (!(max_step_us > 0.0)) {
    throw SchemaError("integrator: max_step_us must be > 0",
                      "/integrator/max_step_us");
  }
}

nlohmann::json IntegratorStats::to_json() const {
  return nlohmann::json{{"accepted_steps", accepted_steps},
                        {"rejected_steps", rejected_steps},
                        {"rhs_evaluations", rhs_evaluations},
                        {"conservation_drift", conservation_drift}};
}

double OpenResult::leaked_mass() const {
  for (const auto& s : sectors) {
    if (s.scattered_mask == 0) return 1.0 - s.rho.trace().real();
  }
  throw DomainError("OpenResult: no-scatter sector missing");
}

double OpenResult::total_trace() const {
  double acc = 0.0;
  for (const auto& s : sectors) acc += s.rho.trace().real();
  return acc;
}

double OpenResult::qubit_leak(int qubit) const {
  if (qubit < 0 || qubit >= n) {
    throw DomainError("OpenResult::qubit_leak: qubit index out of range");
  }
  double acc = 0.0;
  for (const auto& s : sectors) {
    if ((s.scattered_mask >> qubit) & 1u) acc += s.rho.trace().real();
  }
  return acc;
}

nlohmann::json ReadoutDistribution::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (Eigen::Index k = 0; k < probs.size(); ++k) {
    j[SpinConfiguration{static_cast<uint32_t>(k), n}.to_string()] = probs(k);
  }
  return j;
}

ReadoutDistribution TrajectoryHistogram::distribution() const {
  if (n_traj == 0) {
    throw DomainError("TrajectoryHistogram: empty histogram");
  }
  ReadoutDistribution out;
  out.n = n;
  out.probs.resize(static_cast<Eigen::Index>(counts.size()));
  for (size_t k = 0; k < counts.size(); ++k) {
    out.probs(static_cast<Eigen::Index>(k)) =
        static_cast<double>(counts[k]) / static_cast<double>(n_traj);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace detail {

SplitMix64::SplitMix64(uint64_t seed, uint64_t stream)
    : state_(seed + (stream + 1) * 0x9E3779B97F4A7C15ull) {
  // Burn two outputs so that low-entropy (seed, stream) pairs decorrelate.
  next();
  next();
}

uint64_t SplitMix64::next() {
  state_ += 0x9E3779B97F4A7C15ull;
  uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double SplitMix64::uniform01() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

ClosedResult integrate_schedule(const SparseOperator& h_b,
                                const SparseOperator& h_couplings,
                                const SparseOperator& h_biases,
                                const Schedule& schedule, bool hold_biases,
                                StateVector psi0, const IntegratorConfig& cfg) {
  schedule.validate();
  cfg.validate();
  if (h_b.dimension() != static_cast<uint64_t>(psi0.size()) ||
      h_couplings.dimension() != h_b.dimension() ||
      h_biases.dimension() != h_b.dimension()) {
    throw DomainError("integrate_schedule: operator/state dimension mismatch");
  }
  ClosedResult out;
  out.psi = std::move(psi0);
  ScheduleRhs rhs(h_b, h_couplings, h_biases, schedule, hold_biases);
  out.stats =
      integrate_adaptive(rhs, 0.0, schedule.total_time_us, out.psi, cfg);
  out.stats.conservation_drift = std::abs(out.psi.norm() - 1.0);
  if (out.stats.conservation_drift > unitarity_tripwire(out.stats, cfg)) {
    throw NumericalError(
        "closed evolution lost unitarity: |norm - 1| = " +
        std::to_string(out.stats.conservation_drift) +
        " is far beyond the accumulated-tolerance scale");
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------

ClosedResult evolve_closed(const AnnealSpec& spec, const IntegratorConfig& cfg) {
  spec.validate();
  cfg.validate();
  const int n = spec.problem.n;
  if (n > kStateVectorCap) {
    throw DomainError("evolve_closed: n = " + std::to_string(n) +
                      " exceeds the state-vector cap " +
                      std::to_string(kStateVectorCap));
  }
  const SparseOperator mixer = build_h_b(n, spec.b_x_khz);
  const SparseOperator couplings = build_h_p_couplings(spec.problem);
  const SparseOperator biases = build_h_p_bias(spec.problem);
  const auto dim = static_cast<Eigen::Index>(1) << n;
  StateVector psi0 =
      StateVector::Constant(dim, Complex(1.0 / std::sqrt(double(dim)), 0.0));
  return detail::integrate_schedule(mixer, couplings, biases, spec.schedule,
                                    spec.hold_biases, std::move(psi0), cfg);
}

OpenResult evolve_open(const AnnealSpec& spec, const NoiseModel& noise,
                       const IntegratorConfig& cfg) {
  spec.validate();
  noise.validate();
  cfg.validate();
  const int n = spec.problem.n;
  if (n > kMasterEquationCap) {
    throw DomainError(
        "evolve_open: n = " + std::to_string(n) +
        " exceeds the master-equation cap " +
        std::to_string(kMasterEquationCap) +
        " (sector storage grows as 5^n); use evolve_trajectories instead");
  }

  std::vector<SectorWorkspace> sectors = build_sectors(spec);
  const SectorWorkspace& last = sectors.back();
  const uint64_t total_len =
      last.offset + static_cast<uint64_t>(last.dim) * last.dim;
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(
      static_cast<Eigen::Index>(total_len));

  // Sector order starts with the no-scatter sector; its state is |+><+|.
  const uint64_t dim = 1ull << n;
  y.segment(0, static_cast<Eigen::Index>(dim * dim))
      .setConstant(Complex(1.0 / static_cast<double>(dim), 0.0));

  SectorRhs rhs(&sectors, &spec.schedule, spec.hold_biases, &noise);
  OpenResult out;
  out.n = n;
  out.stats =
      integrate_adaptive(rhs, 0.0, spec.schedule.total_time_us, y, cfg);

  double trace = 0.0;
  out.sectors.reserve(sectors.size());
  for (const auto& w : sectors) {
    Sector s;
    s.scattered_mask = w.mask;
    s.active = w.active;
    s.rho = Eigen::Map<const Eigen::MatrixXcd>(y.data() + w.offset, w.dim,
                                               w.dim);
    trace += s.rho.trace().real();
    out.sectors.push_back(std::move(s));
  }
  out.stats.conservation_drift = std::abs(trace - 1.0);
  // Unlike the closed-system norm, the total trace is conserved exactly by
  // every Runge-Kutta stage (the inter-sector flows cancel identically in
  // the linear right-hand side), so any drift here is pure roundoff and
  // 10*rel_tol is a generous bound rather than a truncation-error scale.
  if (out.stats.conservation_drift > 10.0 * cfg.rel_tol) {
    throw NumericalError(
        "open evolution lost trace normalization: |trace - 1| = " +
        std::to_string(out.stats.conservation_drift) +
        " exceeds 10*rel_tol");
  }

  const double positivity_tol = std::max(1e-8, 10.0 * cfg.rel_tol);
  for (const auto& s : out.sectors) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        s.rho, Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < -positivity_tol) {
      std::ostringstream msg;
      msg << "open evolution lost positivity in sector mask "
          << s.scattered_mask << ": min eigenvalue " << min_eig;
      throw NumericalError(msg.str());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

TrajectoryHistogram evolve_trajectories(const AnnealSpec& spec,
                                        const NoiseModel& noise,
                                        const IntegratorConfig& cfg,
                                        uint64_t n_traj, uint64_t seed,
                                        int threads) {
  spec.validate();
  noise.validate();
  cfg.validate();
  const int n = spec.problem.n;
  if (n > kStateVectorCap) {
    throw DomainError("evolve_trajectories: n = " + std::to_string(n) +
                      " exceeds the state-vector cap " +
                      std::to_string(kStateVectorCap));
  }
  if (n_traj == 0) {
    throw DomainError("evolve_trajectories: n_traj must be >= 1");
  }

  const double t_total = spec.schedule.total_time_us;
  const HazardTable hazard = build_hazard(noise, spec.schedule);

  // Every jump-free trajectory sees exactly the closed evolution; compute it
  // once and share the final state read-only across workers.
  const ClosedResult closed = evolve_closed(spec, cfg);

  const uint32_t dim = 1u << n;
  TrajectoryHistogram hist;
  hist.n = n;
  hist.n_traj = n_traj;
  hist.counts.assign(dim, 0);

  const auto run_one = [&](uint64_t index, std::vector<uint64_t>& counts) {
    detail::SplitMix64 rng(seed, index);

    // Draw order is fixed so the outcome depends only on (seed, index):
    // first one hazard uniform per qubit (qubit order), then per jump in
    // time order a measurement uniform and a readout-split uniform, then
    // one final sampling uniform if any atom is still coherent.
    std::vector<JumpEvent> events;
    for (int q = 0; q < n; ++q) {
      const double u = rng.uniform01();
      const double t_jump = hazard.invert(-std::log1p(-u));
      if (t_jump < t_total) events.push_back({t_jump, q});
    }
    std::sort(events.begin(), events.end(),
              [](const JumpEvent& a, const JumpEvent& b) {
                return a.t_us != b.t_us ? a.t_us < b.t_us : a.qubit < b.qubit;
              });

    std::vector<int> active(n);
    std::iota(active.begin(), active.end(), 0);
    uint32_t fixed_bits = 0;  // readout bits of scattered qubits
    Eigen::VectorXcd psi;

    if (events.empty()) {
      psi = closed.psi;
    } else {
      psi = Eigen::VectorXcd::Constant(
          dim, Complex(1.0 / std::sqrt(static_cast<double>(dim)), 0.0));
      SparseOperator mixer = build_h_b(n, spec.b_x_khz);
      SparseOperator couplings = build_h_p_couplings(spec.problem);
      SparseOperator biases = build_h_p_bias(spec.problem);
      double t_prev = 0.0;

      const auto advance = [&](double t_to) {
        if (t_to <= t_prev || active.empty()) return;
        ScheduleRhs rhs(mixer, couplings, biases, spec.schedule,
                        spec.hold_biases);
        const IntegratorStats seg_stats =
            integrate_adaptive(rhs, t_prev, t_to, psi, cfg);
        const double drift = std::abs(psi.norm() - 1.0);
        if (drift > unitarity_tripwire(seg_stats, cfg)) {
          throw NumericalError(
              "trajectory segment lost unitarity: |norm - 1| = " +
              std::to_string(drift));
        }
      };

      for (const JumpEvent& event : events) {
        advance(event.t_us);
        // Born measurement of the scattering atom's z-bit.
        const auto it =
            std::find(active.begin(), active.end(), event.qubit);
        const int pos = static_cast<int>(it - active.begin());
        const uint32_t sub_dim = 1u << active.size();
        double p1 = 0.0, norm2 = 0.0;
        for (uint32_t k = 0; k < sub_dim; ++k) {
          const double w = std::norm(psi(k));
          norm2 += w;
          if ((k >> pos) & 1u) p1 += w;
        }
        const double u_meas = rng.uniform01();
        const uint32_t outcome = (u_meas * norm2 < p1) ? 1u : 0u;
        Eigen::VectorXcd next(sub_dim / 2);
        for (uint32_t k = 0; k < sub_dim / 2; ++k) {
          next(k) = psi(insert_bit(k, pos, outcome));
        }
        next /= next.norm();
        psi = std::move(next);

        // The scattered atom's readout bit comes from the split model.
        const double u_split = rng.uniform01();
        if (u_split < noise.readout_split) fixed_bits |= 1u << event.qubit;

        active.erase(it);
        if (!active.empty()) {
          const IsingProblem sub = restrict_problem(spec.problem, active);
          mixer = build_h_b(static_cast<int>(active.size()), spec.b_x_khz);
          couplings = build_h_p_couplings(sub);
          biases = build_h_p_bias(sub);
        }
        t_prev = event.t_us;
      }
      advance(t_total);
    }

    uint32_t result = fixed_bits;
    if (!active.empty()) {
      const uint32_t sub_dim = 1u << active.size();
      double norm2 = 0.0;
      for (uint32_t k = 0; k < sub_dim; ++k) norm2 += std::norm(psi(k));
      const double target = rng.uniform01() * norm2;
      double cum = 0.0;
      uint32_t pick = sub_dim - 1;
      for (uint32_t k = 0; k < sub_dim; ++k) {
        cum += std::norm(psi(k));
        if (target < cum) {
          pick = k;
          break;
        }
      }
      for (size_t j = 0; j < active.size(); ++j) {
        if ((pick >> j) & 1u) result |= 1u << active[j];
      }
    }
    ++counts[result];
  };

  int n_workers = std::max(threads, 1);
  n_workers = static_cast<int>(
      std::min<uint64_t>(static_cast<uint64_t>(n_workers), n_traj));
  if (n_workers == 1) {
    for (uint64_t i = 0; i < n_traj; ++i) run_one(i, hist.counts);
    return hist;
  }

  // Integer counts merge associatively, so the histogram is identical for
  // any worker count.
  std::vector<std::vector<uint64_t>> partial(
      n_workers, std::vector<uint64_t>(dim, 0));
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  const uint64_t chunk = (n_traj + n_workers - 1) / n_workers;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (int w = 0; w < n_workers; ++w) {
    const uint64_t lo = chunk * static_cast<uint64_t>(w);
    const uint64_t hi = std::min(n_traj, lo + chunk);
    pool.emplace_back([&, w, lo, hi]() {
      try {
        for (uint64_t i = lo; i < hi; ++i) run_one(i, partial[w]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
  for (const auto& p : partial) {
    for (uint32_t k = 0; k < dim; ++k) hist.counts[k] += p[k];
  }
  return hist;
}

// ---------------------------------------------------------------------------

ReadoutDistribution readout(const ClosedResult& state, int n_qubits) {
  const auto dim = static_cast<Eigen::Index>(1) << n_qubits;
  if (state.psi.size() != dim) {
    throw DomainError("readout: state dimension does not match qubit count");
  }
  ReadoutDistribution out;
  out.n = n_qubits;
  out.probs.resize(dim);
  for (Eigen::Index k = 0; k < dim; ++k) out.probs(k) = std::norm(state.psi(k));
  return out;
}

ReadoutDistribution readout(const OpenResult& state, double readout_split) {
  if (!(readout_split >= 0.0 && readout_split <= 1.0)) {
    throw SchemaError("readout: readout_split must lie in [0, 1]",
                      "/noise/readout_split");
  }
  ReadoutDistribution out;
  out.n = state.n;
  out.probs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(1) << state.n);
  for (const auto& sector : state.sectors) {
    std::vector<int> scattered;
    for (int q = 0; q < state.n; ++q) {
      if ((sector.scattered_mask >> q) & 1u) scattered.push_back(q);
    }
    const uint32_t active_dim = 1u << sector.active.size();
    const uint32_t split_dim = 1u << scattered.size();
    for (uint32_t k = 0; k < active_dim; ++k) {
      const double mass = sector.rho(k, k).real();
      if (mass == 0.0) continue;
      uint32_t base = 0;
      for (size_t j = 0; j < sector.active.size(); ++j) {
        if ((k >> j) & 1u) base |= 1u << sector.active[j];
      }
      for (uint32_t assign = 0; assign < split_dim; ++assign) {
        double weight = mass;
        uint32_t index = base;
        for (size_t j = 0; j < scattered.size(); ++j) {
          if ((assign >> j) & 1u) {
            weight *= readout_split;
            index |= 1u << scattered[j];
          } else {
            weight *= 1.0 - readout_split;
          }
        }
        out.probs(static_cast<Eigen::Index>(index)) += weight;
      }
    }
  }
  return out;
}

ReadoutDistribution readout(const TrajectoryHistogram& hist) {
  return hist.distribution();
}

}  // namespace rydsim
