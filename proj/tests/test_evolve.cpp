#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "rydsim/error.hpp"
#include "rydsim/evolve.hpp"
#include "rydsim/units.hpp"

using namespace rydsim;

namespace {

AnnealSpec chain_spec(int n, double t_total_us) {
  AnnealSpec spec;
  spec.problem = benchmark_chain(n, 470.0, 118.5);
  spec.b_x_khz = 470.0;
  spec.schedule = Schedule::make_linear(t_total_us);
  return spec;
}

NoiseModel envelope_noise(double gamma_khz) {
  NoiseModel noise;
  noise.gamma_max_khz = gamma_khz;
  noise.time_profile = NoiseModel::Profile::ScheduleEnvelope;
  return noise;
}

// Looser than the library default: the statistical and closed-form checks
// below compare quantities far above the integration error at this
// tolerance, and the suite stays fast.
IntegratorConfig fast() {
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-9;
  cfg.abs_tol = 1e-12;
  return cfg;
}

// Endpoint-oracle comparisons at 2e-7 need the accumulated error (about
// 0.01 * steps * rel_tol) well under the comparison width.
IntegratorConfig tight() {
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-11;
  cfg.abs_tol = 1e-14;
  return cfg;
}

// Monte Carlo comparisons sit on sampling-error bands of order 1e-2;
// integrating the jumpy trajectories tighter than this buys nothing.
IntegratorConfig sampling() {
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-6;
  cfg.abs_tol = 1e-9;
  return cfg;
}

}  // namespace

TEST_CASE("closed benchmark endpoint matches the frozen reference") {
  const AnnealSpec spec = chain_spec(2, 35.0);
  const ClosedResult r = evolve_closed(spec, tight());
  const ReadoutDistribution dist = readout(r, 2);
  CHECK(dist.success_probability(oracle::kChain2Ground) ==
        doctest::Approx(oracle::kClosed2T35).epsilon(2e-7));
  CHECK(std::abs(dist.probs.sum() - 1.0) < 1e-8);
  CHECK(r.stats.conservation_drift <= 1e-6);
  CHECK(r.stats.accepted_steps > 0);
  CHECK(r.stats.rhs_evaluations >=
        6 * (r.stats.accepted_steps + r.stats.rejected_steps));
}

TEST_CASE("adiabatic limit: infidelity falls with anneal time") {
  const double t35 = 1.0 - readout(evolve_closed(chain_spec(2, 35.0), tight()), 2)
                               .success_probability(oracle::kChain2Ground);
  const double t70 = 1.0 - readout(evolve_closed(chain_spec(2, 70.0), tight()), 2)
                               .success_probability(oracle::kChain2Ground);
  CHECK(t35 == doctest::Approx(oracle::kInfid2T35).epsilon(1e-3));
  CHECK(t70 == doctest::Approx(oracle::kInfid2T70).epsilon(1e-3));
  CHECK(t70 < t35);
}

TEST_CASE("halving the tolerance moves the endpoint by the accumulated error") {
  // rel_tol is a per-step tolerance: endpoint populations converge linearly
  // in it, at the accumulated scale reported as conservation drift (about
  // 0.01 * steps * rel_tol), not at rel_tol itself.
  const AnnealSpec spec = chain_spec(2, 35.0);
  IntegratorConfig halved = fast();
  halved.rel_tol /= 2.0;
  halved.abs_tol /= 2.0;
  const ClosedResult a = evolve_closed(spec, fast());
  const ClosedResult b = evolve_closed(spec, halved);
  const double p_ref = readout(evolve_closed(spec, tight()), 2)
                           .success_probability(oracle::kChain2Ground);
  const double p_a = readout(a, 2).success_probability(oracle::kChain2Ground);
  const double p_b = readout(b, 2).success_probability(oracle::kChain2Ground);
  CHECK(std::abs(p_a - p_b) <=
        5.0 * (a.stats.conservation_drift + b.stats.conservation_drift));
  CHECK(std::abs(p_b - p_ref) < std::abs(p_a - p_ref));  // halving helps
  CHECK(std::abs(p_a - p_ref) < 1e-6);
}

TEST_CASE("commuting ramp reproduces the analytic phase exactly") {
  // With H_B and the "problem" both proportional to sum sigma_x the
  // Hamiltonian commutes with itself at all times; |+>^n only accumulates
  // phase and the overlap with |+>^n stays exactly 1.
  const int n = 2;
  std::vector<SparseOperator::Triplet> trips;
  for (int q = 0; q < n; ++q) {
    for (uint64_t k = 0; k < (1ull << n); ++k) {
      trips.push_back({k, k ^ (1ull << q), Complex(-470.0, 0.0)});
    }
  }
  const SparseOperator hx = SparseOperator::from_triplets(n, trips);
  const SparseOperator zero =
      SparseOperator::from_triplets(n, {});  // no biases
  const Schedule sched = Schedule::make_linear(10.0);
  StateVector psi0 =
      StateVector::Constant(4, Complex(0.5, 0.0));
  const ClosedResult r = detail::integrate_schedule(hx, hx, zero, sched,
                                                    false, psi0, fast());
  // A(t) + B(t) = 1, so H(t) = hx throughout: phase exp(+i n 470 kPhase T)
  const double phase = kPhasePerKhzUs * n * 470.0 * 10.0;
  const Complex expect = std::exp(Complex(0.0, phase));
  StateVector target = StateVector::Constant(4, 0.5 * expect);
  CHECK((r.psi - target).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("open-system benchmark endpoints match the frozen references") {
  const NoiseModel noise = envelope_noise(0.1);

  SUBCASE("n=2, T=35") {
    const OpenResult r = evolve_open(chain_spec(2, 35.0), noise, fast());
    const ReadoutDistribution dist = readout(r, noise.readout_split);
    CHECK(dist.success_probability(oracle::kChain2Ground) ==
          doctest::Approx(oracle::kOpen2T35).epsilon(2e-7));
    CHECK(r.leaked_mass() ==
          doctest::Approx(oracle::kLeak2T35).epsilon(1e-6));
    // the no-jump survival integral has a closed form for the linear ramp
    const double expected_leak =
        1.0 - std::exp(-2.0 * 0.1 * kRatePerKhzUs * 35.0 / 2.0);
    CHECK(r.leaked_mass() == doctest::Approx(expected_leak).epsilon(1e-7));
    CHECK(std::abs(r.total_trace() - 1.0) < 1e-8);
    CHECK(r.stats.conservation_drift <= 1e-6);
    CHECK(std::abs(dist.probs.sum() - 1.0) < 1e-8);
    // per-qubit leak: both qubits scatter at the same rate
    CHECK(r.qubit_leak(0) == doctest::Approx(r.qubit_leak(1)).epsilon(1e-9));
  }

  SUBCASE("n=3, T=90") {
    const OpenResult r = evolve_open(chain_spec(3, 90.0), noise, fast());
    const ReadoutDistribution dist = readout(r, noise.readout_split);
    CHECK(dist.success_probability(oracle::kChain3Ground) ==
          doctest::Approx(oracle::kOpen3T90).epsilon(2e-7));
    CHECK(r.leaked_mass() ==
          doctest::Approx(oracle::kLeak3T90).epsilon(1e-6));
  }

  SUBCASE("n=4, T=120") {
    const OpenResult r = evolve_open(chain_spec(4, 120.0), noise, fast());
    const ReadoutDistribution dist = readout(r, noise.readout_split);
    CHECK(dist.success_probability(oracle::kChain4Ground) ==
          doctest::Approx(oracle::kOpen4T120).epsilon(2e-7));
    CHECK(r.leaked_mass() ==
          doctest::Approx(oracle::kLeak4T120).epsilon(1e-6));
  }
}

TEST_CASE("constant-profile leak matches its closed form") {
  NoiseModel noise = envelope_noise(0.1);
  noise.time_profile = NoiseModel::Profile::Constant;
  const OpenResult r = evolve_open(chain_spec(2, 35.0), noise, fast());
  const double expected_leak = 1.0 - std::exp(-2.0 * 0.1 * kRatePerKhzUs * 35.0);
  CHECK(r.leaked_mass() == doctest::Approx(expected_leak).epsilon(1e-7));
}

TEST_CASE("success probability is nonincreasing in the scattering rate") {
  const AnnealSpec spec = chain_spec(2, 35.0);
  double prev = 1.1;
  for (double gamma : {0.0, 0.05, 0.1, 0.2, 0.4}) {
    const NoiseModel noise = envelope_noise(gamma);
    const OpenResult r = evolve_open(spec, noise, fast());
    const double p = readout(r, noise.readout_split)
                         .success_probability(oracle::kChain2Ground);
    CHECK(p < prev);
    prev = p;
  }
}

TEST_CASE("zero-noise master equation reduces to the closed evolution") {
  const AnnealSpec spec = chain_spec(2, 35.0);
  const OpenResult open = evolve_open(spec, envelope_noise(0.0), tight());
  const ClosedResult closed = evolve_closed(spec, tight());
  CHECK(open.leaked_mass() < 1e-12);
  const Eigen::MatrixXcd pure =
      closed.psi * closed.psi.adjoint();
  CHECK((open.sectors[0].rho - pure).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("sector bookkeeping: masks ordered by popcount then value") {
  const OpenResult r =
      evolve_open(chain_spec(3, 5.0), envelope_noise(0.5), fast());
  REQUIRE(r.sectors.size() == 8);
  CHECK(r.sectors[0].scattered_mask == 0u);
  CHECK(r.sectors[1].scattered_mask == 1u);
  CHECK(r.sectors[2].scattered_mask == 2u);
  CHECK(r.sectors[3].scattered_mask == 4u);
  CHECK(r.sectors[4].scattered_mask == 3u);
  CHECK(r.sectors[7].scattered_mask == 7u);
  for (const Sector& s : r.sectors) {
    const int active = 3 - __builtin_popcount(s.scattered_mask);
    CHECK(s.rho.rows() == (1 << active));
    CHECK(int(s.active.size()) == active);
  }
  CHECK(std::abs(r.total_trace() - 1.0) < 1e-8);
}

TEST_CASE("master-equation size cap") {
  AnnealSpec spec = chain_spec(8, 5.0);
  CHECK_THROWS_AS(evolve_open(spec, envelope_noise(0.1), fast()),
                  DomainError);
}

TEST_CASE("trajectory histogram is independent of the thread count") {
  const AnnealSpec spec = chain_spec(2, 35.0);
  const NoiseModel noise = envelope_noise(0.1);
  const TrajectoryHistogram one =
      evolve_trajectories(spec, noise, fast(), 600, 42, 1);
  const TrajectoryHistogram four =
      evolve_trajectories(spec, noise, fast(), 600, 42, 4);
  REQUIRE(one.counts.size() == four.counts.size());
  for (size_t k = 0; k < one.counts.size(); ++k) {
    CHECK(one.counts[k] == four.counts[k]);  // identical integers
  }
  CHECK(one.n_traj == 600);
  uint64_t total = 0;
  for (uint64_t c : one.counts) total += c;
  CHECK(total == 600);
}

TEST_CASE("trajectories with zero noise sample the closed distribution") {
  const AnnealSpec spec = chain_spec(2, 35.0);
  const TrajectoryHistogram hist =
      evolve_trajectories(spec, envelope_noise(0.0), fast(), 2000, 7, 1);
  const ReadoutDistribution ref = readout(evolve_closed(spec, fast()), 2);
  const ReadoutDistribution got = readout(hist);
  for (uint32_t k = 0; k < 4; ++k) {
    const double p = ref.success_probability(k);
    const double sigma = std::sqrt(std::max(p * (1.0 - p) / 2000.0, 1e-12));
    CHECK(std::abs(got.success_probability(k) - p) <= 4.0 * sigma + 1e-9);
  }
}

TEST_CASE("trajectories agree with the master equation within sampling error") {
  const AnnealSpec spec = chain_spec(2, 35.0);
  const NoiseModel noise = envelope_noise(0.1);
  const uint64_t n_traj = 4000;
  const ReadoutDistribution mc =
      readout(evolve_trajectories(spec, noise, fast(), n_traj, 12345, 1));
  const ReadoutDistribution me =
      readout(evolve_open(spec, noise, fast()), noise.readout_split);
  for (uint32_t k = 0; k < 4; ++k) {
    const double p = me.success_probability(k);
    const double sigma = std::sqrt(std::max(p * (1.0 - p) / double(n_traj), 1e-12));
    CHECK(std::abs(mc.success_probability(k) - p) <= 4.0 * sigma + 1e-9);
  }
}

TEST_CASE("post-jump dynamics match the master equation at strong noise") {
  // At this rate roughly one trajectory in six scatters, so this run
  // actually exercises the reduced-register segments between jumps (the
  // weak-noise agreement test above is dominated by jump-free paths).
  // Agreement holds for any ramp length, so a short one keeps it cheap.
  const AnnealSpec spec = chain_spec(2, 10.0);
  const NoiseModel noise = envelope_noise(17.5);
  const uint64_t n_traj = 3000;
  const ReadoutDistribution mc =
      readout(evolve_trajectories(spec, noise, sampling(), n_traj, 2718, 1));
  const ReadoutDistribution me =
      readout(evolve_open(spec, noise, sampling()), noise.readout_split);
  for (uint32_t k = 0; k < 4; ++k) {
    const double p = me.success_probability(k);
    const double sigma =
        std::sqrt(std::max(p * (1.0 - p) / double(n_traj), 1e-12));
    CHECK(std::abs(mc.success_probability(k) - p) <= 4.0 * sigma + 1e-9);
  }
}

TEST_CASE("trajectories track the master equation for three and four qubits") {
  SUBCASE("n=3") {
    const AnnealSpec spec = chain_spec(3, 30.0);
    const NoiseModel noise = envelope_noise(3.0);
    const ReadoutDistribution mc =
        readout(evolve_trajectories(spec, noise, sampling(), 2000, 314, 1));
    const ReadoutDistribution me =
        readout(evolve_open(spec, noise, sampling()), noise.readout_split);
    for (uint32_t k = 0; k < 8; ++k) {
      const double p = me.success_probability(k);
      const double sigma =
          std::sqrt(std::max(p * (1.0 - p) / 2000.0, 1e-12));
      CHECK(std::abs(mc.success_probability(k) - p) <= 4.0 * sigma + 1e-9);
    }
  }
  SUBCASE("n=4") {
    const AnnealSpec spec = chain_spec(4, 40.0);
    const NoiseModel noise = envelope_noise(1.5);
    const ReadoutDistribution mc =
        readout(evolve_trajectories(spec, noise, sampling(), 1200, 159, 1));
    const ReadoutDistribution me =
        readout(evolve_open(spec, noise, sampling()), noise.readout_split);
    for (uint32_t k = 0; k < 16; ++k) {
      const double p = me.success_probability(k);
      const double sigma =
          std::sqrt(std::max(p * (1.0 - p) / 1200.0, 1e-12));
      CHECK(std::abs(mc.success_probability(k) - p) <= 4.0 * sigma + 1e-9);
    }
  }
}

TEST_CASE("seed changes the histogram, reuse reproduces it") {
  const AnnealSpec spec = chain_spec(2, 5.0);
  const NoiseModel noise = envelope_noise(0.3);
  const TrajectoryHistogram a =
      evolve_trajectories(spec, noise, fast(), 400, 1, 1);
  const TrajectoryHistogram b =
      evolve_trajectories(spec, noise, fast(), 400, 1, 2);
  const TrajectoryHistogram c =
      evolve_trajectories(spec, noise, fast(), 400, 2, 1);
  bool same_ab = true, same_ac = true;
  for (size_t k = 0; k < a.counts.size(); ++k) {
    same_ab = same_ab && a.counts[k] == b.counts[k];
    same_ac = same_ac && a.counts[k] == c.counts[k];
  }
  CHECK(same_ab);
  CHECK_FALSE(same_ac);
}

TEST_CASE("per-trajectory RNG substreams are deterministic and decorrelated") {
  detail::SplitMix64 a(99, 0);
  detail::SplitMix64 a2(99, 0);
  detail::SplitMix64 b(99, 1);
  for (int i = 0; i < 16; ++i) {
    const uint64_t va = a.next();
    CHECK(va == a2.next());
    CHECK(va != b.next());
  }
  detail::SplitMix64 u(7, 3);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform01();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
}

TEST_CASE("noise and integrator validation") {
  NoiseModel noise;
  noise.gamma_max_khz = -0.1;
  CHECK_THROWS_AS(noise.validate(), SchemaError);
  noise.gamma_max_khz = 0.1;
  noise.readout_split = 1.5;
  CHECK_THROWS_AS(noise.validate(), SchemaError);
  noise.readout_split = 7.0 / 16.0;
  CHECK_NOTHROW(noise.validate());

  IntegratorConfig cfg;
  cfg.rel_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), SchemaError);
  cfg.rel_tol = 1e-9;
  cfg.abs_tol = -1.0;
  CHECK_THROWS_AS(cfg.validate(), SchemaError);
  cfg.abs_tol = 1e-12;
  cfg.max_step_us = 0.0;
  CHECK_THROWS_AS(cfg.validate(), SchemaError);
}

TEST_CASE("readout split moves scattered mass between bit values") {
  // strong constant noise: all but ~e^-7 of each atom's mass scatters
  AnnealSpec spec = chain_spec(2, 35.0);
  NoiseModel noise;
  noise.gamma_max_khz = 200.0;
  noise.time_profile = NoiseModel::Profile::Constant;

  noise.readout_split = 0.0;  // scattered atoms always read logical 0
  const ReadoutDistribution d0 =
      readout(evolve_open(spec, noise, fast()), noise.readout_split);
  noise.readout_split = 1.0;  // always logical 1
  const ReadoutDistribution d1 =
      readout(evolve_open(spec, noise, fast()), noise.readout_split);
  CHECK(d0.success_probability(0b00) > 0.9);
  CHECK(d1.success_probability(0b11) > 0.9);
}
