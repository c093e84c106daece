#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "rydsim/dressing.hpp"
#include "rydsim/error.hpp"

using namespace rydsim;

namespace {

DressingParams params(double omega, double delta, double gamma = 0.0,
                      double v = std::numeric_limits<double>::infinity()) {
  DressingParams p;
  p.omega_mhz = omega;
  p.delta_mhz = delta;
  p.gamma_line_khz = gamma;
  p.v_dd_mhz = v;
  return p;
}

}  // namespace

TEST_CASE("closed form and pair diagonalization agree under perfect blockade") {
  // 50 x 50 grid covering weak through saturated dressing on both detuning
  // signs; 50 points across [-20, 20] never land on the excluded Delta = 0.
  // The corner Omega = 0.1, |Delta| = 20 is the hard case: J is six orders
  // of magnitude smaller than the light shifts it is a difference of, so a
  // 1e-10 agreement bound leaves no room for cancellation error in either
  // computation path.
  for (int i = 0; i < 50; ++i) {
    const double omega = 0.1 + (20.0 - 0.1) * i / 49.0;
    for (int j = 0; j < 50; ++j) {
      const double delta = -20.0 + 40.0 * j / 49.0;
      const DressingParams p = params(omega, delta);
      const double closed = j_closed_form(p);
      const DressedPairResult d = diagonalize_pair(p);
      INFO("omega=", omega, " delta=", delta);
      CHECK(std::abs(d.j_coupling_mhz - closed) <= 1e-10 * std::abs(closed));
    }
  }
}

TEST_CASE("reference operating point (Omega=10, Delta=8) reproduces frozen values") {
  const DressingParams p = params(10.0, 8.0, 0.53);
  const DressedPairResult d = diagonalize_pair(p);
  CHECK(d.j_coupling_mhz == doctest::Approx(oracle::kJPairMhz).epsilon(1e-12));
  CHECK(d.single_light_shift_mhz ==
        doctest::Approx(oracle::kSingleShiftMhz).epsilon(1e-12));
  CHECK(d.pair_light_shift_mhz ==
        doctest::Approx(oracle::kPairShiftMhz).epsilon(1e-12));
  CHECK(d.rydberg_admixture_single ==
        doctest::Approx(oracle::kAdmixtureSingle).epsilon(1e-12));
  CHECK(d.rydberg_admixture_pair ==
        doctest::Approx(oracle::kAdmixturePair).epsilon(1e-12));
  CHECK(d.scattering_rate_khz ==
        doctest::Approx(oracle::kGammaPairKhz).epsilon(1e-12));
  CHECK(d.kappa == doctest::Approx(oracle::kKappa).epsilon(1e-12));
  CHECK(d.dressed_gap_mhz ==
        doctest::Approx(oracle::kDressedGapMhz).epsilon(1e-12));
  CHECK(d.dressed_gap_mhz ==
        doctest::Approx(std::sqrt(2.0 * 100.0 + 64.0)).epsilon(1e-14));

  const ScatteringAndMerit m = scattering_and_merit(p);
  CHECK(m.gamma_khz == doctest::Approx(d.scattering_rate_khz).epsilon(1e-14));
  CHECK(m.kappa == doctest::Approx(d.kappa).epsilon(1e-14));
  // kappa = |J| in kHz over gamma in kHz
  CHECK(m.kappa == doctest::Approx(std::abs(d.j_coupling_mhz) * 1e3 /
                                   d.scattering_rate_khz)
                       .epsilon(1e-12));
}

TEST_CASE("perturbative limit holds in the weak-dressing regime") {
  for (double ratio : {0.02, 0.05, 0.1}) {
    for (double delta : {2.0, 8.0, 15.0, -8.0}) {
      const DressingParams p = params(ratio * std::abs(delta), delta);
      const double exact = j_closed_form(p);
      const double pert = j_perturbative(p);
      CHECK(pert == doctest::Approx(-std::pow(p.omega_mhz, 4) /
                                    (8.0 * std::pow(delta, 3)))
                        .epsilon(1e-14));
      CHECK(std::abs(exact - pert) <= 0.05 * std::abs(exact));
    }
  }
  // well outside the weak regime the expansion must visibly disagree
  const DressingParams strong = params(10.0, 8.0);
  CHECK(std::abs(j_perturbative(strong) - j_closed_form(strong)) >
        0.2 * std::abs(j_closed_form(strong)));
}

TEST_CASE("coupling is odd in the detuning") {
  // Flipping the laser to the other side of the line mirrors the dressed
  // ground branch, so J changes sign with Delta -- bit-exactly, because both
  // evaluation paths only ever negate the detuning.
  for (double omega : {1.0, 5.0, 12.0}) {
    for (double delta : {0.5, 3.0, 9.0}) {
      CHECK(j_closed_form(params(omega, -delta)) ==
            -j_closed_form(params(omega, delta)));
      CHECK(diagonalize_pair(params(omega, -delta)).j_coupling_mhz ==
            -diagonalize_pair(params(omega, delta)).j_coupling_mhz);
    }
  }
}

TEST_CASE("blue detuning gives a negative entangling shift") {
  CHECK(j_closed_form(params(10.0, 8.0)) < 0.0);
  CHECK(j_closed_form(params(1.0, 10.0)) < 0.0);
}

TEST_CASE("zero detuning makes the branch assignment ambiguous") {
  CHECK_THROWS_AS(diagonalize_pair(params(10.0, 0.0)), NumericalError);
  // anti-blockade resonance: the doubly excited bare level crosses |gg>
  // exactly at v_dd = 2 Delta, so the adiabatic connection is undefined
  CHECK_THROWS_AS(diagonalize_pair(params(10.0, 8.0, 0.0, 16.0)),
                  NumericalError);
}

TEST_CASE("finite interaction converges to the blockaded coupling") {
  const DressingParams ideal = params(10.0, 8.0);
  const double blockaded = j_closed_form(ideal);
  double prev_err = std::numeric_limits<double>::infinity();
  for (double v : {1e3, 1e4, 1e5, 1e6}) {
    const DressedPairResult d = diagonalize_pair(params(10.0, 8.0, 0.0, v));
    const double err = std::abs(d.j_coupling_mhz - blockaded);
    CHECK(err < prev_err);
    // at finite interaction J is assembled directly from the two shifts
    CHECK(d.j_coupling_mhz ==
          d.pair_light_shift_mhz - 2.0 * d.single_light_shift_mhz);
    prev_err = err;
  }
  CHECK(prev_err < 1e-4 * std::abs(blockaded));

  // weak interaction: almost independent atoms, so J collapses toward zero
  const DressedPairResult weak = diagonalize_pair(params(10.0, 8.0, 0.0, 0.01));
  CHECK(std::abs(weak.j_coupling_mhz) < 0.05 * std::abs(blockaded));
}

TEST_CASE("no interaction means no entangling shift") {
  // with the doubly excited level unshifted the pair is two independent
  // atoms, so the pair light shift is exactly additive
  for (double omega : {0.5, 10.0, 20.0}) {
    for (double delta : {-12.0, 2.0, 8.0}) {
      const DressedPairResult d =
          diagonalize_pair(params(omega, delta, 0.0, 0.0));
      CHECK(std::abs(d.j_coupling_mhz) <= 1e-10);
      CHECK(d.pair_light_shift_mhz ==
            doctest::Approx(2.0 * d.single_light_shift_mhz).epsilon(1e-12));
    }
  }
}

TEST_CASE("entangling shift grows with the interaction below the resonance") {
  // The doubly excited level sits at -2 Delta + v_dd, so it sweeps through
  // the dressed ground branch near v_dd = 2 Delta.  Below that resonance
  // |J| rises monotonically from zero as the interaction is switched on;
  // past it the coupling settles onto the perfect-blockade value from above
  // (covered by the convergence test).  Across the resonance itself the
  // branch the ground state connects to changes, so no global monotone
  // statement holds.
  double prev = 0.0;
  for (double v : {0.5, 1.0, 2.0, 4.0, 8.0}) {  // resonance at v_dd = 16
    const double cur =
        std::abs(diagonalize_pair(params(10.0, 8.0, 0.0, v)).j_coupling_mhz);
    CHECK(cur > prev);
    prev = cur;
  }
  CHECK(prev > 0.1);  // a sizable fraction of |J(inf)| = 0.68 by v_dd = 8
}

TEST_CASE("resonant dressing saturates the admixture at one half") {
  // Delta -> 0 limit: the dressed ground state becomes an equal
  // superposition, so the scattering rate saturates at half the linewidth.
  const DressedPairResult d = diagonalize_pair(params(10.0, 1e-6, 0.53));
  CHECK(d.rydberg_admixture_single == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(d.rydberg_admixture_pair == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(d.scattering_rate_khz == doctest::Approx(0.53 / 2.0).epsilon(1e-6));
}

TEST_CASE("dressed gap dominates both the detuning and the pair coupling") {
  for (double omega : {0.1, 5.0, 20.0}) {
    for (double delta : {-20.0, -0.3, 0.7, 20.0}) {
      const double gap = diagonalize_pair(params(omega, delta)).dressed_gap_mhz;
      CHECK(gap >= std::abs(delta));
      CHECK(gap >= std::sqrt(2.0) * omega);
      CHECK(gap > 0.0);
    }
  }
}

TEST_CASE("distance model: plateau, continuity, and power-law tail") {
  TailModel tail;
  tail.k_exponent = 6;
  tail.reference_distance_um = 3.0;
  tail.reference_coupling_mhz = -0.6822100702297362;
  tail.validate();

  CHECK(j_at_distance(tail, 1.0) == tail.reference_coupling_mhz);
  CHECK(j_at_distance(tail, 3.0) == tail.reference_coupling_mhz);
  CHECK(j_at_distance(tail, 3.0 + 1e-12) ==
        doctest::Approx(tail.reference_coupling_mhz).epsilon(1e-9));
  CHECK(j_at_distance(tail, 6.0) ==
        doctest::Approx(tail.reference_coupling_mhz / 64.0).epsilon(1e-14));

  // strictly decreasing in magnitude beyond the plateau edge
  double prev_mag = std::abs(j_at_distance(tail, 3.0));
  for (double r : {3.2, 4.0, 7.0, 30.0}) {
    const double mag = std::abs(j_at_distance(tail, r));
    CHECK(mag < prev_mag);
    prev_mag = mag;
  }

  tail.k_exponent = 3;
  CHECK(j_at_distance(tail, 6.0) ==
        doctest::Approx(tail.reference_coupling_mhz / 8.0).epsilon(1e-14));

  CHECK_THROWS_AS(j_at_distance(tail, 0.0), DomainError);
  TailModel bad = tail;
  bad.k_exponent = 4;
  CHECK_THROWS_AS(bad.validate(), SchemaError);
  bad = tail;
  bad.reference_distance_um = -1.0;
  CHECK_THROWS_AS(bad.validate(), SchemaError);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(params(0.0, 8.0).validate(), SchemaError);
  CHECK_THROWS_AS(params(-1.0, 8.0).validate(), SchemaError);
  CHECK_THROWS_AS(params(10.0, 8.0, -0.5).validate(), SchemaError);
  CHECK_NOTHROW(params(10.0, 8.0, 0.53).validate());
}

TEST_CASE("sweep covers the grid in row-major order") {
  const nlohmann::json spec = {
      {"omega_mhz", {5.0, 10.0}},
      {"delta_mhz", {{"min", 4.0}, {"max", 8.0}, {"count", 3}}},
      {"gamma_line_khz", 0.53},
  };
  const std::vector<SweepRow> rows = dressing_sweep(spec);
  REQUIRE(rows.size() == 6);
  // omega outer, delta inner
  CHECK(rows[0].omega_mhz == 5.0);
  CHECK(rows[0].delta_mhz == 4.0);
  CHECK(rows[1].delta_mhz == 6.0);
  CHECK(rows[2].delta_mhz == 8.0);
  CHECK(rows[3].omega_mhz == 10.0);
  CHECK(rows[3].delta_mhz == 4.0);
  for (const SweepRow& r : rows) {
    CHECK(std::isinf(r.v_dd_mhz));
    const DressedPairResult d =
        diagonalize_pair(params(r.omega_mhz, r.delta_mhz, 0.53));
    CHECK(r.j_mhz == doctest::Approx(d.j_coupling_mhz).epsilon(1e-13));
    CHECK(r.admixture_single ==
          doctest::Approx(d.rydberg_admixture_single).epsilon(1e-13));
    CHECK(r.admixture_pair ==
          doctest::Approx(d.rydberg_admixture_pair).epsilon(1e-13));
    CHECK(r.gamma_khz == doctest::Approx(d.scattering_rate_khz).epsilon(1e-13));
  }
  // the frozen reference point appears as the last row
  CHECK(rows[5].omega_mhz == 10.0);
  CHECK(rows[5].delta_mhz == 8.0);
  CHECK(rows[5].j_mhz == doctest::Approx(oracle::kJPairMhz).epsilon(1e-12));
  CHECK(rows[5].kappa == doctest::Approx(oracle::kKappa).epsilon(1e-12));

  // a single-point range is legitimate and collapses to its lower edge
  const std::vector<SweepRow> single = dressing_sweep(nlohmann::json{
      {"omega_mhz", {{"min", 1.0}, {"max", 2.0}, {"count", 1}}},
      {"delta_mhz", {8.0}},
      {"gamma_line_khz", 0.0}});
  REQUIRE(single.size() == 1);
  CHECK(single[0].omega_mhz == 1.0);
}

TEST_CASE("sweep rejects malformed axis specs") {
  CHECK_THROWS_AS(dressing_sweep(nlohmann::json{{"delta_mhz", {8.0}}}),
                  SchemaError);  // omega axis missing
  CHECK_THROWS_AS(
      dressing_sweep(nlohmann::json{
          {"omega_mhz", {{"min", 1.0}, {"max", 2.0}, {"count", 0}}},
          {"delta_mhz", {8.0}}}),
      SchemaError);  // range form needs a positive count
  CHECK_THROWS_AS(dressing_sweep(nlohmann::json{{"omega_mhz", "ten"},
                                                {"delta_mhz", {8.0}}}),
                  SchemaError);
}
