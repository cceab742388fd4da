#include <doctest.h>

#include <cmath>
#include <set>

#include "qpair/lindblad.hpp"
#include "qpair/mcwf.hpp"

using namespace qpair;

TEST_CASE("seed derivation is the documented splitmix64 stream") {
  // Reference value of the splitmix64 mixer at zero.
  CHECK(splitmix64(0) == 0xE220A8397B1DCDAFULL);
  CHECK(derive_seed(42, 7) == derive_seed(42, 7));
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) seen.insert(derive_seed(42, i));
  CHECK(seen.size() == 1000);
  CHECK(derive_seed(42, 0) != derive_seed(43, 0));
}

TEST_CASE("uniforms live in [0, 1)") {
  TrajectoryRng rng(123);
  for (int i = 0; i < 10000; ++i) {
    double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("closed system trajectory reduces to the coherent result") {
  auto p = preset("fig4-calibrated");
  TrajectoryRecord rec = run_trajectory(p, 99, 0);
  CHECK(rec.jumps.empty());
  CHECK(rec.eplus_population >= 0.999);
  CHECK(rec.clicks == ClickPattern::coincidence);  // residual photons projected
  CHECK(rec.norm_violations == 0);
  // Final state is the pair state up to a global phase.
  auto basis = FockBasis::simulation_space();
  Complex ov = named_state(NamedState::EPlus, basis).amps().dot(rec.final_state);
  CHECK(std::abs(std::abs(ov) - 1.0) < 1e-3);
}

TEST_CASE("trajectories are pure functions of seed and index") {
  auto p = preset("fig6a");
  TrajectoryRecord a = run_trajectory(p, 7, 3);
  TrajectoryRecord b = run_trajectory(p, 7, 3);
  REQUIRE(a.jumps.size() == b.jumps.size());
  for (size_t k = 0; k < a.jumps.size(); ++k) {
    CHECK(a.jumps[k].time == b.jumps[k].time);
    CHECK(a.jumps[k].channel == b.jumps[k].channel);
  }
  CHECK((a.final_state - b.final_state).norm() == 0.0);

  TrajectoryRecord c = run_trajectory(p, 7, 4);
  CHECK(a.seed != c.seed);
}

TEST_CASE("forced-jump channel selection follows the rate ratios") {
  std::array<double, kNumChannels> rates{1.0, 2.0, 3.0, 0.0, 0.5, 0.0};
  double total = 6.5;
  TrajectoryRng rng(2024);
  const int n = 100000;
  std::array<int, kNumChannels> counts{};
  for (int i = 0; i < n; ++i)
    ++counts[static_cast<int>(select_channel(rates, rng.uniform()))];
  for (int m = 0; m < kNumChannels; ++m) {
    double expected = rates[m] / total;
    double se = std::sqrt(expected * (1 - expected) / n);
    if (rates[m] == 0.0)
      CHECK(counts[m] == 0);
    else
      CHECK(std::abs(counts[m] / double(n) - expected) < 3 * se);
  }
}

TEST_CASE("oversized steps are rejected") {
  ModelParams p;
  p.set_kappa(10.0);
  auto basis = FockBasis::simulation_space(p.n_max);
  HamiltonianApplier h(basis, p, true);
  Vector psi = named_state(NamedState::I, basis).amps();  // rate 20 per photon pair
  TrajectoryRng rng(1);
  CHECK_THROWS_AS(mcwf_step(h, psi, 0.0, 0.01, rng), StepSizeError);
}

TEST_CASE("jump bookkeeping determines the final sector") {
  auto p = preset("optical");
  for (std::int64_t idx = 0; idx < 40; ++idx) {
    TrajectoryRecord rec = run_trajectory(p, 31, idx);
    int np = 1, nm = 1;
    for (const JumpEvent& e : rec.jumps) {
      switch (e.channel) {
        case JumpChannelId::cavity1_plus:
        case JumpChannelId::cavity2_plus:
        case JumpChannelId::atom_plus: --np; break;
        default: --nm; break;
      }
      CHECK(e.norm2_before <= 1.0 + 1e-10);
    }
    auto basis = FockBasis::simulation_space();
    double in_sector = 0.0;
    for (int i = 0; i < basis->dim(); ++i)
      if (basis->state(i).excitation_plus() == np &&
          basis->state(i).excitation_minus() == nm)
        in_sector += std::norm(rec.final_state(i));
    CHECK(in_sector == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("ensemble aggregation is worker-invariant") {
  auto p = preset("fig6b");
  EnsembleOptions opts;
  opts.snapshot_stride = 50;
  auto s1 = run_ensemble(p, 600, 2718, 1, opts);
  auto s4 = run_ensemble(p, 600, 2718, 4, opts);
  CHECK(s1.n == s4.n);
  CHECK(s1.sum_eplus == s4.sum_eplus);
  CHECK(s1.sumsq_eplus == s4.sumsq_eplus);
  CHECK(s1.sum_cross == s4.sum_cross);
  CHECK(s1.click_counts == s4.click_counts);
  CHECK(s1.total_jumps == s4.total_jumps);
  CHECK((s1.exit_pop_sum - s4.exit_pop_sum).cwiseAbs().maxCoeff() == 0.0);
  CHECK((s1.series.sum - s4.series.sum).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sector populations partition unity along the series") {
  auto p = preset("fig6a");
  EnsembleOptions opts;
  opts.snapshot_stride = 100;
  auto stats = run_ensemble(p, 300, 5, 1, opts);
  REQUIRE(stats.series.times.size() > 10);
  for (int r = 0; r < stats.series.sum.rows(); ++r)
    CHECK(stats.series.sum.row(r).sum() / stats.n == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(stats.norm_violations == 0);
}

TEST_CASE("heavily damped atom: decay fraction matches the master equation") {
  // With the atomic linewidth far above g and kappa = 0, double decays are
  // rare, so the fraction of trajectories with at least one spontaneous
  // emission approximates the integrated emission rate from the oracle.
  ModelParams p;
  p.gamma = 200.0;
  const std::int64_t n = 3000;
  auto stats_opts = EnsembleOptions{};
  stats_opts.leak_out = false;

  auto basis = FockBasis::simulation_space(p.n_max);
  auto rho0 = DensityMatrix::pure(named_state(NamedState::I, basis));
  auto dres = evolve_density(rho0, p, p.t_exit(), 1e-3, 1);
  double integral = 0.0;
  for (size_t k = 0; k + 1 < dres.times.size(); ++k) {
    auto excited = [&](size_t s) {
      double pop = 0.0;
      for (int i = 0; i < basis->dim(); ++i)
        if (basis->state(i).atom != AtomLevel::c)
          pop += dres.snapshots[s](i, i).real();
      return pop;
    };
    integral += 0.5 * (excited(k) + excited(k + 1)) * (dres.times[k + 1] - dres.times[k]);
  }
  double expected = p.gamma * integral;

  int with_decay = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    TrajectoryRecord rec = run_trajectory(p, 404, i, stats_opts);
    bool any = false;
    for (const JumpEvent& e : rec.jumps) any = any || !is_cavity_channel(e.channel);
    with_decay += any;
  }
  double frac = with_decay / double(n);
  double se = std::sqrt(std::max(frac * (1 - frac), 1e-6) / n);
  CHECK(std::abs(frac - expected) < 3 * se + 0.01 * expected);
}
