#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "qpair/coherent.hpp"
#include "qpair/model.hpp"

namespace qpair {

struct StepSizeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Seed stream contract (recorded in output metadata): trajectory i uses
//   seed_i = splitmix64(master_seed ^ splitmix64(0x9E3779B97F4A7C15 + i))
// feeding a std::mt19937_64; uniforms are (x >> 11) * 2^-53. This makes each
// trajectory a pure function of (params, master_seed, index) on any machine.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master_seed, std::int64_t index);
extern const char* const kSeedStreamDescription;

class TrajectoryRng {
 public:
  explicit TrajectoryRng(std::uint64_t seed) : eng_(seed) {}
  // [0, 1), 53-bit resolution, identical across platforms.
  double uniform() { return (eng_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 eng_;
};

struct JumpEvent {
  double time;
  JumpChannelId channel;
  double norm2_before;  // squared norm just before the collapse
};

enum class ClickPattern : int {
  none = 0,          // no cavity click
  single = 1,        // one cavity click
  same_cavity = 2,   // two clicks from the same cavity
  coincidence = 3,   // one click from each cavity
};

struct TrajectoryRecord {
  std::int64_t index = 0;
  std::uint64_t seed = 0;
  std::vector<JumpEvent> jumps;

  // State at t_exit = t1 + t_flight + t2 (normalized amplitudes).
  Vector exit_state;
  double eplus_population = 0.0;  // |<E+|psi(t_exit)>|^2
  Complex amp01, amp10;           // coincidence-subspace amplitudes at t_exit
  std::array<double, 5> named_populations{};  // I, B, D, E+, E- at t_exit
  std::array<double, 4> sector_populations{};  // xi2, xi1+, xi1-, xi0 at t_exit

  // Click pattern over the full window (leak-out included); residual
  // intracavity photons at the end are assigned by projective sampling.
  ClickPattern clicks = ClickPattern::none;
  int clicks_cavity1 = 0;
  int clicks_cavity2 = 0;
  double residual_photons = 0.0;  // expectation before the final projection

  Vector final_state;  // normalized, at the very end of the run
  int norm_violations = 0;  // between-jump norm increases beyond 1e-10
};

struct EnsembleOptions {
  double dt = 1e-3;
  double t_end = -1.0;       // < 0: use p.t_exit()
  bool leak_out = true;      // extend the run so intracavity photons escape
  double leak_window = -1.0; // < 0: use 8 / max kappa (0 if kappa = 0)
  int snapshot_stride = 0;   // record sector populations every this many steps
};

struct SeriesAccumulator {
  std::vector<double> times;
  // Row per time point, column per sector (xi2, xi1+, xi1-, xi0).
  Eigen::MatrixXd sum, sumsq;
};

// Merge-only statistics; reduction is performed in fixed index order so the
// result is independent of worker count.
struct EnsembleStats {
  std::int64_t n = 0;
  BasisPtr basis;

  // Accumulators over trajectories, all evaluated at t_exit.
  double sum_eplus = 0.0, sumsq_eplus = 0.0;
  double sum_p2_exit = 0.0, sumsq_p2_exit = 0.0;
  // For the post-selected two-qubit block and its standard error:
  // A = Re(amp01 conj(amp10)), B = |amp01|^2 + |amp10|^2.
  double sum_cross = 0.0, sumsq_cross = 0.0, sum_cross_p2 = 0.0;
  Eigen::Matrix2cd coincidence_block = Eigen::Matrix2cd::Zero();
  Eigen::VectorXd exit_pop_sum, exit_pop_sumsq;  // per basis state
  std::array<double, 5> named_pop_sum{};

  std::array<std::int64_t, 4> click_counts{};  // indexed by ClickPattern
  std::int64_t total_jumps = 0;
  std::int64_t norm_violations = 0;
  double residual_photon_sum = 0.0;

  SeriesAccumulator series;

  double t_exit = 0.0;
  double dt = 0.0;
  bool leak_out = false;
  double leak_window = 0.0;
  double max_kappa = 0.0;
  double min_kappa = 0.0;

  void init(BasisPtr b, const EnsembleOptions& opts, const ModelParams& p,
            const std::vector<double>& grid);
  void add(const TrajectoryRecord& rec, const std::vector<std::array<double, 4>>& series_rows);
  void merge(const EnsembleStats& other);
};

// One stochastic step: jump decision, channel selection, or renormalized
// non-Hermitian drift, exactly one uniform draw per step. Throws
// StepSizeError if dp = dt * sum_m <C_m^dag C_m> reaches 0.1.
struct StepOutcome {
  bool jumped = false;
  bool norm_violation = false;  // drift step increased the norm beyond 1e-10
  JumpEvent event{};
};
// seg_lo/seg_hi bound the current continuous segment; stage times at a
// square-pulse edge are resolved to this segment's side.
StepOutcome mcwf_step(const HamiltonianApplier& h_eff, Vector& psi, double t,
                      double dt, TrajectoryRng& rng, double seg_lo = -1e300,
                      double seg_hi = 1e300);

// Channel choice for a forced jump given epsilon in [0, dp); exposed for
// statistical tests of the selection rule.
JumpChannelId select_channel(const std::array<double, kNumChannels>& rates,
                             double scaled_epsilon);

TrajectoryRecord run_trajectory(const ModelParams& p, std::uint64_t master_seed,
                                std::int64_t index, const EnsembleOptions& opts = {});

EnsembleStats run_ensemble(const ModelParams& p, std::int64_t n,
                           std::uint64_t master_seed, int workers,
                           const EnsembleOptions& opts = {});

}  // namespace qpair
