#include "qpair/mcwf.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "integrate.hpp"

namespace qpair {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::int64_t index) {
  return splitmix64(master_seed ^ splitmix64(0x9E3779B97F4A7C15ULL +
                                             static_cast<std::uint64_t>(index)));
}

const char* const kSeedStreamDescription =
    "seed_i = splitmix64(master ^ splitmix64(0x9E3779B97F4A7C15 + i)) -> "
    "mt19937_64, uniform = (x >> 11) * 2^-53";

JumpChannelId select_channel(const std::array<double, kNumChannels>& rates,
                             double scaled_epsilon) {
  double total = 0.0;
  for (double r : rates) total += r;
  double target = scaled_epsilon * total;
  double cum = 0.0;
  int last_active = 0;
  for (int m = 0; m < kNumChannels; ++m) {
    if (rates[m] <= 0.0) continue;
    last_active = m;
    cum += rates[m];
    if (target < cum) return static_cast<JumpChannelId>(m);
  }
  return static_cast<JumpChannelId>(last_active);
}

StepOutcome mcwf_step(const HamiltonianApplier& h_eff, Vector& psi, double t,
                      double dt, TrajectoryRng& rng, double seg_lo, double seg_hi) {
  std::array<double, kNumChannels> rates;
  h_eff.channel_rates(psi, rates);
  double total = 0.0;
  for (double r : rates) total += r;
  double dp = total * dt;
  if (dp >= 0.1)
    throw StepSizeError("mcwf_step: dp = " + std::to_string(dp) +
                        " >= 0.1; reduce dt");

  double eps = rng.uniform();
  StepOutcome out;
  if (eps < dp) {
    out.jumped = true;
    out.event.time = t;
    out.event.channel = select_channel(rates, eps / dp);
    out.event.norm2_before = psi.squaredNorm();
    Vector collapsed(psi.size());
    h_eff.apply_jump(out.event.channel, psi, collapsed);
    double nrm = collapsed.norm();
    psi = collapsed / nrm;
  } else {
    thread_local detail::Rk4Scratch scratch(0);
    if (scratch.k1.size() != psi.size())
      scratch = detail::Rk4Scratch(static_cast<int>(psi.size()));
    detail::rk4_step(h_eff, t, dt, psi, scratch, seg_lo, seg_hi);
    double n2 = psi.squaredNorm();
    if (n2 > 1.0 + 1e-10) out.norm_violation = true;
    psi /= std::sqrt(n2);
  }
  return out;
}

namespace {

// Basis-derived lookups shared by every trajectory of an ensemble.
struct Probes {
  int i01 = -1;  // |c;1,0,0,1>: sigma+ in cavity 1, sigma- in cavity 2
  int i10 = -1;  // |c;0,1,1,0>
  std::array<Vector, 5> named;
  std::vector<int> sector_of;          // 0 xi2, 1 xi1+, 2 xi1-, 3 xi0, -1 other
  std::vector<std::pair<int, int>> cavity_photons;  // per basis state

  explicit Probes(const BasisPtr& basis) {
    i01 = basis->index_of({AtomLevel::c, {1, 0, 0, 1}});
    i10 = basis->index_of({AtomLevel::c, {0, 1, 1, 0}});
    int k = 0;
    for (NamedState s : {NamedState::I, NamedState::B, NamedState::D,
                         NamedState::EPlus, NamedState::EMinus})
      named[k++] = named_state(s, basis).amps();
    for (const BasisState& s : basis->states()) {
      int np = s.excitation_plus(), nm = s.excitation_minus();
      int sector = -1;
      if (np == 1 && nm == 1) sector = 0;
      else if (np == 1 && nm == 0) sector = 1;
      else if (np == 0 && nm == 1) sector = 2;
      else if (np == 0 && nm == 0) sector = 3;
      sector_of.push_back(sector);
      cavity_photons.emplace_back(s.cavity_photons(1), s.cavity_photons(2));
    }
  }
};

std::array<double, 4> sector_populations(const Probes& pr, const Vector& psi) {
  std::array<double, 4> pops{};
  for (int i = 0; i < psi.size(); ++i) {
    int s = pr.sector_of[i];
    if (s >= 0) pops[s] += std::norm(psi(i));
  }
  return pops;
}

struct ResolvedWindow {
  double t_exit, t_end, leak_window, dt_leak;
};

ResolvedWindow resolve_window(const ModelParams& p, const EnsembleOptions& opts,
                              const HamiltonianApplier& h) {
  ResolvedWindow w;
  w.t_exit = p.t_exit();
  w.t_end = opts.t_end < 0 ? w.t_exit : opts.t_end;
  if (w.t_end < w.t_exit)
    throw std::invalid_argument("t_end must not precede the atom exit time");
  double max_rate = h.max_total_rate();
  w.leak_window = 0.0;
  w.dt_leak = opts.dt;
  if (opts.leak_out && max_rate > 0.0) {
    w.leak_window = opts.leak_window < 0
                        ? (p.max_kappa() > 0 ? 8.0 / p.max_kappa() : 0.0)
                        : opts.leak_window;
    // dp stays well below the 0.1 step bound even on the worst basis state.
    w.dt_leak = std::min(0.05 / max_rate, w.leak_window > 0 ? w.leak_window / 64 : opts.dt);
    w.dt_leak = std::max(w.dt_leak, opts.dt);
  }
  return w;
}

std::vector<double> series_grid(const ModelParams& p, const EnsembleOptions& opts,
                                double t_end) {
  std::vector<double> grid;
  if (opts.snapshot_stride <= 0) return grid;
  grid.push_back(0.0);
  auto breaks = detail::segment_breaks(p, 0.0, t_end);
  double t_exit = p.t_exit();
  if (t_exit > 0 && t_exit < t_end &&
      std::find(breaks.begin(), breaks.end(), t_exit) == breaks.end()) {
    breaks.push_back(t_exit);
    std::sort(breaks.begin(), breaks.end());
  }
  int step = 0;
  for (size_t s = 0; s + 1 < breaks.size(); ++s) {
    double a = breaks[s], b = breaks[s + 1];
    if (b <= a) continue;
    int n = std::max(1, static_cast<int>(std::ceil((b - a) / opts.dt - 1e-12)));
    double dt = (b - a) / n;
    for (int k = 0; k < n; ++k) {
      ++step;
      if (step % opts.snapshot_stride == 0) grid.push_back(a + (k + 1) * dt);
    }
  }
  return grid;
}

TrajectoryRecord run_trajectory_impl(const HamiltonianApplier& h, const Probes& pr,
                                     std::uint64_t master_seed, std::int64_t index,
                                     const EnsembleOptions& opts,
                                     std::vector<std::array<double, 4>>* series_rows) {
  const ModelParams& p = h.params();
  ResolvedWindow w = resolve_window(p, opts, h);

  TrajectoryRecord rec;
  rec.index = index;
  rec.seed = derive_seed(master_seed, index);
  TrajectoryRng rng(rec.seed);

  Vector psi = named_state(NamedState::I, h.basis()).amps();
  if (series_rows) series_rows->push_back(sector_populations(pr, psi));

  auto breaks = detail::segment_breaks(p, 0.0, w.t_end);
  if (w.t_exit > 0 && w.t_exit < w.t_end &&
      std::find(breaks.begin(), breaks.end(), w.t_exit) == breaks.end()) {
    breaks.push_back(w.t_exit);
    std::sort(breaks.begin(), breaks.end());
  }

  auto record_exit = [&]() {
    rec.exit_state = psi;
    Complex a01 = psi(pr.i01), a10 = psi(pr.i10);
    rec.amp01 = a01;
    rec.amp10 = a10;
    for (int k = 0; k < 5; ++k)
      rec.named_populations[k] = std::norm(pr.named[k].dot(psi));
    rec.eplus_population = rec.named_populations[3];
    rec.sector_populations = sector_populations(pr, psi);
  };

  int step = 0;
  for (size_t s = 0; s + 1 < breaks.size(); ++s) {
    double a = breaks[s], b = breaks[s + 1];
    if (b <= a) continue;
    int n = std::max(1, static_cast<int>(std::ceil((b - a) / opts.dt - 1e-12)));
    double dt = (b - a) / n;
    for (int k = 0; k < n; ++k) {
      StepOutcome out = mcwf_step(h, psi, a + k * dt, dt, rng, a, b);
      if (out.jumped) rec.jumps.push_back(out.event);
      if (out.norm_violation) ++rec.norm_violations;
      ++step;
      if (series_rows && opts.snapshot_stride > 0 && step % opts.snapshot_stride == 0)
        series_rows->push_back(sector_populations(pr, psi));
    }
    if (std::abs(b - w.t_exit) < 1e-12) record_exit();
  }
  if (rec.exit_state.size() == 0) record_exit();  // t_end == t_exit

  // Leak-out: photons escape through the mirrors; large steps are safe since
  // the couplings are (essentially) over and dp per step stays small.
  if (w.leak_window > 0.0) {
    int n = std::max(1, static_cast<int>(std::ceil(w.leak_window / w.dt_leak)));
    double dt = w.leak_window / n;
    for (int k = 0; k < n; ++k) {
      StepOutcome out = mcwf_step(h, psi, w.t_end + k * dt, dt, rng, w.t_end,
                                  w.t_end + w.leak_window);
      if (out.jumped) rec.jumps.push_back(out.event);
      if (out.norm_violation) ++rec.norm_violations;
    }
  }
  rec.final_state = psi;

  // Detection bookkeeping: mirror clicks during the run plus a projective
  // assignment of any photons still inside at the end.
  for (const JumpEvent& e : rec.jumps) {
    int cav = channel_cavity(e.channel);
    if (cav == 1) ++rec.clicks_cavity1;
    if (cav == 2) ++rec.clicks_cavity2;
  }
  std::vector<double> probs;
  std::vector<std::pair<int, int>> configs;
  for (int i = 0; i < psi.size(); ++i) {
    double pr_i = std::norm(psi(i));
    auto cfg = pr.cavity_photons[i];
    rec.residual_photons += pr_i * (cfg.first + cfg.second);
    auto it = std::find(configs.begin(), configs.end(), cfg);
    if (it == configs.end()) {
      configs.push_back(cfg);
      probs.push_back(pr_i);
    } else {
      probs[it - configs.begin()] += pr_i;
    }
  }
  double u = rng.uniform();
  double cum = 0.0;
  std::pair<int, int> residual = configs.empty() ? std::pair{0, 0} : configs.back();
  for (size_t i = 0; i < configs.size(); ++i) {
    cum += probs[i];
    if (u < cum) {
      residual = configs[i];
      break;
    }
  }
  rec.clicks_cavity1 += residual.first;
  rec.clicks_cavity2 += residual.second;

  int c1 = rec.clicks_cavity1, c2 = rec.clicks_cavity2;
  if (c1 + c2 == 0) rec.clicks = ClickPattern::none;
  else if (c1 + c2 == 1) rec.clicks = ClickPattern::single;
  else if (c1 > 0 && c2 > 0) rec.clicks = ClickPattern::coincidence;
  else rec.clicks = ClickPattern::same_cavity;
  return rec;
}

}  // namespace

void EnsembleStats::init(BasisPtr b, const EnsembleOptions& opts, const ModelParams& p,
                         const std::vector<double>& grid) {
  basis = std::move(b);
  exit_pop_sum = Eigen::VectorXd::Zero(basis->dim());
  exit_pop_sumsq = Eigen::VectorXd::Zero(basis->dim());
  series.times = grid;
  series.sum = Eigen::MatrixXd::Zero(static_cast<int>(grid.size()), 4);
  series.sumsq = Eigen::MatrixXd::Zero(static_cast<int>(grid.size()), 4);
  t_exit = p.t_exit();
  dt = opts.dt;
  leak_out = opts.leak_out;
  max_kappa = p.max_kappa();
  min_kappa = p.min_kappa();
  leak_window = 0.0;
  if (opts.leak_out)
    leak_window = opts.leak_window < 0 ? (max_kappa > 0 ? 8.0 / max_kappa : 0.0)
                                       : opts.leak_window;
}

void EnsembleStats::add(const TrajectoryRecord& rec,
                        const std::vector<std::array<double, 4>>& series_rows) {
  ++n;
  double pe = rec.eplus_population;
  sum_eplus += pe;
  sumsq_eplus += pe * pe;
  double p2 = std::norm(rec.amp01) + std::norm(rec.amp10);
  sum_p2_exit += p2;
  sumsq_p2_exit += p2 * p2;
  double cross = std::real(rec.amp01 * std::conj(rec.amp10));
  sum_cross += cross;
  sumsq_cross += cross * cross;
  sum_cross_p2 += cross * p2;
  coincidence_block(0, 0) += std::norm(rec.amp01);
  coincidence_block(1, 1) += std::norm(rec.amp10);
  coincidence_block(0, 1) += rec.amp01 * std::conj(rec.amp10);
  coincidence_block(1, 0) += rec.amp10 * std::conj(rec.amp01);
  for (int i = 0; i < rec.exit_state.size(); ++i) {
    double pop = std::norm(rec.exit_state(i));
    exit_pop_sum(i) += pop;
    exit_pop_sumsq(i) += pop * pop;
  }
  for (int k = 0; k < 5; ++k) named_pop_sum[k] += rec.named_populations[k];
  ++click_counts[static_cast<int>(rec.clicks)];
  total_jumps += static_cast<std::int64_t>(rec.jumps.size());
  norm_violations += rec.norm_violations;
  residual_photon_sum += rec.residual_photons;
  for (size_t r = 0; r < series_rows.size() && r < static_cast<size_t>(series.sum.rows()); ++r)
    for (int c = 0; c < 4; ++c) {
      series.sum(static_cast<int>(r), c) += series_rows[r][c];
      series.sumsq(static_cast<int>(r), c) += series_rows[r][c] * series_rows[r][c];
    }
}

void EnsembleStats::merge(const EnsembleStats& other) {
  n += other.n;
  sum_eplus += other.sum_eplus;
  sumsq_eplus += other.sumsq_eplus;
  sum_p2_exit += other.sum_p2_exit;
  sumsq_p2_exit += other.sumsq_p2_exit;
  sum_cross += other.sum_cross;
  sumsq_cross += other.sumsq_cross;
  sum_cross_p2 += other.sum_cross_p2;
  coincidence_block += other.coincidence_block;
  exit_pop_sum += other.exit_pop_sum;
  exit_pop_sumsq += other.exit_pop_sumsq;
  for (int k = 0; k < 5; ++k) named_pop_sum[k] += other.named_pop_sum[k];
  for (int k = 0; k < 4; ++k) click_counts[k] += other.click_counts[k];
  total_jumps += other.total_jumps;
  norm_violations += other.norm_violations;
  residual_photon_sum += other.residual_photon_sum;
  series.sum += other.series.sum;
  series.sumsq += other.series.sumsq;
}

TrajectoryRecord run_trajectory(const ModelParams& p, std::uint64_t master_seed,
                                std::int64_t index, const EnsembleOptions& opts) {
  auto basis = FockBasis::simulation_space(p.n_max);
  HamiltonianApplier h(basis, p, true);
  Probes pr(basis);
  std::vector<std::array<double, 4>> rows;
  return run_trajectory_impl(h, pr, master_seed, index, opts,
                             opts.snapshot_stride > 0 ? &rows : nullptr);
}

EnsembleStats run_ensemble(const ModelParams& p, std::int64_t n,
                           std::uint64_t master_seed, int workers,
                           const EnsembleOptions& opts) {
  if (n < 1) throw std::invalid_argument("run_ensemble: n must be >= 1");
  auto basis = FockBasis::simulation_space(p.n_max);
  HamiltonianApplier h(basis, p, true);
  Probes pr(basis);
  ResolvedWindow w = resolve_window(p, opts, h);
  auto grid = series_grid(p, opts, w.t_end);

  // Fixed-size index blocks reduced in order make the aggregate independent
  // of worker count and scheduling.
  constexpr std::int64_t kBlock = 256;
  std::int64_t nblocks = (n + kBlock - 1) / kBlock;
  std::vector<EnsembleStats> partial(nblocks);

  if (workers <= 0)
    workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<int>(std::min<std::int64_t>(workers, nblocks));

  std::atomic<std::int64_t> next{0};
  auto work = [&]() {
    std::vector<std::array<double, 4>> rows;
    for (;;) {
      std::int64_t blk = next.fetch_add(1);
      if (blk >= nblocks) return;
      EnsembleStats& st = partial[blk];
      st.init(basis, opts, p, grid);
      std::int64_t lo = blk * kBlock, hi = std::min(n, lo + kBlock);
      for (std::int64_t i = lo; i < hi; ++i) {
        rows.clear();
        TrajectoryRecord rec = run_trajectory_impl(
            h, pr, master_seed, i, opts, opts.snapshot_stride > 0 ? &rows : nullptr);
        st.add(rec, rows);
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  EnsembleStats total;
  total.init(basis, opts, p, grid);
  total.leak_window = w.leak_window;
  for (const auto& st : partial) total.merge(st);
  return total;
}

}  // namespace qpair
