// Acceptance suite: one line of output per criterion, nonzero exit if any
// criterion fails. The CLI binary path may be passed as argv[1] for the
// determinism criterion; without it that criterion runs at library level.

#include <array>
#include <chrono>
#include <cstdarg>
#include <cstring>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qpair/analysis.hpp"
#include "qpair/lindblad.hpp"

using namespace qpair;

namespace {

constexpr double kPi = 3.14159265358979323846;
int g_failures = 0;
std::array<std::string, 11> g_lines;

std::string fmt(const char* f, ...);

void report(int num, bool pass, const std::string& detail) {
  g_lines[num] = fmt("CRITERION %2d: %s - %s", num, pass ? "PASS" : "FAIL",
                     detail.c_str());
  std::fprintf(stderr, "[done] %s\n", g_lines[num].c_str());
  if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

double eplus_transfer(const ModelParams& p, double dt) {
  auto basis = FockBasis::simulation_space(p.n_max);
  auto psi0 = named_state(NamedState::I, basis);
  auto res = evolve(psi0, p, 0.0, p.t_exit(), dt, 0);
  return std::norm(named_state(NamedState::EPlus, basis).amps().dot(res.final_state()));
}

void criterion1() {
  auto start = std::chrono::steady_clock::now();
  double gauss = eplus_transfer(preset("fig4-calibrated"), 1e-3);
  double square = eplus_transfer(preset("fig4-square"), 2.5e-4);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  bool pass = gauss >= 0.999 && square >= 0.9999 && secs < 1.0;
  report(1, pass,
         fmt("coherent transfer: gaussian %.6f (>=0.999), square %.8f (>=0.9999), %.2fs (<1s)",
             gauss, square, secs));
}

void criterion2() {
  auto basis = FockBasis::simulation_space();
  auto i_state = named_state(NamedState::I, basis);
  auto b_state = named_state(NamedState::B, basis);
  auto e_state = named_state(NamedState::EPlus, basis);
  double worst = 0.0;
  for (double g : {0.5, 1.0, 2.0})
    for (double f : {0.0, 1.0, 2.0}) {
      double delta = f * g;
      double t = 0.8 / g;
      ModelParams p;
      p.g = g;
      p.pulse_shape = PulseShape::square;
      p.t_flight = 0.0;
      p.delta_plus = p.delta_minus = delta;

      p.t1 = t;
      p.t2 = 0.0;
      auto r1 = evolve(i_state, p, 0.0, t, 1e-4 / g, 0);
      auto [ab, ai] = analytic_cavity1(t, g, delta);
      worst = std::max(worst, std::abs(b_state.amps().dot(r1.final_state()) - ab));
      worst = std::max(worst, std::abs(i_state.amps().dot(r1.final_state()) - ai));

      p.t1 = 0.0;
      p.t2 = t;
      StateVector psi0(basis, Complex(0, -1) * b_state.amps());
      auto r2 = evolve(psi0, p, 0.0, t, 1e-4 / g, 0);
      auto [ae, ab2] = analytic_cavity2(t, g, delta);
      worst = std::max(worst, std::abs(e_state.amps().dot(r2.final_state()) - ae));
      worst = std::max(worst, std::abs(b_state.amps().dot(r2.final_state()) - ab2));
    }
  report(2, worst < 1e-8,
         fmt("analytic oracle on 9-point (g, delta) grid: max amplitude error %.2e (<1e-8)", worst));
}

void criterion3() {
  auto basis = FockBasis::simulation_space();
  auto psi0 = named_state(NamedState::I, basis);
  auto d_state = named_state(NamedState::D, basis);

  ModelParams p = preset("fig4-calibrated");
  p.delta_plus = p.delta_minus = 0.1;
  auto res = evolve(psi0, p, 0.0, p.t_exit(), 1e-3, 1);
  double max_resonant = 0.0;
  for (double v : res.populations(d_state)) max_resonant = std::max(max_resonant, v);

  p.delta_plus = 0.1;
  p.delta_minus = -0.1;  // split of 0.2 g
  auto res2 = evolve(psi0, p, 0.0, p.t1, 1e-3, 1);
  double max_split = 0.0;
  for (double v : res2.populations(d_state)) max_split = std::max(max_split, v);

  report(3, max_resonant < 1e-10 && max_split > 1e-4,
         fmt("dark state: resonant max %.2e (<1e-10), split max %.2e (>1e-4)",
             max_resonant, max_split));
}

void criteria4and10() {
  auto basis = FockBasis::simulation_space();
  auto psi0 = named_state(NamedState::I, basis);
  EnsembleOptions opts;
  opts.leak_out = false;  // populations compared at the exit time

  bool pass4 = true;
  std::string detail4 = "unraveling vs master equation, N=1e4:";
  std::int64_t violations = 0, total_n = 0;
  double worst_drift = 0.0;
  for (const char* name : {"fig6a", "fig6b", "optical"}) {
    auto p = preset(name);
    auto stats = run_ensemble(p, 10000, 20250824, 0, opts);
    auto dres = evolve_density(DensityMatrix::pure(psi0), p, p.t_exit(), 1e-3, 0);
    Eigen::VectorXd diag = dres.final_state().diagonal();
    double n = static_cast<double>(stats.n), zmax = 0.0;
    for (int i = 0; i < basis->dim(); ++i) {
      double mean = stats.exit_pop_sum(i) / n;
      double var = (stats.exit_pop_sumsq(i) -
                    stats.exit_pop_sum(i) * stats.exit_pop_sum(i) / n) / (n - 1);
      double se = std::sqrt(std::max(var, 0.0) / n);
      // Binomial floor from the oracle population: for rare states the sample
      // variance underestimates the spread whenever the count fluctuates low.
      double q = std::max(mean * (1 - mean), diag(i) * (1 - diag(i)));
      double floor = std::sqrt(std::max(q, 1e-12) / n);
      zmax = std::max(zmax, std::abs(mean - diag(i)) / std::max(se, floor));
    }
    pass4 = pass4 && zmax <= 3.0;
    detail4 += fmt(" %s max|z|=%.2f", name, zmax);
    violations += stats.norm_violations;
    total_n += stats.n;
    worst_drift = std::max(worst_drift, dres.max_trace_drift);
  }
  report(4, pass4, detail4 + " (all <=3)");
  report(10, violations == 0 && worst_drift < 1e-8,
         fmt("conservation: %lld norm violations over %lld trajectories (=0), "
             "oracle trace drift %.2e (<1e-8)",
             static_cast<long long>(violations), static_cast<long long>(total_n),
             worst_drift));
}

void criterion5() {
  auto p = preset("optical");
  auto stats = run_ensemble(p, 20000, 424242, 0, EnsembleOptions{});
  MeritFigures m = merit_figures(stats);
  bool p_ok = std::abs(m.P - 0.41) <= 0.04;
  bool f_ok = std::abs(m.F_model - 0.91) <= 0.04;
  bool s_ok = m.S_fixed >= 2.45 && m.S_fixed <= 2.80 && m.S_opt >= 2.45 && m.S_opt <= 2.80;
  report(5, p_ok && f_ok && s_ok,
         fmt("published operating point: P=%.4f+-%.4f (0.41+-0.04 %s), "
             "F_model=%.4f+-%.4f (0.91+-0.04 %s), S_fixed=%.4f S_opt=%.4f "
             "(both in [2.45,2.80] %s)",
             m.P, m.se_P, p_ok ? "ok" : "OUT", m.F_model, m.se_F_model,
             f_ok ? "ok" : "OUT", m.S_fixed, m.S_opt, s_ok ? "ok" : "OUT"));
}

void criterion6() {
  std::vector<double> grid{0.01, 0.05, 0.1, 0.2};
  ModelParams base = preset("fig4-calibrated");
  double P[4][4], se[4][4];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      ModelParams p = base;
      p.set_kappa(grid[i]);
      p.gamma = grid[j];
      auto stats = run_ensemble(p, 2500, 777, 0, EnsembleOptions{});
      Estimate e = success_probability(stats);
      P[i][j] = e.value;
      se[i][j] = e.se;
    }
  int decreasing = 0, significant = 0, flagged = 0;
  auto compare = [&](int i0, int j0, int i1, int j1) {
    double gap = P[i0][j0] - P[i1][j1];
    double comb = 2 * std::hypot(se[i0][j0], se[i1][j1]);
    if (gap > 0) ++decreasing;
    if (gap > comb) ++significant;
    else ++flagged;
  };
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j) compare(i, j, i, j + 1);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 3; ++i) compare(i, j, i + 1, j);
  report(6, decreasing == 24,
         fmt("success probability falls along both decay axes: 24/%d comparisons "
             "decreasing, %d significant at 2 s.e., %d flagged",
             decreasing, significant, flagged));
}

void criterion7() {
  auto basis = FockBasis::simulation_space();
  auto psi0 = named_state(NamedState::I, basis);
  auto eplus = named_state(NamedState::EPlus, basis);
  double d = 0.5;
  ModelParams p = preset("fig4-calibrated");
  p.delta_plus = p.delta_minus = d / 2;
  auto res = evolve(psi0, p, 0.0, p.t_exit(), 1e-3, 0);
  double p_common = std::norm(eplus.amps().dot(res.final_state()));
  p.delta_plus = d / 2;
  p.delta_minus = -d / 2;
  res = evolve(psi0, p, 0.0, p.t_exit(), 1e-3, 0);
  double p_split = std::norm(eplus.amps().dot(res.final_state()));
  double margin = p_common - p_split;
  report(7, margin > 1e-6,
         fmt("detuning asymmetry at d=0.5g: P_common=%.6f > P_split=%.6f, margin %.4f (>1e-6)",
             p_common, p_split, margin));
}

void criterion8() {
  double a1 = chsh_fixed(psi_plus_state());
  double a2 = chsh_fixed(rho_model(0.0));
  bool anchors = std::abs(a1 - 2 * std::sqrt(2.0)) < 1e-10 &&
                 std::abs(a2 - std::sqrt(2.0)) < 1e-10;
  std::mt19937 eng(4242);
  std::normal_distribution<double> nd;
  int ordered = 0;
  for (int k = 0; k < 1000; ++k) {
    Eigen::Matrix4cd a;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) a(i, j) = Complex(nd(eng), nd(eng));
    Eigen::Matrix4cd rho = a * a.adjoint();
    TwoQubitState st{rho / rho.trace()};
    if (chsh_optimal(st) >= chsh_fixed(st) - 1e-12) ++ordered;
  }
  report(8, anchors && ordered == 1000,
         fmt("CHSH anchors: fixed(psi+)=%.12f, fixed(mixture)=%.12f; optimal>=fixed "
             "on %d/1000 random states",
             a1, a2, ordered));
}

void criterion9(const char* cli) {
  if (cli) {
    namespace fs = std::filesystem;
    fs::path work = fs::temp_directory_path() / "qpair_acceptance9";
    fs::remove_all(work);
    fs::create_directories(work);
    fs::path cfg = work / "config.json";
    {
      std::ofstream f(cfg);
      f << "{\"preset\":\"optical\",\"n_traj\":2000,\"seed\":5,\"dt\":1e-3}\n";
    }
    auto run = [&](int workers, const char* sub) {
      std::ostringstream cmd;
      cmd << '"' << cli << '"' << " trajectories --config " << cfg
          << " --workers " << workers << " --out " << (work / sub)
          << " > /dev/null";
      return std::system(cmd.str().c_str());
    };
    int rc1 = run(1, "w1"), rc8 = run(8, "w8");
    auto strip = [&](const char* sub) {
      std::ifstream f(work / sub / "merit.json");
      std::ostringstream out;
      std::string line;
      while (std::getline(f, line))
        if (line.find("\"timestamp\"") == std::string::npos) out << line << '\n';
      return out.str();
    };
    std::string j1 = strip("w1"), j8 = strip("w8");
    bool pass = rc1 == 0 && rc8 == 0 && !j1.empty() && j1 == j8;
    report(9, pass,
           fmt("determinism: merit JSON for workers 1 vs 8 %s (modulo timestamp)",
               pass ? "identical" : "DIFFERS"));
  } else {
    auto p = preset("optical");
    auto s1 = run_ensemble(p, 2000, 5, 1, EnsembleOptions{});
    auto s8 = run_ensemble(p, 2000, 5, 8, EnsembleOptions{});
    MeritFigures m1 = merit_figures(s1), m8 = merit_figures(s8);
    bool pass = std::memcmp(&m1, &m8, sizeof m1) == 0;
    report(9, pass, fmt("determinism (library level): merit for workers 1 vs 8 %s",
                        pass ? "identical" : "DIFFERS"));
  }
}

}  // namespace

int main(int argc, char** argv) {
  criterion1();
  criterion2();
  criterion3();
  criteria4and10();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9(argc > 1 ? argv[1] : nullptr);
  for (int k = 1; k <= 10; ++k) std::printf("%s\n", g_lines[k].c_str());
  std::printf("%d of 10 criteria passed\n", 10 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
