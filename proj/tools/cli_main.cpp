#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qpair/analysis.hpp"
#include "qpair/lindblad.hpp"

using json = nlohmann::ordered_json;
using namespace qpair;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr double kPi = 3.14159265358979323846;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string preset = "fig4";
  json params_patch = json::object();
  std::int64_t n_traj = 10000;
  std::uint64_t seed = 12345;
  int workers = 1;
  double dt = 1e-3;
  bool leak_out = true;
  double leak_window = -1.0;
  int snapshot_stride = 10;
  std::string out = ".";
  json extra = json::object();  // command-specific sections of the config
};

json params_to_json(const ModelParams& p) {
  return json{{"g", p.g},
              {"amp1", p.amp1},
              {"amp2", p.amp2},
              {"delta_plus", p.delta_plus},
              {"delta_minus", p.delta_minus},
              {"t1", p.t1},
              {"t_flight", p.t_flight},
              {"t2", p.t2},
              {"tau1", p.tau1},
              {"tau2", p.tau2},
              {"pulse_shape", to_string(p.pulse_shape)},
              {"kappa", p.kappa},
              {"gamma", p.gamma},
              {"n_max", p.n_max}};
}

void apply_params_patch(ModelParams& p, const json& patch) {
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    if (k == "g") p.g = v.get<double>();
    else if (k == "amp1") p.amp1 = v.get<double>();
    else if (k == "amp2") p.amp2 = v.get<double>();
    else if (k == "delta_plus") p.delta_plus = v.get<double>();
    else if (k == "delta_minus") p.delta_minus = v.get<double>();
    else if (k == "t1") p.t1 = v.get<double>();
    else if (k == "t_flight") p.t_flight = v.get<double>();
    else if (k == "t2") p.t2 = v.get<double>();
    else if (k == "tau1") p.tau1 = v.get<double>();
    else if (k == "tau2") p.tau2 = v.get<double>();
    else if (k == "gamma") p.gamma = v.get<double>();
    else if (k == "n_max") p.n_max = v.get<int>();
    else if (k == "pulse_shape") {
      std::string s = v.get<std::string>();
      if (s == "gaussian") p.pulse_shape = PulseShape::gaussian;
      else if (s == "square") p.pulse_shape = PulseShape::square;
      else throw UsageError("unknown pulse_shape: " + s);
    } else if (k == "kappa") {
      if (v.is_number()) p.set_kappa(v.get<double>());
      else if (v.is_array() && v.size() == kNumModes)
        for (int m = 0; m < kNumModes; ++m) p.kappa[m] = v[m].get<double>();
      else throw UsageError("kappa must be a number or an array of 4");
    } else {
      throw UsageError("unknown params field: " + k);
    }
  }
}

ModelParams resolve_params(const RunConfig& cfg) {
  ModelParams p = preset(cfg.preset);
  apply_params_patch(p, cfg.params_patch);
  p.validate();
  return p;
}

json resolved_config_json(const RunConfig& cfg, const ModelParams& p) {
  json j;
  j["version"] = kVersion;
  j["preset"] = cfg.preset;
  j["params"] = params_to_json(p);
  j["n_traj"] = cfg.n_traj;
  j["seed"] = cfg.seed;
  // Worker count is an execution detail with no effect on any number in the
  // output, so it is not part of the provenance record.
  j["dt"] = cfg.dt;
  j["leak_out"] = cfg.leak_out;
  j["leak_window"] = cfg.leak_window;
  j["snapshot_stride"] = cfg.snapshot_stride;
  j["seed_stream"] = kSeedStreamDescription;
  if (!cfg.extra.empty()) j["extra"] = cfg.extra;
  return j;
}

std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const json& provenance,
            const std::vector<std::string>& columns)
      : f_(std::fopen(path.string().c_str(), "wb")) {
    if (!f_) throw UsageError("cannot open output file: " + path.string());
    std::fprintf(f_, "# provenance: %s\n", provenance.dump().c_str());
    for (size_t i = 0; i < columns.size(); ++i)
      std::fprintf(f_, "%s%s", columns[i].c_str(),
                   i + 1 < columns.size() ? "," : "\r\n");
    ncols_ = static_cast<int>(columns.size());
  }
  ~CsvWriter() {
    if (f_) std::fclose(f_);
  }

  void row(const std::vector<double>& values) {
    for (size_t i = 0; i < values.size(); ++i)
      std::fprintf(f_, "%.17g%s", values[i], i + 1 < values.size() ? "," : "\r\n");
  }
  void row_mixed(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i)
      std::fprintf(f_, "%s%s", cells[i].c_str(), i + 1 < cells.size() ? "," : "\r\n");
  }

 private:
  std::FILE* f_;
  int ncols_ = 0;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot open output file: " + path.string());
  f << j.dump(2) << "\n";
}

json merit_to_json(const MeritFigures& m) {
  return json{{"n", m.n},
              {"P", m.P},
              {"se_P", m.se_P},
              {"p2ph", m.p2ph},
              {"se_p2ph", m.se_p2ph},
              {"alpha", m.alpha},
              {"se_alpha", m.se_alpha},
              {"F_model", m.F_model},
              {"se_F_model", m.se_F_model},
              {"F_direct", m.F_direct},
              {"se_F_direct", m.se_F_direct},
              {"S_fixed", m.S_fixed},
              {"se_S_fixed", m.se_S_fixed},
              {"S_opt", m.S_opt},
              {"se_S_opt", m.se_S_opt},
              {"p2ph_exit", m.p2ph_exit}};
}

std::filesystem::path out_dir(const RunConfig& cfg) {
  std::filesystem::path d(cfg.out);
  std::filesystem::create_directories(d);
  return d;
}

EnsembleOptions ensemble_options(const RunConfig& cfg, int stride = 0) {
  EnsembleOptions opts;
  opts.dt = cfg.dt;
  opts.leak_out = cfg.leak_out;
  opts.leak_window = cfg.leak_window;
  opts.snapshot_stride = stride;
  return opts;
}

int cmd_coherent(const RunConfig& cfg) {
  ModelParams p = resolve_params(cfg);
  auto basis = FockBasis::simulation_space(p.n_max);
  auto psi0 = named_state(NamedState::I, basis);
  int stride = std::max(1, cfg.snapshot_stride);
  auto res = evolve(psi0, p, 0.0, p.t_exit(), cfg.dt, stride);

  auto named = all_named_states(basis);
  CsvWriter csv(out_dir(cfg) / "coherent.csv", resolved_config_json(cfg, p),
                {"g_t", "pop_I", "pop_B", "pop_D", "pop_Eplus", "pop_Eminus",
                 "g1_of_t", "g2_of_t"});
  for (size_t k = 0; k < res.times.size(); ++k) {
    double t = res.times[k];
    std::vector<double> row{t * p.g};
    for (const StateVector& phi : named)
      row.push_back(std::norm(phi.amps().dot(res.snapshots[k])));
    row.push_back(coupling(1, t, p));
    row.push_back(coupling(2, t, p));
    csv.row(row);
  }
  std::printf("coherent: %zu rows -> coherent.csv\n", res.times.size());
  return 0;
}

int cmd_trajectories(const RunConfig& cfg) {
  ModelParams p = resolve_params(cfg);
  auto stats = run_ensemble(p, cfg.n_traj, cfg.seed, cfg.workers,
                            ensemble_options(cfg, std::max(1, cfg.snapshot_stride)));

  json prov = resolved_config_json(cfg, p);
  CsvWriter csv(out_dir(cfg) / "manifolds.csv", prov,
                {"g_t", "pop_xi2", "pop_xi1_plus", "pop_xi1_minus", "pop_xi0",
                 "se_xi2", "se_xi1_plus", "se_xi1_minus", "se_xi0"});
  double n = static_cast<double>(stats.n);
  for (size_t k = 0; k < stats.series.times.size(); ++k) {
    std::vector<double> row{stats.series.times[k] * p.g};
    for (int c = 0; c < 4; ++c) row.push_back(stats.series.sum(k, c) / n);
    for (int c = 0; c < 4; ++c) {
      double var = (stats.series.sumsq(k, c) -
                    stats.series.sum(k, c) * stats.series.sum(k, c) / n) /
                   std::max(n - 1, 1.0);
      row.push_back(std::sqrt(std::max(var, 0.0) / n));
    }
    csv.row(row);
  }

  MeritFigures m = merit_figures(stats);
  json out = prov;
  out["merit"] = merit_to_json(m);
  auto classes = classify_events(stats);
  json ev;
  for (int c = 0; c < 5; ++c) ev[to_string(static_cast<EventClass>(c))] = classes[c];
  out["event_classes"] = ev;
  out["timestamp"] = iso_timestamp();
  write_json(out_dir(cfg) / "merit.json", out);
  std::printf("trajectories: N=%" PRId64 " -> manifolds.csv, merit.json (P=%.4f)\n",
              stats.n, m.P);
  return 0;
}

int cmd_sweep_decay(const RunConfig& cfg) {
  ModelParams base = resolve_params(cfg);
  std::vector<double> kgrid{0.01, 0.05, 0.1, 0.2}, ggrid{0.01, 0.05, 0.1, 0.2};
  if (cfg.extra.contains("kappa_grid")) kgrid = cfg.extra["kappa_grid"].get<std::vector<double>>();
  if (cfg.extra.contains("gamma_grid")) ggrid = cfg.extra["gamma_grid"].get<std::vector<double>>();

  CsvWriter csv(out_dir(cfg) / "sweep_decay.csv", resolved_config_json(cfg, base),
                {"kappa_over_g", "gamma_over_g", "P", "F_model", "F_direct",
                 "S_fixed", "S_opt", "se_P"});
  for (double kap : kgrid)
    for (double gam : ggrid) {
      ModelParams p = base;
      p.set_kappa(kap);
      p.gamma = gam;
      auto stats = run_ensemble(p, cfg.n_traj, cfg.seed, cfg.workers,
                                ensemble_options(cfg));
      MeritFigures m = merit_figures(stats);
      csv.row({kap, gam, m.P, m.F_model, m.F_direct, m.S_fixed, m.S_opt, m.se_P});
      std::printf("sweep-decay: kappa=%g gamma=%g P=%.4f\n", kap, gam, m.P);
    }
  return 0;
}

int cmd_sweep_detuning(const RunConfig& cfg) {
  ModelParams base = resolve_params(cfg);
  std::string mode = cfg.extra.value("mode", "delta");

  bool closed = base.gamma == 0.0 && base.max_kappa() == 0.0;
  auto basis = FockBasis::simulation_space(base.n_max);
  auto psi0 = named_state(NamedState::I, basis);
  auto eplus = named_state(NamedState::EPlus, basis);

  auto point = [&](ModelParams p) -> Estimate {
    if (closed) {
      auto res = evolve(psi0, p, 0.0, p.t_exit(), cfg.dt, 0);
      return {std::norm(eplus.amps().dot(res.final_state())), 0.0};
    }
    auto stats = run_ensemble(p, cfg.n_traj, cfg.seed, cfg.workers,
                              ensemble_options(cfg));
    return success_probability(stats);
  };

  json prov = resolved_config_json(cfg, base);
  if (mode == "delta") {
    std::vector<double> dgrid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
    if (cfg.extra.contains("d_grid")) dgrid = cfg.extra["d_grid"].get<std::vector<double>>();
    CsvWriter csv(out_dir(cfg) / "sweep_detuning.csv", prov,
                  {"d_over_g", "mode", "delta_plus_over_g", "delta_minus_over_g",
                   "P", "se_P"});
    for (double d : dgrid)
      for (const char* kind : {"common", "split"}) {
        ModelParams p = base;
        if (std::string(kind) == "common") {
          p.delta_plus = p.delta_minus = d / 2;
        } else {
          p.delta_plus = d / 2;
          p.delta_minus = -d / 2;
        }
        Estimate e = point(p);
        csv.row_mixed({fmt(d), kind, fmt(p.delta_plus), fmt(p.delta_minus),
                       fmt(e.value), fmt(e.se)});
      }
    std::printf("sweep-detuning: %zu d values -> sweep_detuning.csv\n", dgrid.size());
  } else if (mode == "field") {
    if (!cfg.extra.contains("b_grid_tesla") || !cfg.extra.contains("g_rad_per_s"))
      throw UsageError("field mode needs b_grid_tesla and g_rad_per_s");
    auto bgrid = cfg.extra["b_grid_tesla"].get<std::vector<double>>();
    double g_phys = cfg.extra["g_rad_per_s"].get<double>();
    double g_j = cfg.extra.value("g_j", 1.5);
    CsvWriter csv(out_dir(cfg) / "sweep_detuning.csv", prov,
                  {"B_tesla", "delta_plus_over_g", "delta_minus_over_g", "P", "se_P"});
    for (double b : bgrid) {
      auto [dp, dm] = detunings_from_field(b, g_j);
      ModelParams p = base;
      p.delta_plus = dp / g_phys;
      p.delta_minus = dm / g_phys;
      Estimate e = point(p);
      csv.row({b, p.delta_plus, p.delta_minus, e.value, e.se});
    }
    std::printf("sweep-detuning: %zu field values -> sweep_detuning.csv\n", bgrid.size());
  } else {
    throw UsageError("unknown detuning mode: " + mode);
  }
  return 0;
}

int cmd_calibrate(const RunConfig& cfg) {
  ModelParams p = resolve_params(cfg);
  std::string mode_name = cfg.extra.value("mode", "amplitude");
  CalibrationMode mode;
  if (mode_name == "amplitude") mode = CalibrationMode::amplitude;
  else if (mode_name == "width") mode = CalibrationMode::width;
  else throw UsageError("unknown calibration mode: " + mode_name);
  double target = cfg.extra.value("target_area", kPi);

  json report = resolved_config_json(cfg, p);
  report["calibration"] = json::object();
  for (int cavity : {1, 2}) {
    double before = pulse_area(p, cavity);
    p = calibrate_pulse(p, cavity, mode, target);
    json entry{{"area_before", before},
               {"area_after", pulse_area(p, cavity)},
               {"amp", p.amplitude(cavity)},
               {"tau", cavity == 1 ? p.tau1 : p.tau2},
               {"window", cavity == 1 ? p.t1 : p.t2}};
    report["calibration"][cavity == 1 ? "cavity1" : "cavity2"] = entry;
  }
  report["params_calibrated"] = params_to_json(p);
  report["timestamp"] = iso_timestamp();
  write_json(out_dir(cfg) / "calibration.json", report);
  std::printf("calibrate: mode=%s amp1=%.6f amp2=%.6f tau1=%.6f tau2=%.6f\n",
              mode_name.c_str(), p.amp1, p.amp2, p.tau1, p.tau2);
  return 0;
}

int cmd_oracle_check(const RunConfig& cfg) {
  ModelParams p = resolve_params(cfg);
  auto basis = FockBasis::simulation_space(p.n_max);
  auto psi0 = named_state(NamedState::I, basis);

  EnsembleOptions opts = ensemble_options(cfg);
  opts.leak_out = false;  // compare at t_exit on the same footing
  auto stats = run_ensemble(p, cfg.n_traj, cfg.seed, cfg.workers, opts);
  auto dres = evolve_density(DensityMatrix::pure(psi0), p, p.t_exit(), cfg.dt, 0);
  Eigen::VectorXd diag = dres.final_state().diagonal();

  double n = static_cast<double>(stats.n);
  bool pass = true;
  json rows = json::array();
  std::printf("%-22s %12s %12s %10s %8s\n", "state", "mcwf", "oracle", "se", "z");
  for (int i = 0; i < basis->dim(); ++i) {
    double mean = stats.exit_pop_sum(i) / n;
    double var = (stats.exit_pop_sumsq(i) - stats.exit_pop_sum(i) * stats.exit_pop_sum(i) / n) /
                 std::max(n - 1, 1.0);
    double se = std::sqrt(std::max(var, 0.0) / n);
    // Degenerate estimator (all samples equal): fall back to the binomial
    // deviation implied by the oracle value so exact or near-exact agreement
    // yields a small z rather than 0/0.
    double q = std::max(mean * (1 - mean), diag(i) * (1 - diag(i)));
    double floor = std::sqrt(std::max(q, 1e-12) / n);
    double z = (mean - diag(i)) / std::max(se, floor);
    pass = pass && std::abs(z) <= 3.0;
    std::printf("%-22s %12.6f %12.6f %10.2e %8.2f\n",
                to_string(basis->state(i)).c_str(), mean, diag(i), se, z);
    rows.push_back(json{{"state", to_string(basis->state(i))},
                        {"mcwf", mean},
                        {"oracle", diag(i)},
                        {"se", se},
                        {"z", z}});
  }
  json report = resolved_config_json(cfg, p);
  report["comparison"] = rows;
  report["trace_drift"] = dres.max_trace_drift;
  report["pass"] = pass;
  report["timestamp"] = iso_timestamp();
  write_json(out_dir(cfg) / "oracle_check.json", report);
  std::printf("oracle-check: %s (trace drift %.2e)\n", pass ? "PASS" : "FAIL",
              dres.max_trace_drift);
  return pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entangled-photon-pair source simulator: coherent dynamics, "
               "quantum-jump trajectories, and figures of merit"};
  app.require_subcommand(1);

  std::string config_path, preset_flag, out_flag;
  std::int64_t n_traj_flag = -1;
  std::int64_t seed_flag = -1;
  int workers_flag = 0;
  double dt_flag = 0.0;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--preset", preset_flag, "parameter preset name");
  app.add_option("--n-traj", n_traj_flag, "trajectory count");
  app.add_option("--seed", seed_flag, "master seed");
  app.add_option("--workers", workers_flag, "worker thread count");
  app.add_option("--dt", dt_flag, "integration step in 1/g");
  app.add_option("--out", out_flag, "output directory");

  auto* c_coherent = app.add_subcommand("coherent", "closed-system population curves");
  auto* c_traj = app.add_subcommand("trajectories", "quantum-jump ensemble with manifold series");
  auto* c_sdecay = app.add_subcommand("sweep-decay", "merit grid over kappa and gamma");
  auto* c_sdet = app.add_subcommand("sweep-detuning", "success probability over detunings or field");
  auto* c_cal = app.add_subcommand("calibrate", "solve pulse knobs for area pi");
  auto* c_oracle = app.add_subcommand("oracle-check", "trajectory ensemble vs master equation");
  // Global flags live on the root app; let them be given after the subcommand.
  for (CLI::App* sub : {c_coherent, c_traj, c_sdecay, c_sdet, c_cal, c_oracle})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw UsageError("cannot read config: " + config_path);
      json j = json::parse(f);
      cfg.preset = j.value("preset", cfg.preset);
      if (j.contains("params")) cfg.params_patch = j["params"];
      cfg.n_traj = j.value("n_traj", cfg.n_traj);
      cfg.seed = j.value("seed", cfg.seed);
      cfg.workers = j.value("workers", cfg.workers);
      cfg.dt = j.value("dt", cfg.dt);
      cfg.leak_out = j.value("leak_out", cfg.leak_out);
      cfg.leak_window = j.value("leak_window", cfg.leak_window);
      cfg.snapshot_stride = j.value("snapshot_stride", cfg.snapshot_stride);
      cfg.out = j.value("out", cfg.out);
      if (j.contains("extra")) cfg.extra = j["extra"];
    }
    if (!preset_flag.empty()) cfg.preset = preset_flag;
    if (n_traj_flag >= 0) cfg.n_traj = n_traj_flag;
    if (seed_flag >= 0) cfg.seed = static_cast<std::uint64_t>(seed_flag);
    if (workers_flag > 0) cfg.workers = workers_flag;
    if (dt_flag > 0) cfg.dt = dt_flag;
    if (!out_flag.empty()) cfg.out = out_flag;
    if (cfg.n_traj < 1) throw UsageError("n_traj must be >= 1");
    if (cfg.dt <= 0) throw UsageError("dt must be positive");

    if (c_coherent->parsed()) return cmd_coherent(cfg);
    if (c_traj->parsed()) return cmd_trajectories(cfg);
    if (c_sdecay->parsed()) return cmd_sweep_decay(cfg);
    if (c_sdet->parsed()) return cmd_sweep_detuning(cfg);
    if (c_cal->parsed()) return cmd_calibrate(cfg);
    if (c_oracle->parsed()) return cmd_oracle_check(cfg);
    return 1;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 2;
  }
}
