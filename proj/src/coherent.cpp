#include "qpair/coherent.hpp"

#include <algorithm>
#include <cmath>

#include "integrate.hpp"

namespace qpair {

namespace {
constexpr double kPi = 3.14159265358979323846;
}  // namespace

std::vector<double> EvolutionResult::populations(const StateVector& phi) const {
  std::vector<double> out;
  out.reserve(snapshots.size());
  for (const Vector& v : snapshots) out.push_back(std::norm(phi.amps().dot(v)));
  return out;
}

EvolutionResult evolve(const StateVector& psi0, const ModelParams& p,
                       double t_start, double t_end, double dt_max,
                       int snapshot_stride) {
  p.validate();
  if (dt_max <= 0) throw std::invalid_argument("evolve: dt_max must be positive");
  if (t_end < t_start) throw std::invalid_argument("evolve: t_end < t_start");

  HamiltonianApplier h(psi0.basis(), p, false);
  Vector psi = psi0.amps();

  EvolutionResult res;
  res.basis = psi0.basis();
  res.times.push_back(t_start);
  res.snapshots.push_back(psi);

  detail::Rk4Scratch scratch(static_cast<int>(psi.size()));
  auto breaks = detail::segment_breaks(p, t_start, t_end);
  int step = 0;
  for (size_t s = 0; s + 1 < breaks.size(); ++s) {
    double a = breaks[s], b = breaks[s + 1];
    if (b <= a) continue;
    int n = std::max(1, static_cast<int>(std::ceil((b - a) / dt_max - 1e-12)));
    double dt = (b - a) / n;
    for (int k = 0; k < n; ++k) {
      detail::rk4_step(h, a + k * dt, dt, psi, scratch, a, b);
      ++step;
      if (snapshot_stride > 0 && step % snapshot_stride == 0) {
        res.times.push_back(a + (k + 1) * dt);
        res.snapshots.push_back(psi);
      }
    }
  }
  if (res.times.back() != t_end) {
    res.times.push_back(t_end);
    res.snapshots.push_back(psi);
  }

  double drift = std::abs(psi.norm() - psi0.amps().norm());
  if (!(drift < 1e-6))
    throw IntegrationError("evolve: norm drift " + std::to_string(drift) +
                           " exceeds 1e-6; reduce dt_max");
  return res;
}

std::pair<Complex, Complex> analytic_cavity1(double t, double g1, double delta) {
  double omega = std::hypot(2.0 * std::sqrt(2.0) * g1, delta);
  double half = omega * t / 2.0;
  Complex rot = std::polar(1.0, delta * t / 2.0);
  Complex amp_b = (omega == 0.0)
                      ? Complex{0.0, 0.0}
                      : Complex(0.0, -2.0 * std::sqrt(2.0) * g1 / omega) *
                            std::sin(half) / rot;
  Complex amp_i =
      rot * (Complex(std::cos(half), 0.0) -
             Complex(0.0, (omega == 0.0 ? 0.0 : delta / omega)) * std::sin(half));
  return {amp_b, amp_i};
}

std::pair<Complex, Complex> analytic_cavity2(double t_prime, double g2, double delta) {
  double omega = std::hypot(2.0 * g2, delta);
  double half = omega * t_prime / 2.0;
  Complex rot = std::polar(1.0, delta * t_prime / 2.0);
  double s = std::sin(half);
  Complex amp_e = (omega == 0.0) ? Complex{0.0, 0.0}
                                 : rot * (-2.0 * g2 / omega) * s;
  Complex amp_b =
      (Complex(0.0, -std::cos(half)) +
       Complex((omega == 0.0 ? 0.0 : delta / omega) * s, 0.0)) /
      rot;
  return {amp_e, amp_b};
}

double pulse_area(const ModelParams& p, int cavity) {
  double factor = cavity == 1 ? 2.0 * std::sqrt(2.0) : 2.0;
  double a = p.window_start(cavity), b = p.window_end(cavity);
  if (b <= a) return 0.0;
  if (p.pulse_shape == PulseShape::square)
    return factor * p.g * p.amplitude(cavity) * (b - a);
  // Composite Simpson over the window.
  const int n = 20000;  // even
  double dt = (b - a) / n;
  double sum = coupling(cavity, a, p) + coupling(cavity, b, p);
  for (int k = 1; k < n; ++k)
    sum += (k % 2 ? 4.0 : 2.0) * coupling(cavity, a + k * dt, p);
  return factor * sum * dt / 3.0;
}

ModelParams calibrate_pulse(const ModelParams& p, int cavity, CalibrationMode mode,
                            double target_area) {
  p.validate();
  if (cavity != 1 && cavity != 2) throw std::invalid_argument("calibrate_pulse: cavity");
  if (target_area <= 0) throw std::invalid_argument("calibrate_pulse: target area");

  auto with_knob = [&](double x) {
    ModelParams q = p;
    if (mode == CalibrationMode::amplitude) {
      (cavity == 1 ? q.amp1 : q.amp2) = x;
    } else if (p.pulse_shape == PulseShape::square) {
      (cavity == 1 ? q.t1 : q.t2) = x;
    } else {
      (cavity == 1 ? q.tau1 : q.tau2) = x;
    }
    return q;
  };
  auto area_at = [&](double x) { return pulse_area(with_knob(x), cavity); };

  double lo = 1e-9, hi = 1.0;
  int grow = 0;
  while (area_at(hi) < target_area) {
    hi *= 2.0;
    if (++grow > 40)
      throw CalibrationError("calibrate_pulse: cannot bracket target area " +
                             std::to_string(target_area) +
                             " (window too short for requested area)");
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (area_at(mid) < target_area)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-15 * std::max(1.0, hi)) break;
  }
  double x = 0.5 * (lo + hi);
  if (std::abs(area_at(x) - target_area) > 1e-9)
    throw CalibrationError("calibrate_pulse: did not converge to target area");
  return with_knob(x);
}

ModelParams preset(const std::string& name) {
  ModelParams p;  // defaults are the published Fig. 4 gaussian timings
  if (name == "fig4") return p;
  if (name == "fig4-calibrated" || name == "fig6a" || name == "fig6b" ||
      name == "optical") {
    p = calibrate_pulse(p, 1, CalibrationMode::amplitude);
    p = calibrate_pulse(p, 2, CalibrationMode::amplitude);
    if (name == "fig6a") {
      p.gamma = 0.05;
      p.set_kappa(0.1 * p.gamma);
    } else if (name == "fig6b") {
      p.set_kappa(0.03);
      p.gamma = 0.1 * 0.03;
    } else if (name == "optical") {
      p.set_kappa(0.053);
      p.gamma = 0.08;
    }
    return p;
  }
  if (name == "fig4-square") {
    p.pulse_shape = PulseShape::square;
    p.t1 = kPi / (2.0 * std::sqrt(2.0));
    p.t2 = kPi / 2.0;
    return p;
  }
  throw std::invalid_argument("unknown preset: " + name);
}

std::vector<std::string> preset_names() {
  return {"fig4", "fig4-calibrated", "fig4-square", "fig6a", "fig6b", "optical"};
}

}  // namespace qpair
