#include "qpair/analysis.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace qpair {

namespace {
constexpr double kSqrt2 = 1.41421356237309504880;

Eigen::Matrix2cd pauli(int u) {
  Eigen::Matrix2cd m;
  switch (u) {
    case 0: m << 0, 1, 1, 0; break;                              // x
    case 1: m << 0, Complex(0, -1), Complex(0, 1), 0; break;     // y
    default: m << 1, 0, 0, -1; break;                            // z
  }
  return m;
}

Eigen::Vector4cd psi_plus_vec() {
  Eigen::Vector4cd v;
  v << 0, 1 / kSqrt2, 1 / kSqrt2, 0;
  return v;
}

// Sample variance from sums; zero for n < 2.
double variance(double sum, double sumsq, std::int64_t n) {
  if (n < 2) return 0.0;
  double v = (sumsq - sum * sum / n) / (n - 1);
  return std::max(v, 0.0);
}
}  // namespace

std::string to_string(EventClass c) {
  switch (c) {
    case EventClass::NoPhoton: return "no_photon";
    case EventClass::OnePhoton: return "one_photon";
    case EventClass::TwoSameCavity: return "two_same_cavity";
    case EventClass::TwoDiffSeparable: return "two_diff_separable";
    case EventClass::TwoDiffEntangled: return "two_diff_entangled";
  }
  return "?";
}

void TwoQubitState::validate() const {
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-8)
    throw std::invalid_argument("TwoQubitState: not Hermitian");
  if (std::abs(trace() - 1.0) > 1e-8)
    throw std::invalid_argument("TwoQubitState: trace differs from one");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(0.5 * (rho + rho.adjoint()));
  if (es.eigenvalues().minCoeff() < -1e-8)
    throw std::invalid_argument("TwoQubitState: negative eigenvalue");
}

TwoQubitState psi_plus_state() {
  Eigen::Vector4cd v = psi_plus_vec();
  return {v * v.adjoint()};
}

TwoQubitState rho_model(double alpha) {
  Eigen::Vector4cd v = psi_plus_vec();
  Eigen::Matrix4cd mix = Eigen::Matrix4cd::Zero();
  mix(1, 1) = 0.5;
  mix(2, 2) = 0.5;
  return {alpha * (v * v.adjoint()) + (1.0 - alpha) * mix};
}

Estimate success_probability(const EnsembleStats& stats) {
  if (stats.n < 1) throw std::invalid_argument("empty ensemble");
  double n = static_cast<double>(stats.n);
  double mean = stats.sum_eplus / n;
  double var = variance(stats.sum_eplus, stats.sumsq_eplus, stats.n);
  return {mean, std::sqrt(var / n)};
}

Estimate coincidence_probability(const EnsembleStats& stats) {
  if (stats.n < 1) throw std::invalid_argument("empty ensemble");
  double n = static_cast<double>(stats.n);
  double p = stats.click_counts[static_cast<int>(ClickPattern::coincidence)] / n;
  return {p, std::sqrt(p * (1.0 - p) / n)};
}

Estimate coincidence_exit_population(const EnsembleStats& stats) {
  if (stats.n < 1) throw std::invalid_argument("empty ensemble");
  double n = static_cast<double>(stats.n);
  double mean = stats.sum_p2_exit / n;
  double var = variance(stats.sum_p2_exit, stats.sumsq_p2_exit, stats.n);
  return {mean, std::sqrt(var / n)};
}

std::array<double, 5> classify_events(const EnsembleStats& stats) {
  if (stats.n < 1) throw std::invalid_argument("empty ensemble");
  double n = static_cast<double>(stats.n);
  if (stats.max_kappa > 0.0) {
    // Precondition: the window must be long enough that photons have left the
    // cavities. The bound is on the ensemble-averaged residual; the per-seed
    // sample mean has a heavy tail (a renormalized no-jump survivor carries a
    // whole photon or two), so it is only used as a gross sanity check.
    double bound = 2.0 * std::exp(-stats.min_kappa * stats.leak_window);
    if (bound > 1e-3 || stats.residual_photon_sum / n > 0.05)
      throw ClassificationError(
          "classify_events: residual photon population bound " +
          std::to_string(bound) + " (sample mean " +
          std::to_string(stats.residual_photon_sum / n) +
          "); extend the leak-out window");
  }
  double p_coinc = stats.click_counts[static_cast<int>(ClickPattern::coincidence)] / n;
  double p_succ = stats.sum_eplus / n;
  std::array<double, 5> mass{};
  mass[0] = stats.click_counts[static_cast<int>(ClickPattern::none)] / n;
  mass[1] = stats.click_counts[static_cast<int>(ClickPattern::single)] / n;
  mass[2] = stats.click_counts[static_cast<int>(ClickPattern::same_cavity)] / n;
  mass[4] = std::min(p_succ, p_coinc);
  mass[3] = p_coinc - mass[4];
  return mass;
}

TwoQubitState reconstruct_two_qubit(const EnsembleStats& stats) {
  if (stats.n < 1) throw std::invalid_argument("empty ensemble");
  Eigen::Matrix2cd block = stats.coincidence_block / static_cast<double>(stats.n);
  double norm = block.trace().real();
  if (norm <= 0.0)
    throw PostSelectionError("reconstruct_two_qubit: no coincidence population");
  block /= norm;
  TwoQubitState out{Eigen::Matrix4cd::Zero()};
  // The coincidence subspace maps to qubit states |01> and |10>.
  out.rho(1, 1) = block(0, 0);
  out.rho(1, 2) = block(0, 1);
  out.rho(2, 1) = block(1, 0);
  out.rho(2, 2) = block(1, 1);
  return out;
}

double fidelity_model(double alpha) {
  if (alpha < -1e-12 || alpha > 1.0 + 1e-9)
    throw std::invalid_argument("fidelity_model: alpha outside [0, 1]");
  return (1.0 + alpha) / 2.0;
}

Eigen::Matrix3d correlation_tensor(const TwoQubitState& rho) {
  Eigen::Matrix3d t;
  for (int u = 0; u < 3; ++u)
    for (int v = 0; v < 3; ++v) {
      Eigen::Matrix4cd op = Eigen::Matrix4cd::Zero();
      // Kronecker product sigma_u x sigma_v.
      Eigen::Matrix2cd su = pauli(u), sv = pauli(v);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          op.block<2, 2>(2 * i, 2 * j) = su(i, j) * sv;
      t(u, v) = (rho.rho * op).trace().real();
    }
  return t;
}

double chsh_fixed(const TwoQubitState& rho) {
  Eigen::Matrix3d t = correlation_tensor(rho);
  Eigen::Vector3d z(0, 0, 1), x(1, 0, 0);
  Eigen::Vector3d b1 = (z + x) / kSqrt2, b2 = (x - z) / kSqrt2;
  auto corr = [&](const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    return a.dot(t * b);
  };
  return -corr(z, b1) + corr(z, b2) + corr(x, b1) + corr(x, b2);
}

double chsh_optimal(const TwoQubitState& rho) {
  Eigen::Matrix3d t = correlation_tensor(rho);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(t.transpose() * t);
  Eigen::Vector3d ev = es.eigenvalues();  // ascending
  return 2.0 * std::sqrt(ev(2) + ev(1));
}

MeritFigures merit_figures(const EnsembleStats& stats) {
  MeritFigures m;
  m.n = stats.n;
  Estimate p = success_probability(stats);
  Estimate p2 = coincidence_probability(stats);
  Estimate p2x = coincidence_exit_population(stats);
  m.P = p.value;
  m.se_P = p.se;
  m.p2ph = p2.value;
  m.se_p2ph = p2.se;
  m.p2ph_exit = p2x.value;

  if (m.p2ph > 0.0) {
    m.alpha = std::clamp(m.P / m.p2ph, 0.0, 1.0);
    // Delta method for the ratio, correlations neglected.
    m.se_alpha = std::hypot(m.se_P / m.p2ph, m.alpha * m.se_p2ph / m.p2ph);
  }
  m.F_model = fidelity_model(m.alpha);
  m.se_F_model = m.se_alpha / 2.0;

  if (m.p2ph_exit > 0.0) {
    TwoQubitState ps = reconstruct_two_qubit(stats);
    Eigen::Vector4cd target = psi_plus_vec();
    m.F_direct = (target.adjoint() * ps.rho * target)(0).real();
    // F_direct = 1/2 + A/B with per-trajectory A = Re(a01 conj a10),
    // B = |a01|^2 + |a10|^2; delta method for the ratio of means.
    double n = static_cast<double>(stats.n);
    double mean_a = stats.sum_cross / n, mean_b = stats.sum_p2_exit / n;
    double var_a = variance(stats.sum_cross, stats.sumsq_cross, stats.n);
    double var_b = variance(stats.sum_p2_exit, stats.sumsq_p2_exit, stats.n);
    double cov = stats.n < 2 ? 0.0
                             : (stats.sum_cross_p2 -
                                stats.sum_cross * stats.sum_p2_exit / n) /
                                   (n - 1);
    double r = mean_a / mean_b;
    double v = (var_a + r * r * var_b - 2.0 * r * cov) / (mean_b * mean_b) / n;
    m.se_F_direct = std::sqrt(std::max(v, 0.0));
  }

  TwoQubitState model = rho_model(m.alpha);
  m.S_fixed = chsh_fixed(model);
  m.S_opt = chsh_optimal(model);
  m.se_S_fixed = kSqrt2 * m.se_alpha;
  // d/dalpha of 2 sqrt(1 + alpha^2).
  m.se_S_opt = 2.0 * m.alpha / std::sqrt(1.0 + m.alpha * m.alpha) * m.se_alpha;
  return m;
}

}  // namespace qpair
