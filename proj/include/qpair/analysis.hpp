#pragma once

#include <array>
#include <stdexcept>

#include "qpair/mcwf.hpp"

namespace qpair {

struct ClassificationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PostSelectionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Detection outcomes for one atom transit. The first three are per-trajectory
// click patterns; the coincidence mass is split into the last two at ensemble
// level, entangled := P and separable := p_2ph - P, since entanglement is not
// a per-trajectory click observable.
enum class EventClass : int {
  NoPhoton = 0,
  OnePhoton = 1,
  TwoSameCavity = 2,
  TwoDiffSeparable = 3,
  TwoDiffEntangled = 4,
};

std::string to_string(EventClass c);

// Two polarization qubits: qubit i is |0> when cavity i holds a sigma+
// photon, |1> when sigma-. Basis order 00, 01, 10, 11.
struct TwoQubitState {
  Eigen::Matrix4cd rho;

  double trace() const { return rho.trace().real(); }
  // Throws std::invalid_argument unless Hermitian, unit trace, positive
  // within 1e-8.
  void validate() const;
};

// The maximally entangled target (|01> + |10>)/sqrt(2) as a pure state.
TwoQubitState psi_plus_state();
// Interpolation between the target and the equal classical mixture:
// alpha |psi+><psi+| + (1 - alpha) diag(0, 1/2, 1/2, 0).
TwoQubitState rho_model(double alpha);

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

// Mean over trajectories of |<E+|psi(t_exit)>|^2, with sample standard error.
Estimate success_probability(const EnsembleStats& stats);

// Probability of detecting one photon from each cavity (clicks over the full
// window, residual intracavity photons assigned projectively), with binomial
// standard error.
Estimate coincidence_probability(const EnsembleStats& stats);

// Mean population of the coincidence subspace {atom ground, one photon in
// each cavity} at t_exit; the normalization of the reconstructed two-qubit
// state.
Estimate coincidence_exit_population(const EnsembleStats& stats);

// Ensemble masses of the five event classes, in enum order; they sum to one.
// Throws ClassificationError when photons decay (kappa > 0) but the leak-out
// window left mean residual population above 1e-3.
std::array<double, 5> classify_events(const EnsembleStats& stats);

// Average of the per-trajectory projectors onto the coincidence subspace at
// t_exit, renormalized. Throws PostSelectionError when that subspace carries
// no population.
TwoQubitState reconstruct_two_qubit(const EnsembleStats& stats);

// <E+|rho_model(alpha)|E+> = (1 + alpha)/2.
double fidelity_model(double alpha);

// 3x3 correlation tensor T_uv = tr(rho sigma_u x sigma_v), u, v in {x, y, z}.
Eigen::Matrix3d correlation_tensor(const TwoQubitState& rho);

// CHSH value at the canonical settings optimal for |psi+>: first party along
// z and x, second along (z + x)/sqrt(2) and (x - z)/sqrt(2), signs chosen so
// |psi+> scores +2 sqrt(2). Equals sqrt(2) (1 + alpha) on rho_model(alpha).
double chsh_fixed(const TwoQubitState& rho);

// Horodecki bound 2 sqrt(m1 + m2), m1 >= m2 the largest eigenvalues of T^T T;
// the maximum of CHSH over all measurement settings.
double chsh_optimal(const TwoQubitState& rho);

// Figures of merit for one ensemble. alpha = P / p_2ph with the click-based
// p_2ph; F_model uses the rho_model ansatz, F_direct the reconstructed
// coincidence block; both CHSH estimators are evaluated on rho_model(alpha).
// Standard errors propagate by the delta method.
struct MeritFigures {
  std::int64_t n = 0;
  double P = 0.0, se_P = 0.0;
  double p2ph = 0.0, se_p2ph = 0.0;
  double alpha = 0.0, se_alpha = 0.0;
  double F_model = 0.0, se_F_model = 0.0;
  double F_direct = 0.0, se_F_direct = 0.0;
  double S_fixed = 0.0, se_S_fixed = 0.0;
  double S_opt = 0.0, se_S_opt = 0.0;
  double p2ph_exit = 0.0;  // diagnostic: coincidence population at t_exit
};

MeritFigures merit_figures(const EnsembleStats& stats);

}  // namespace qpair
