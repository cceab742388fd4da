#pragma once

#include <array>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "qpair/fock_space.hpp"

namespace qpair {

enum class PulseShape { gaussian, square };

std::string to_string(PulseShape s);

// All physical knobs, expressed in units of the peak vacuum Rabi frequency g
// (rates in g, durations in 1/g). g itself is kept only for conversions to
// physical units.
struct ModelParams {
  double g = 1.0;          // peak vacuum Rabi frequency, the unit frequency
  double amp1 = 1.0;       // per-cavity peak multipliers (pulse calibration)
  double amp2 = 1.0;
  double delta_plus = 0.0;   // omega_c - omega_ac
  double delta_minus = 0.0;  // omega_c - omega_bc
  double t1 = 1.110;         // interaction window, cavity 1
  double t_flight = 0.111;   // free flight between the cavities
  double t2 = 1.570;         // interaction window, cavity 2
  double tau1 = 0.255;       // gaussian widths
  double tau2 = 0.448;
  PulseShape pulse_shape = PulseShape::gaussian;
  std::array<double, kNumModes> kappa{0, 0, 0, 0};  // field decay rates, mode order (1+,1-,2+,2-)
  double gamma = 0.0;        // atomic decay rate per transition
  int n_max = 2;

  // Detector efficiency is fixed: every photon leaving a mirror is detected.
  static constexpr double kDetectorEfficiency = 1.0;

  double pulse_center(int cavity) const {
    return cavity == 1 ? t1 / 2.0 : t2 / 2.0 + t_flight + t1;
  }
  double window_start(int cavity) const { return cavity == 1 ? 0.0 : t1 + t_flight; }
  double window_end(int cavity) const {
    return cavity == 1 ? t1 : t1 + t_flight + t2;
  }
  double window_length(int cavity) const { return cavity == 1 ? t1 : t2; }
  double amplitude(int cavity) const { return cavity == 1 ? amp1 : amp2; }
  // Time at which the atom leaves cavity 2; merit figures are taken here.
  double t_exit() const { return t1 + t_flight + t2; }

  void set_kappa(double k) { kappa = {k, k, k, k}; }
  double max_kappa() const;
  double min_kappa() const;

  // Throws std::invalid_argument on negative rates/durations or g <= 0.
  void validate() const;
};

// Pulse profile of cavity i at time t, in units of g. Gaussian profiles are
// not truncated to their windows; square pulses vanish outside them.
double coupling(int cavity, double t, const ModelParams& p);

// sqrt((2 g_i sqrt(n+1))^2 + delta^2)
double generalized_rabi(double g_i, int n, double delta);

// Zeeman splitting of the excited levels: Delta+- = +-mu_B g_J B / hbar,
// in rad/s. Divide by a physical g (rad/s) to get simulation units.
std::pair<double, double> detunings_from_field(double b_tesla, double g_j = 1.5);

enum class JumpChannelId : int {
  cavity1_plus = 0,
  cavity1_minus = 1,
  cavity2_plus = 2,
  cavity2_minus = 3,
  atom_plus = 4,
  atom_minus = 5,
};
constexpr int kNumChannels = 6;

std::string to_string(JumpChannelId id);
bool is_cavity_channel(JumpChannelId id);
// 1 or 2 for cavity channels, 0 for atomic ones.
int channel_cavity(JumpChannelId id);

struct JumpChannel {
  JumpChannelId id;
  Matrix op;  // sqrt(rate) * lowering operator
};

// Hermitian interaction-picture Hamiltonian at time t. Only the detunings
// enter; absolute optical frequencies never appear.
Matrix build_hamiltonian(double t, const FockBasis& basis, const ModelParams& p);
// H - (i/2) sum_m C_m^dag C_m. Anti-Hermitian part is diagonal and
// negative semidefinite.
Matrix build_effective_hamiltonian(double t, const FockBasis& basis,
                                   const ModelParams& p);
// The six decay channels: four mirror channels at sqrt(kappa_i+-) a_i+- and
// two spontaneous-emission channels at sqrt(Gamma) S+-.
std::vector<JumpChannel> jump_operators(const FockBasis& basis, const ModelParams& p);

// Precomputed sparse form of the same Hamiltonian for the integrators; the
// dense builders above are thin wrappers around it. Immutable after
// construction, safe to share across trajectory workers.
class HamiltonianApplier {
 public:
  HamiltonianApplier(BasisPtr basis, const ModelParams& p, bool effective);

  const BasisPtr& basis() const { return basis_; }
  const ModelParams& params() const { return params_; }
  bool effective() const { return effective_; }
  int dim() const { return basis_->dim(); }

  // y = H(t) x
  void apply(double t, const Vector& x, Vector& y) const;
  Matrix matrix(double t) const;

  // Per-channel decay rates <x|C_m^dag C_m|x> and their sum.
  void channel_rates(const Vector& x, std::array<double, kNumChannels>& rates) const;
  double total_rate(const Vector& x) const;
  // Largest possible total rate over normalized basis states; bounds the
  // stable step size during photon leak-out.
  double max_total_rate() const;

  // x -> C_m x (unnormalized).
  void apply_jump(JumpChannelId id, const Vector& x, Vector& y) const;

 private:
  struct Entry {
    int row, col;
    double val;
  };

  BasisPtr basis_;
  ModelParams params_;
  bool effective_;
  // Interaction terms S+^dag a_{1+}, S-^dag a_{1-}, S+^dag a_{2+}, S-^dag a_{2-}.
  std::array<std::vector<Entry>, 4> terms_;
  // Channel lowering maps and per-state rate diagonals.
  std::array<std::vector<Entry>, kNumChannels> channel_maps_;
  std::array<Eigen::VectorXd, kNumChannels> channel_diag_;
  Eigen::VectorXd decay_diag_;  // sum over channels
};

// Named parameter presets:
//   "fig4"            gaussian pulses with the published widths at peak g
//   "fig4-calibrated" same timings, peak amplitudes raised to pulse area pi
//   "fig4-square"     square pulses, t1 = pi/(2 sqrt 2), t2 = pi/2
//   "fig6a"           calibrated pulses, Gamma = 0.05 g, kappa = 0.1 Gamma
//   "fig6b"           calibrated pulses, kappa = 0.03 g, Gamma = 0.1 kappa
//   "optical"         calibrated pulses, kappa = 0.053 g, Gamma = 0.08 g
ModelParams preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace qpair
