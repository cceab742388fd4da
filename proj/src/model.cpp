#include "qpair/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qpair {

std::string to_string(PulseShape s) {
  return s == PulseShape::gaussian ? "gaussian" : "square";
}

double ModelParams::max_kappa() const {
  return *std::max_element(kappa.begin(), kappa.end());
}

double ModelParams::min_kappa() const {
  return *std::min_element(kappa.begin(), kappa.end());
}

void ModelParams::validate() const {
  if (g < 0.0) throw std::invalid_argument("ModelParams: g must be nonnegative");
  if (amp1 < 0 || amp2 < 0) throw std::invalid_argument("ModelParams: negative amplitude");
  if (t1 < 0 || t_flight < 0 || t2 < 0)
    throw std::invalid_argument("ModelParams: negative duration");
  if (tau1 <= 0 || tau2 <= 0) throw std::invalid_argument("ModelParams: non-positive width");
  for (double k : kappa)
    if (k < 0) throw std::invalid_argument("ModelParams: negative kappa");
  if (gamma < 0) throw std::invalid_argument("ModelParams: negative Gamma");
  if (n_max < 2) throw std::invalid_argument("ModelParams: n_max must be >= 2");
}

double coupling(int cavity, double t, const ModelParams& p) {
  if (cavity != 1 && cavity != 2) throw std::invalid_argument("coupling: cavity must be 1 or 2");
  double peak = p.g * p.amplitude(cavity);
  if (p.pulse_shape == PulseShape::square) {
    return (t >= p.window_start(cavity) && t <= p.window_end(cavity)) ? peak : 0.0;
  }
  double u = (t - p.pulse_center(cavity)) / (cavity == 1 ? p.tau1 : p.tau2);
  return peak * std::exp(-u * u);
}

double generalized_rabi(double g_i, int n, double delta) {
  if (n < 0) throw std::invalid_argument("generalized_rabi: negative photon number");
  double rabi = 2.0 * g_i * std::sqrt(double(n + 1));
  return std::hypot(rabi, delta);
}

std::pair<double, double> detunings_from_field(double b_tesla, double g_j) {
  constexpr double mu_b = 9.2740100783e-24;   // J/T
  constexpr double hbar = 1.054571817e-34;    // J s
  double d = mu_b * g_j * b_tesla / hbar;     // rad/s
  return {d, -d};
}

std::string to_string(JumpChannelId id) {
  switch (id) {
    case JumpChannelId::cavity1_plus: return "a1+";
    case JumpChannelId::cavity1_minus: return "a1-";
    case JumpChannelId::cavity2_plus: return "a2+";
    case JumpChannelId::cavity2_minus: return "a2-";
    case JumpChannelId::atom_plus: return "S+";
    case JumpChannelId::atom_minus: return "S-";
  }
  return "?";
}

bool is_cavity_channel(JumpChannelId id) { return static_cast<int>(id) < 4; }

int channel_cavity(JumpChannelId id) {
  if (!is_cavity_channel(id)) return 0;
  return static_cast<int>(id) / 2 + 1;
}

HamiltonianApplier::HamiltonianApplier(BasisPtr basis, const ModelParams& p,
                                       bool effective)
    : basis_(std::move(basis)), params_(p), effective_(effective) {
  p.validate();
  const FockBasis& b = *basis_;
  int dim = b.dim();

  // Interaction terms: term k maps the basis state with one more photon in
  // mode k to the state with the matching atomic excitation instead.
  for (int k = 0; k < 4; ++k) {
    AtomLevel excited = (k % 2 == 0) ? AtomLevel::a : AtomLevel::b;
    for (int i = 0; i < dim; ++i) {
      const BasisState& s = b.state(i);
      if (s.atom != AtomLevel::c || s.n[k] == 0) continue;
      BasisState t = s;
      t.n[k] -= 1;
      t.atom = excited;
      int j = b.index_of(t);
      if (j >= 0) terms_[k].push_back({j, i, std::sqrt(double(s.n[k]))});
    }
  }

  decay_diag_ = Eigen::VectorXd::Zero(dim);
  for (int m = 0; m < kNumChannels; ++m) {
    channel_diag_[m] = Eigen::VectorXd::Zero(dim);
    auto id = static_cast<JumpChannelId>(m);
    double rate = m < 4 ? p.kappa[m] : p.gamma;
    for (int i = 0; i < dim; ++i) {
      const BasisState& s = b.state(i);
      BasisState t = s;
      double amp = 0.0;
      if (m < 4) {
        if (s.n[m] == 0) continue;
        t.n[m] -= 1;
        amp = std::sqrt(rate * double(s.n[m]));
        channel_diag_[m](i) = rate * double(s.n[m]);
      } else {
        AtomLevel src = (id == JumpChannelId::atom_plus) ? AtomLevel::a : AtomLevel::b;
        if (s.atom != src) continue;
        t.atom = AtomLevel::c;
        amp = std::sqrt(rate);
        channel_diag_[m](i) = rate;
      }
      int j = b.index_of(t);
      if (j >= 0 && amp != 0.0) channel_maps_[m].push_back({j, i, amp});
    }
    decay_diag_ += channel_diag_[m];
  }
}

void HamiltonianApplier::apply(double t, const Vector& x, Vector& y) const {
  y.setZero(x.size());
  double g1 = coupling(1, t, params_);
  double g2 = coupling(2, t, params_);
  Complex phase_p = std::polar(1.0, -params_.delta_plus * t);
  Complex phase_m = std::polar(1.0, -params_.delta_minus * t);
  const Complex coeff[4] = {g1 * phase_p, g1 * phase_m, g2 * phase_p, g2 * phase_m};
  for (int k = 0; k < 4; ++k) {
    if (coeff[k] == Complex{}) continue;
    Complex c = coeff[k];
    Complex cc = std::conj(c);
    for (const Entry& e : terms_[k]) {
      y(e.row) += c * e.val * x(e.col);
      y(e.col) += cc * e.val * x(e.row);
    }
  }
  if (effective_) {
    const Complex half_i(0.0, 0.5);
    for (int i = 0; i < x.size(); ++i)
      if (decay_diag_(i) != 0.0) y(i) -= half_i * decay_diag_(i) * x(i);
  }
}

Matrix HamiltonianApplier::matrix(double t) const {
  int d = dim();
  Matrix H = Matrix::Zero(d, d);
  Vector x = Vector::Zero(d), y(d);
  for (int i = 0; i < d; ++i) {
    x(i) = 1.0;
    apply(t, x, y);
    H.col(i) = y;
    x(i) = 0.0;
  }
  return H;
}

void HamiltonianApplier::channel_rates(const Vector& x,
                                       std::array<double, kNumChannels>& rates) const {
  for (int m = 0; m < kNumChannels; ++m) {
    double r = 0.0;
    const Eigen::VectorXd& d = channel_diag_[m];
    for (int i = 0; i < x.size(); ++i)
      if (d(i) != 0.0) r += d(i) * std::norm(x(i));
    rates[m] = r;
  }
}

double HamiltonianApplier::total_rate(const Vector& x) const {
  double r = 0.0;
  for (int i = 0; i < x.size(); ++i)
    if (decay_diag_(i) != 0.0) r += decay_diag_(i) * std::norm(x(i));
  return r;
}

double HamiltonianApplier::max_total_rate() const {
  return decay_diag_.size() ? decay_diag_.maxCoeff() : 0.0;
}

void HamiltonianApplier::apply_jump(JumpChannelId id, const Vector& x, Vector& y) const {
  y.setZero(x.size());
  for (const Entry& e : channel_maps_[static_cast<int>(id)])
    y(e.row) += e.val * x(e.col);
}

Matrix build_hamiltonian(double t, const FockBasis& basis, const ModelParams& p) {
  HamiltonianApplier app(std::make_shared<FockBasis>(basis), p, false);
  return app.matrix(t);
}

Matrix build_effective_hamiltonian(double t, const FockBasis& basis,
                                   const ModelParams& p) {
  HamiltonianApplier app(std::make_shared<FockBasis>(basis), p, true);
  return app.matrix(t);
}

std::vector<JumpChannel> jump_operators(const FockBasis& basis, const ModelParams& p) {
  p.validate();
  std::vector<JumpChannel> out;
  for (int m = 0; m < kNumChannels; ++m) {
    auto id = static_cast<JumpChannelId>(m);
    Matrix op;
    if (m < 4)
      op = std::sqrt(p.kappa[m]) * annihilation_matrix(basis, ModeId::from_index(m));
    else
      op = std::sqrt(p.gamma) *
           atomic_lowering_matrix(basis, id == JumpChannelId::atom_plus ? +1 : -1);
    out.push_back({id, std::move(op)});
  }
  return out;
}

}  // namespace qpair
