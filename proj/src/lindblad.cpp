#include "qpair/lindblad.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "integrate.hpp"

namespace qpair {

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
  return {psi.basis(), psi.amps() * psi.amps().adjoint()};
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
  return es.eigenvalues().minCoeff();
}

void DensityMatrix::validate() const {
  if (!basis || rho.rows() != basis->dim() || rho.cols() != basis->dim())
    throw std::invalid_argument("DensityMatrix: shape does not match basis");
  if (hermiticity_error() > 1e-12)
    throw std::invalid_argument("DensityMatrix: not Hermitian");
  if (std::abs(trace() - 1.0) > 1e-8)
    throw std::invalid_argument("DensityMatrix: trace differs from one");
  if (min_eigenvalue() < -1e-8)
    throw std::invalid_argument("DensityMatrix: negative eigenvalue");
}

namespace {

struct Liouvillian {
  HamiltonianApplier h;       // Hermitian part
  std::vector<Matrix> jumps;  // sqrt(rate) * lowering operators
  Matrix decay_half;          // (1/2) sum C^dag C, diagonal and constant

  Liouvillian(const BasisPtr& basis, const ModelParams& p)
      : h(basis, p, false), decay_half(Matrix::Zero(basis->dim(), basis->dim())) {
    for (const JumpChannel& c : jump_operators(*basis, p)) {
      jumps.push_back(c.op);
      decay_half += 0.5 * c.op.adjoint() * c.op;
    }
  }

  Matrix operator()(double t, const Matrix& rho) const {
    Matrix ham = h.matrix(t);
    Matrix d = Complex(0, -1) * (ham * rho - rho * ham);
    d -= decay_half * rho + rho * decay_half;
    for (const Matrix& c : jumps) d += c * rho * c.adjoint();
    return d;
  }
};

}  // namespace

DensityResult evolve_density(const DensityMatrix& rho0, const ModelParams& p,
                             double t_end, double dt_max, int snapshot_stride) {
  p.validate();
  rho0.validate();
  if (dt_max <= 0) throw std::invalid_argument("evolve_density: dt_max must be positive");
  if (t_end < 0) throw std::invalid_argument("evolve_density: t_end must be nonnegative");

  Liouvillian lv(rho0.basis, p);
  Matrix rho = rho0.rho;

  DensityResult res;
  res.basis = rho0.basis;
  res.times.push_back(0.0);
  res.snapshots.push_back(rho);
  res.max_purity = (rho * rho).trace().real();

  auto check = [&](double t) {
    double drift = std::abs(rho.trace().real() - 1.0);
    res.max_trace_drift = std::max(res.max_trace_drift, drift);
    res.max_purity = std::max(res.max_purity, (rho * rho).trace().real());
    if (!(drift < 1e-6))
      throw IntegrationError("evolve_density: trace drift " + std::to_string(drift) +
                             " at t = " + std::to_string(t) + "; reduce dt_max");
  };

  auto breaks = detail::segment_breaks(p, 0.0, t_end);
  int step = 0;
  for (size_t s = 0; s + 1 < breaks.size(); ++s) {
    double a = breaks[s], b = breaks[s + 1];
    if (b <= a) continue;
    int n = std::max(1, static_cast<int>(std::ceil((b - a) / dt_max - 1e-12)));
    double dt = (b - a) / n;
    for (int k = 0; k < n; ++k) {
      double t = a + k * dt;
      double t0 = detail::stage_time(t, a, b);
      double tm = detail::stage_time(t + dt / 2, a, b);
      double t1 = detail::stage_time(t + dt, a, b);
      Matrix k1 = lv(t0, rho);
      Matrix k2 = lv(tm, rho + (dt / 2) * k1);
      Matrix k3 = lv(tm, rho + (dt / 2) * k2);
      Matrix k4 = lv(t1, rho + dt * k3);
      rho += (dt / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      ++step;
      check(t + dt);
      if (snapshot_stride > 0 && step % snapshot_stride == 0) {
        res.times.push_back(t + dt);
        res.snapshots.push_back(rho);
      }
    }
  }
  if (res.times.back() != t_end) {
    res.times.push_back(t_end);
    res.snapshots.push_back(rho);
  }
  return res;
}

}  // namespace qpair
