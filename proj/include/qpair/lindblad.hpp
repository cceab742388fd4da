#pragma once

#include <vector>

#include "qpair/coherent.hpp"
#include "qpair/model.hpp"

namespace qpair {

// Dense density matrix on an ordered basis. Physical states are Hermitian
// (1e-12), unit trace (1e-8), positive semidefinite (eigenvalues >= -1e-8).
struct DensityMatrix {
  BasisPtr basis;
  Matrix rho;

  static DensityMatrix pure(const StateVector& psi);

  double trace() const { return rho.trace().real(); }
  double purity() const { return (rho * rho).trace().real(); }
  double hermiticity_error() const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }
  double min_eigenvalue() const;
  // Populations, i.e. the real diagonal.
  Eigen::VectorXd diagonal() const { return rho.diagonal().real(); }

  // Throws std::invalid_argument if any invariant above fails.
  void validate() const;
};

struct DensityResult {
  std::vector<double> times;
  std::vector<Matrix> snapshots;  // includes initial and final matrix
  BasisPtr basis;
  double max_trace_drift = 0.0;  // largest |tr(rho) - 1| seen along the run
  double max_purity = 0.0;

  DensityMatrix final_state() const { return {basis, snapshots.back()}; }
};

// Fixed-step fourth-order integration of the master equation
//   drho/dt = -i[H(t), rho] + sum_m (C_m rho C_m^dag - 1/2 {C_m^dag C_m, rho})
// with the six decay channels of the model. Stepping policy matches evolve()
// so trajectory ensembles and the oracle see the same time grid. Throws
// IntegrationError if the trace drifts from one by more than 1e-6.
DensityResult evolve_density(const DensityMatrix& rho0, const ModelParams& p,
                             double t_end, double dt_max, int snapshot_stride = 0);

}  // namespace qpair
