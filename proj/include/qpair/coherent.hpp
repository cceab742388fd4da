#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "qpair/model.hpp"

namespace qpair {

struct IntegrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CalibrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EvolutionResult {
  std::vector<double> times;
  std::vector<Vector> snapshots;  // includes initial and final state
  BasisPtr basis;

  const Vector& final_state() const { return snapshots.back(); }
  // |<phi|psi(t_k)>|^2 for every snapshot.
  std::vector<double> populations(const StateVector& phi) const;
};

// Fixed-step fourth-order integration of i dpsi/dt = H(t) psi. For square
// pulses the stepping is split at the window edges so no step straddles a
// discontinuity. Throws IntegrationError if the final norm drifts from one
// by more than 1e-6.
EvolutionResult evolve(const StateVector& psi0, const ModelParams& p,
                       double t_start, double t_end, double dt_max,
                       int snapshot_stride = 1);

// Closed-form two-level amplitudes for a constant coupling, two-photon
// resonant (delta_+ = delta_- = delta) evolution from |I> at t = 0:
// returns (amp on B, amp on I).
std::pair<Complex, Complex> analytic_cavity1(double t, double g1, double delta);
// Second stage, entered in -i|B> at t' = 0: returns (amp on E+, amp on B).
std::pair<Complex, Complex> analytic_cavity2(double t_prime, double g2, double delta);

// Pulse area int Omega(t) dt over the cavity window at delta = 0, by
// quadrature: Omega = 2 sqrt(2) g_1(t) for cavity 1, 2 g_2(t) for cavity 2.
double pulse_area(const ModelParams& p, int cavity);

enum class CalibrationMode {
  width,      // adjust tau_i (or t_i for square pulses), peak fixed
  amplitude,  // adjust the peak multiplier, timing fixed
};

// Returns params with the chosen knob adjusted so the pulse area equals
// target_area within 1e-9, by bracketed root finding on the quadrature.
// Throws CalibrationError when the root cannot be bracketed (window too
// short for the requested area).
ModelParams calibrate_pulse(const ModelParams& p, int cavity,
                            CalibrationMode mode = CalibrationMode::width,
                            double target_area = 3.14159265358979323846);

}  // namespace qpair
