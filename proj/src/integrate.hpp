#pragma once

#include "qpair/model.hpp"

namespace qpair::detail {

// One RK4 step of i dpsi/dt = H(t) psi, in place. Scratch vectors are
// caller-owned so trajectory loops do not allocate.
struct Rk4Scratch {
  Vector k1, k2, k3, k4, tmp;
  explicit Rk4Scratch(int dim) : k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim) {}
};

// Stage times are nudged strictly inside the segment so a stage landing
// exactly on a pulse edge samples the coupling on the segment's own side of
// the discontinuity. The nudge is far below the integration error.
inline double stage_time(double t, double lo, double hi) {
  double pad = 1e-12 * (hi - lo);
  return std::min(std::max(t, lo + pad), hi - pad);
}

inline void rk4_step(const HamiltonianApplier& h, double t, double dt, Vector& psi,
                     Rk4Scratch& s, double seg_lo = -1e300, double seg_hi = 1e300) {
  const Complex mi(0.0, -1.0);
  double t0 = stage_time(t, seg_lo, seg_hi);
  double tm = stage_time(t + dt / 2, seg_lo, seg_hi);
  double t1 = stage_time(t + dt, seg_lo, seg_hi);
  h.apply(t0, psi, s.k1);
  s.k1 *= mi;
  s.tmp = psi + (dt / 2) * s.k1;
  h.apply(tm, s.tmp, s.k2);
  s.k2 *= mi;
  s.tmp = psi + (dt / 2) * s.k2;
  h.apply(tm, s.tmp, s.k3);
  s.k3 *= mi;
  s.tmp = psi + dt * s.k3;
  h.apply(t1, s.tmp, s.k4);
  s.k4 *= mi;
  psi += (dt / 6) * (s.k1 + 2.0 * s.k2 + 2.0 * s.k3 + s.k4);
}

// Stepping plan: segments split at square-pulse window edges so no RK4 step
// straddles a coupling discontinuity.
inline std::vector<double> segment_breaks(const ModelParams& p, double t_start,
                                          double t_end) {
  std::vector<double> breaks{t_start};
  if (p.pulse_shape == PulseShape::square) {
    for (double b : {p.window_start(1), p.window_end(1), p.window_start(2),
                     p.window_end(2)})
      if (b > t_start + 1e-15 && b < t_end - 1e-15) breaks.push_back(b);
  }
  breaks.push_back(t_end);
  std::sort(breaks.begin(), breaks.end());
  return breaks;
}

}  // namespace qpair::detail
