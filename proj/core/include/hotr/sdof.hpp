#pragma once

#include "hotr/system.hpp"
#include "hotr/timedomain.hpp"

/// Bilinear single-DoF oscillator m x'' + c x' + k x + H(x) k0 x = sin(w t),
/// with H(x) = 1 for x >= gap.
namespace hotr::sdof {

struct SdofParams {
  double m = 1.0;
  double c = 0.02;
  double k = 1.0;
  double k0 = 0.0;
  double gap = 0.0;
  double omega = 0.6;  // rad/s
  double amplitude = 1.0;

  void validate() const;

  static SdofParams healthy() { return {}; }
  /// Same closed-gap stiffness as the healthy case.
  static SdofParams cracked() {
    SdofParams p;
    p.k = 0.9;
    p.k0 = 0.1;
    return p;
  }
};

/// One-DoF SystemModel whose unilateral spring is a grounded contact pair.
/// The sine load is encoded as the complex pattern -i/2.
SystemModel to_system(const SdofParams& params);

struct SdofSeries {
  double dt = 0.0;
  Vec time;
  Vec displacement;
};

/// Generalized-alpha response from rest over [0, t_end] sampled every dt.
SdofSeries simulate_sdof(const SdofParams& params, double t_end, double dt, double rho_inf = 0.7);

/// Harmonic magnitudes |x_p|, p = 0..h, of the trailing window of `x`
/// spanning `periods` whole forcing periods.
Vec spectrum(const Vec& x, double dt, double omega, int h, int periods);

struct SteadyResponse {
  td::TimeHistory history;
  CVec harmonics;  // 0..h
  Vec magnitudes;  // |harmonics|
};

/// Integrates to a steady state and extracts the harmonics of x.
SteadyResponse steady_response(const SdofParams& params, int h = 8, int steps_per_period = 256,
                               double steady_tol = 1e-6);

}  // namespace hotr::sdof
