#pragma once

#include <cstdint>
#include <vector>

#include "hotr/system.hpp"

/// Implicit time integration with penalty contact, harmonic extraction from
/// sampled signals and additive measurement noise.
namespace hotr::td {

/// Chung-Hulbert generalized-alpha coefficients.
struct AlphaParameters {
  double alpha_m = 0.0;
  double alpha_f = 0.0;
  double beta = 0.25;
  double gamma = 0.5;

  /// Parameters for spectral radius at infinity rho in [0, 1].
  static AlphaParameters from_rho(double rho);
};

struct IntegratorConfig {
  double rho_inf = 0.7;
  int steps_per_period = 256;  // dt = T / steps_per_period
  int max_periods = 4000;
  /// Largest per-period change of any monitored harmonic, relative to the
  /// channel's fundamental, that counts as steady.
  double steady_tol = 1e-5;
  int steady_periods = 3;  // successive periods below steady_tol
  int harmonics = 5;       // orders monitored for the steady test
  int record_periods = 4;  // periods returned once steady
  std::vector<int> record_dofs;
  /// When false, integration stops after max_periods without throwing.
  bool require_steady = true;
  int max_contact_iterations = 50;

  void validate() const;
};

/// Sampled response; row k is time origin + k * dt.
struct TimeHistory {
  double omega = 0.0;
  double dt = 0.0;
  double time_origin = 0.0;
  int samples_per_period = 0;
  int periods = 0;
  Mat sensors;  // samples x sensor_count
  Mat dofs;     // samples x record_dofs.size()
  bool steady = false;
  int periods_run = 0;  // before recording started
  double last_change = 0.0;

  Vec time() const;
};

/// Generalized-alpha march of M a + C v + K x + f_c(x) = 2 Re(amplitude q e^{i w t})
/// from rest, with the contact law evaluated implicitly at the alpha_f state.
class Stepper {
 public:
  Stepper(const SystemModel& model, double omega, double amplitude, double dt, double rho_inf,
          int max_contact_iterations = 50);
  ~Stepper();
  Stepper(const Stepper&) = delete;
  Stepper& operator=(const Stepper&) = delete;

  void step();
  /// Restarts from displacement d and velocity v at the current time; contact
  /// pairs must be open in d.
  void set_state(const Vec& d, const Vec& v);

  double time() const { return t_; }
  const Vec& displacement() const { return d_; }
  const Vec& velocity() const { return v_; }
  const Vec& acceleration() const { return a_; }
  /// Number of distinct contact states factorized so far.
  int factorizations() const;

 private:
  struct Impl;
  Impl* impl_;
  Vec d_, v_, a_;
  double t_ = 0.0;
};

/// Integrates from rest until steady, then records `record_periods` periods.
/// Throws ConvergenceError if not steady within max_periods (unless disabled).
TimeHistory integrate(const SystemModel& model, double omega, double amplitude,
                      const IntegratorConfig& cfg);

/// Recursive correlation: order p is correlated at p*omega against the signal
/// with orders 0..p-1 already removed. Returns coefficients 0..h with
/// x(t) ~ c_0 + sum_p (c_p e^{i p w t} + c.c.). The window must span an
/// integer number of periods.
CVec extract_harmonics(const Vec& signal, double time_origin, double dt, double omega, int h);

struct NoisySignal {
  Vec clean;
  Vec noise;
  Vec measured;
  double level = 0.0;  // percent RMS
  std::uint64_t seed = 0;
};

/// Zero-mean Gaussian white noise scaled to `level` percent of the RMS of `clean`.
NoisySignal add_noise(const Vec& clean, double level, std::uint64_t seed);

/// Column-wise noise with an independent stream per channel.
Mat add_noise_channels(const Mat& clean, double level, std::uint64_t seed);

}  // namespace hotr::td
