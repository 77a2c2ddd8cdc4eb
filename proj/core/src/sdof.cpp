#include "hotr/sdof.hpp"

#include <cmath>

namespace hotr::sdof {

void SdofParams::validate() const {
  if (!(m > 0.0)) throw InvalidInput("mass must be positive");
  if (!(k >= 0.0) || !(k0 >= 0.0) || !(c >= 0.0))
    throw InvalidInput("stiffness and damping must be non-negative");
  if (!(omega > 0.0)) throw InvalidInput("forcing frequency must be positive");
  if (!(amplitude >= 0.0)) throw InvalidInput("forcing amplitude must be non-negative");
}

SystemModel to_system(const SdofParams& params) {
  params.validate();
  SystemModel s;
  auto scalar = [](double v) {
    SpMat a(1, 1);
    a.insert(0, 0) = v;
    return a;
  };
  s.mass = scalar(params.m);
  s.damping = scalar(params.c);
  s.stiffness = scalar(params.k);
  s.force_pattern = CVec::Constant(1, Complex(0.0, -0.5));
  s.force_amplitude = params.amplitude;
  if (params.k0 > 0.0) s.contact_pairs.push_back({0, -1, params.k0, params.gap});
  return s;
}

SdofSeries simulate_sdof(const SdofParams& params, double t_end, double dt, double rho_inf) {
  if (!(dt > 0.0) || !(t_end > 0.0)) throw InvalidInput("dt and t_end must be positive");
  const double period = 2.0 * kPi / params.omega;
  if (period / dt < 64.0) throw InvalidInput("time step must resolve the forcing (>= 64 steps per period)");
  const SystemModel model = to_system(params);
  td::Stepper stepper(model, params.omega, params.amplitude, dt, rho_inf);
  const auto steps = static_cast<Eigen::Index>(std::floor(t_end / dt + 1e-9));
  SdofSeries out;
  out.dt = dt;
  out.time.resize(steps + 1);
  out.displacement.resize(steps + 1);
  out.time[0] = 0.0;
  out.displacement[0] = 0.0;
  const double bound = 1e6 * std::max(1.0, params.amplitude / std::max(params.k, 1e-300));
  for (Eigen::Index i = 1; i <= steps; ++i) {
    stepper.step();
    out.time[i] = i * dt;
    out.displacement[i] = stepper.displacement()[0];
    if (!std::isfinite(out.displacement[i]) || std::abs(out.displacement[i]) > bound)
      throw SolverFailure("sdof integration is unstable at t = " + std::to_string(out.time[i]));
  }
  return out;
}

Vec spectrum(const Vec& x, double dt, double omega, int h, int periods) {
  if (periods < 1) throw InvalidInput("spectrum window needs at least one period");
  const double samples = periods * 2.0 * kPi / omega / dt;
  const auto n = static_cast<Eigen::Index>(std::lround(samples));
  if (std::abs(samples - double(n)) > 1e-6 * samples)
    throw InvalidInput("window is not an integer number of forcing periods on this time grid");
  if (n > x.size()) throw InvalidInput("signal shorter than the requested window");
  const Eigen::Index start = x.size() - n;
  return td::extract_harmonics(x.tail(n), start * dt, dt, omega, h).cwiseAbs();
}

SteadyResponse steady_response(const SdofParams& params, int h, int steps_per_period,
                               double steady_tol) {
  const SystemModel model = to_system(params);
  td::IntegratorConfig cfg;
  cfg.steps_per_period = steps_per_period;
  cfg.steady_tol = steady_tol;
  cfg.steady_periods = 2;
  cfg.harmonics = h;
  cfg.record_periods = 4;
  cfg.record_dofs = {0};
  cfg.max_periods = 20000;
  SteadyResponse out;
  out.history = td::integrate(model, params.omega, params.amplitude, cfg);
  out.harmonics = td::extract_harmonics(out.history.dofs.col(0), out.history.time_origin,
                                        out.history.dt, params.omega, h);
  out.magnitudes = out.harmonics.cwiseAbs();
  return out;
}

}  // namespace hotr::sdof
