#include "hotr/timedomain.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <random>

#include <Eigen/SparseCholesky>

namespace hotr::td {

AlphaParameters AlphaParameters::from_rho(double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw InvalidInput("spectral radius must lie in [0, 1]");
  AlphaParameters p;
  p.alpha_m = (2.0 * rho - 1.0) / (rho + 1.0);
  p.alpha_f = rho / (rho + 1.0);
  const double s = 1.0 - p.alpha_m + p.alpha_f;
  p.beta = 0.25 * s * s;
  p.gamma = 0.5 - p.alpha_m + p.alpha_f;
  return p;
}

void IntegratorConfig::validate() const {
  if (!(rho_inf >= 0.0 && rho_inf <= 1.0)) throw InvalidInput("rho_inf must lie in [0, 1]");
  if (steps_per_period < 200) throw InvalidInput("steps_per_period must be at least 200");
  if (max_periods < 1) throw InvalidInput("max_periods must be positive");
  if (!(steady_tol > 0.0)) throw InvalidInput("steady_tol must be positive");
  if (steady_periods < 1) throw InvalidInput("steady_periods must be positive");
  if (harmonics < 1) throw InvalidInput("harmonics must be positive");
  if (record_periods < 1) throw InvalidInput("record_periods must be positive");
  if (max_contact_iterations < 1) throw InvalidInput("max_contact_iterations must be positive");
}

Vec TimeHistory::time() const {
  const Eigen::Index n = std::max(sensors.rows(), dofs.rows());
  Vec t(n);
  for (Eigen::Index k = 0; k < n; ++k) t[k] = time_origin + k * dt;
  return t;
}

// ---------------------------------------------------------------------------

namespace {

class SymmetricSolver {
 public:
  explicit SymmetricSolver(const SpMat& a) {
    if (a.rows() <= 600) {
      dense_ = std::make_unique<Eigen::LDLT<Mat>>(Mat(a));
      if (dense_->info() != Eigen::Success) throw SolverFailure("effective stiffness factorization failed");
    } else {
      sparse_ = std::make_unique<Eigen::SimplicialLDLT<SpMat>>(a);
      if (sparse_->info() != Eigen::Success) throw SolverFailure("effective stiffness factorization failed");
    }
  }
  Vec solve(const Vec& b) const { return dense_ ? Vec(dense_->solve(b)) : Vec(sparse_->solve(b)); }

 private:
  std::unique_ptr<Eigen::LDLT<Mat>> dense_;
  std::unique_ptr<Eigen::SimplicialLDLT<SpMat>> sparse_;
};

}  // namespace

struct Stepper::Impl {
  const SystemModel& model;
  AlphaParameters ap;
  double omega;
  double dt;
  CVec load;
  SpMat base;   // effective matrix without contact
  SpMat incidence;
  Vec penalties;
  Vec gaps;
  int max_iterations;
  std::map<std::vector<char>, std::unique_ptr<SymmetricSolver>> cache;

  Impl(const SystemModel& m, double w, double amplitude, double step, double rho, int iters)
      : model(m), ap(AlphaParameters::from_rho(rho)), omega(w), dt(step), max_iterations(iters) {
    load = amplitude * m.force_pattern;
    const double cm = (1.0 - ap.alpha_m) / (ap.beta * dt * dt);
    const double cc = (1.0 - ap.alpha_f) * ap.gamma / (ap.beta * dt);
    base = cm * m.mass + cc * m.damping + (1.0 - ap.alpha_f) * m.stiffness;
    incidence = m.contact_incidence();
    penalties.resize(m.pair_count());
    gaps.resize(m.pair_count());
    for (int c = 0; c < m.pair_count(); ++c) {
      penalties[c] = m.contact_pairs[c].penalty;
      gaps[c] = m.contact_pairs[c].gap;
    }
  }

  Vec force_at(double t) const {
    const Complex e = std::exp(Complex(0.0, omega * t));
    return 2.0 * (load * e).real();
  }

  SpMat contact_stiffness(const std::vector<char>& active) const {
    Vec k = Vec::Zero(penalties.size());
    for (std::size_t c = 0; c < active.size(); ++c)
      if (active[c]) k[c] = penalties[c];
    return incidence * k.asDiagonal() * incidence.transpose();
  }

  const SymmetricSolver& solver(const std::vector<char>& active) {
    auto it = cache.find(active);
    if (it != cache.end()) return *it->second;
    SpMat a = base + (1.0 - ap.alpha_f) * contact_stiffness(active);
    auto s = std::make_unique<SymmetricSolver>(a);
    return *cache.emplace(active, std::move(s)).first->second;
  }

  std::vector<char> state_of(const Vec& x) const {
    const Vec rel = incidence.transpose() * x;
    std::vector<char> active(rel.size());
    for (Eigen::Index c = 0; c < rel.size(); ++c) active[c] = rel[c] >= gaps[c];
    return active;
  }
};

Stepper::Stepper(const SystemModel& model, double omega, double amplitude, double dt,
                 double rho_inf, int max_contact_iterations)
    : impl_(nullptr) {
  model.validate();
  if (!(dt > 0.0)) throw InvalidInput("time step must be positive");
  impl_ = new Impl(model, omega, amplitude, dt, rho_inf, max_contact_iterations);
  const int n = model.size();
  d_ = Vec::Zero(n);
  v_ = Vec::Zero(n);
  // Contact forces vanish at rest, so M a0 = F(0).
  SymmetricSolver mass(model.mass);
  a_ = mass.solve(impl_->force_at(0.0));
}

Stepper::~Stepper() { delete impl_; }

void Stepper::set_state(const Vec& d, const Vec& v) {
  const auto& m = impl_->model;
  if (d.size() != m.size() || v.size() != m.size()) throw InvalidInput("state has the wrong size");
  for (char c : impl_->state_of(d))
    if (c) throw InvalidInput("set_state needs every contact pair open");
  d_ = d;
  v_ = v;
  SymmetricSolver mass(m.mass);
  a_ = mass.solve(impl_->force_at(t_) - m.damping * v - m.stiffness * d);
}

int Stepper::factorizations() const { return static_cast<int>(impl_->cache.size()); }

void Stepper::step() {
  Impl& s = *impl_;
  const auto& ap = s.ap;
  const double dt = s.dt;
  const double ca = 1.0 / (ap.beta * dt * dt);
  const Vec a_tilde = -ca * (d_ + dt * v_) - (0.5 - ap.beta) / ap.beta * a_;
  const Vec v_tilde = v_ + dt * (1.0 - ap.gamma) * a_ + ap.gamma * dt * a_tilde;

  const double t_alpha = t_ + (1.0 - ap.alpha_f) * dt;
  const Vec rhs_common = s.force_at(t_alpha) -
                         s.model.mass * ((1.0 - ap.alpha_m) * a_tilde + ap.alpha_m * a_) -
                         s.model.damping * ((1.0 - ap.alpha_f) * v_tilde + ap.alpha_f * v_) -
                         ap.alpha_f * (s.model.stiffness * d_);

  std::vector<char> active = s.state_of(d_);
  Vec d1;
  bool settled = false;
  for (int it = 0; it < s.max_iterations; ++it) {
    Vec rhs = rhs_common;
    if (s.model.pair_count() > 0) rhs -= ap.alpha_f * (s.contact_stiffness(active) * d_);
    d1 = s.solver(active).solve(rhs);
    if (s.model.pair_count() == 0) {
      settled = true;
      break;
    }
    const Vec d_alpha = (1.0 - ap.alpha_f) * d1 + ap.alpha_f * d_;
    std::vector<char> next = s.state_of(d_alpha);
    if (next == active) {
      settled = true;
      break;
    }
    active = std::move(next);
  }
  if (!settled)
    throw ConvergenceError("contact state iteration did not settle at t = " + std::to_string(t_),
                           0.0, s.max_iterations);

  const Vec a1 = ca * d1 + a_tilde;
  v_ = v_ + dt * ((1.0 - ap.gamma) * a_ + ap.gamma * a1);
  a_ = a1;
  d_ = std::move(d1);
  t_ += dt;
}

// ---------------------------------------------------------------------------

TimeHistory integrate(const SystemModel& model, double omega, double amplitude,
                      const IntegratorConfig& cfg) {
  cfg.validate();
  if (!(omega > 0.0)) throw InvalidInput("excitation frequency must be positive");
  for (int d : cfg.record_dofs)
    if (d < 0 || d >= model.size()) throw InvalidInput("recorded DoF outside the model");
  const int ns = model.sensor_count();
  const int nd = static_cast<int>(cfg.record_dofs.size());
  const int channels = ns + nd;
  if (channels == 0) throw InvalidInput("nothing to record: no sensors and no recorded DoFs");

  const int n_steps = cfg.steps_per_period;
  const double period = 2.0 * kPi / omega;
  const double dt = period / n_steps;
  Stepper stepper(model, omega, amplitude, dt, cfg.rho_inf, cfg.max_contact_iterations);

  auto sample = [&]() {
    const Vec& d = stepper.displacement();
    Vec out(channels);
    if (ns > 0) out.head(ns) = model.sensor_rows * d;
    for (int k = 0; k < nd; ++k) out[ns + k] = d[cfg.record_dofs[k]];
    return out;
  };

  const int h = cfg.harmonics;
  CMat kernel(n_steps, h + 1);
  for (int k = 0; k < n_steps; ++k)
    for (int p = 0; p <= h; ++p)
      kernel(k, p) = std::exp(Complex(0.0, -p * 2.0 * kPi * k / n_steps)) / double(n_steps);

  Mat window(n_steps, channels);
  CMat previous;
  int calm = 0;
  TimeHistory hist;
  hist.omega = omega;
  hist.dt = dt;
  hist.samples_per_period = n_steps;
  hist.last_change = std::numeric_limits<double>::infinity();

  int period_index = 0;
  for (; period_index < cfg.max_periods; ++period_index) {
    for (int k = 0; k < n_steps; ++k) {
      window.row(k) = sample().transpose();
      stepper.step();
    }
    // Period starts coincide with multiples of T, so the kernel phase is exact.
    const CMat coeffs = window.cast<Complex>().transpose() * kernel;  // channels x (h+1)
    if (previous.size() > 0) {
      double change = 0.0;
      for (int c = 0; c < channels; ++c) {
        const double scale = coeffs.row(c).cwiseAbs().maxCoeff();
        if (scale == 0.0) continue;
        change = std::max(change, (coeffs.row(c) - previous.row(c)).cwiseAbs().maxCoeff() / scale);
      }
      hist.last_change = change;
      calm = change < cfg.steady_tol ? calm + 1 : 0;
    }
    previous = coeffs;
    if (calm >= cfg.steady_periods) {
      hist.steady = true;
      ++period_index;
      break;
    }
  }
  if (!hist.steady && cfg.require_steady)
    throw ConvergenceError("time integration did not reach a steady state", hist.last_change,
                           cfg.max_periods);

  hist.periods_run = period_index;
  hist.periods = cfg.record_periods;
  hist.time_origin = stepper.time();
  const int total = n_steps * cfg.record_periods;
  Mat rec(total, channels);
  for (int k = 0; k < total; ++k) {
    rec.row(k) = sample().transpose();
    stepper.step();
  }
  hist.sensors = rec.leftCols(ns);
  hist.dofs = rec.rightCols(nd);
  return hist;
}

CVec extract_harmonics(const Vec& signal, double time_origin, double dt, double omega, int h) {
  if (h < 0) throw InvalidInput("harmonic order must be non-negative");
  if (!(dt > 0.0) || !(omega > 0.0)) throw InvalidInput("dt and omega must be positive");
  const Eigen::Index n = signal.size();
  const double periods = n * dt * omega / (2.0 * kPi);
  if (periods < 1.0 - 1e-9) throw InvalidInput("window is shorter than one period");
  if (std::abs(periods - std::round(periods)) > 1e-6 * std::max(1.0, periods))
    throw InvalidInput("window must span an integer number of periods");

  CVec out(h + 1);
  Vec residual = signal;
  for (int p = 0; p <= h; ++p) {
    Complex acc = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double t = time_origin + k * dt;
      acc += residual[k] * std::exp(Complex(0.0, -p * omega * t));
    }
    const Complex c = acc / double(n);
    out[p] = c;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double t = time_origin + k * dt;
      residual[k] -= p == 0 ? c.real() : 2.0 * (c * std::exp(Complex(0.0, p * omega * t))).real();
    }
  }
  return out;
}

namespace {

Vec gaussian_noise(Eigen::Index n, std::seed_seq& seq) {
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec e(n);
  for (Eigen::Index k = 0; k < n; ++k) e[k] = normal(rng);
  return e;
}

double rms(const Vec& v) { return v.size() ? std::sqrt(v.squaredNorm() / double(v.size())) : 0.0; }

Vec scaled_noise(const Vec& clean, double level, std::seed_seq& seq) {
  if (!(level >= 0.0)) throw InvalidInput("noise level must be non-negative");
  if (level == 0.0) return Vec::Zero(clean.size());
  const double target = level / 100.0 * rms(clean);
  if (target == 0.0) throw InvalidInput("cannot add relative noise to a zero-power signal");
  Vec e = gaussian_noise(clean.size(), seq);
  e.array() -= e.mean();
  return e * (target / rms(e));
}

}  // namespace

NoisySignal add_noise(const Vec& clean, double level, std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  NoisySignal out;
  out.clean = clean;
  out.noise = scaled_noise(clean, level, seq);
  out.measured = clean + out.noise;
  out.level = level;
  out.seed = seed;
  return out;
}

Mat add_noise_channels(const Mat& clean, double level, std::uint64_t seed) {
  Mat out = clean;
  for (Eigen::Index c = 0; c < clean.cols(); ++c) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(c)};
    out.col(c) += scaled_noise(clean.col(c), level, seq);
  }
  return out;
}

}  // namespace hotr::td
