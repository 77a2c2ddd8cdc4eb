#include "hotr/hbm.hpp"

#include <atomic>
#include <cmath>
#include <limits>

#include <Eigen/LU>

namespace hotr::hbm {

void AftConfig::validate() const {
  if (harmonics < 1) throw InvalidInput("harmonic truncation must be at least 1");
  if (!is_power_of_two(samples)) throw InvalidInput("AFT sample count must be a power of two");
  if (samples < 4 * harmonics + 4) throw InvalidInput("AFT sample count must be at least 4 h + 4");
}

Mat HarmonicSolution::reconstruct(const Vec& times) const {
  Mat x(coeffs.rows(), times.size());
  for (Eigen::Index k = 0; k < times.size(); ++k) {
    Vec col = coeffs.col(0).real();
    for (int p = 1; p <= h; ++p)
      col += 2.0 * (coeffs.col(p) * std::exp(Complex(0.0, p * omega * times[k]))).real();
    x.col(k) = col;
  }
  return x;
}

CSpMat dynamic_stiffness(const SystemModel& model, double omega, int p) {
  if (p < 0) throw InvalidInput("harmonic index must be non-negative");
  return dynamic_stiffness_at(model, p * omega);
}

// ---------------------------------------------------------------------------
// AFT

Aft::Aft(const AftConfig& cfg, const std::vector<ContactPair>& pairs) : cfg_(cfg) {
  cfg.validate();
  const int nc = static_cast<int>(pairs.size());
  penalty_.resize(nc);
  gap_.resize(nc);
  for (int c = 0; c < nc; ++c) {
    penalty_[c] = pairs[c].penalty;
    gap_[c] = pairs[c].gap;
  }
  const int n = cfg.samples;
  cos_.resize(n);
  sin_.resize(n);
  for (int j = 0; j < n; ++j) {
    const double a = 2.0 * kPi * j / n;
    cos_[j] = std::cos(a);
    sin_[j] = std::sin(a);
  }
}

namespace {

// y(theta) = y0 + sum_q (a_q cos q theta - b_q sin q theta), with a_q = 2 Re c_q, b_q = 2 Im c_q.
double trig_value(const CMat& rel, Eigen::Index c, double theta) {
  double y = rel(c, 0).real();
  for (Eigen::Index q = 1; q < rel.cols(); ++q)
    y += 2.0 * (rel(c, q).real() * std::cos(q * theta) - rel(c, q).imag() * std::sin(q * theta));
  return y;
}

// Root of y - gap in [lo, hi], where the sign changes.
double refine_root(const CMat& rel, Eigen::Index c, double gap, double lo, double hi) {
  double flo = trig_value(rel, c, lo) - gap;
  for (int it = 0; it < 60 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = trig_value(rel, c, mid) - gap;
    if ((fm >= 0.0) == (flo >= 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

// The samples locate the contact transitions; each closed arc [alpha, beta] is
// then integrated exactly, so the coefficients carry no aliasing error.
void Aft::evaluate(const CMat& rel, CMat& forces, CMat& indicator) const {
  const int h = cfg_.harmonics;
  const int n = cfg_.samples;
  const auto nc = rel.rows();
  if (rel.cols() != h + 1 || nc != penalty_.size())
    throw InvalidInput("AFT input does not match the harmonic or pair count");
  forces.setZero(nc, h + 1);
  indicator.setZero(nc, 2 * h + 1);
  Vec y(n);
  const double step = 2.0 * kPi / n;
  std::vector<std::pair<double, double>> arcs;
  for (Eigen::Index c = 0; c < nc; ++c) {
    y.setConstant(rel(c, 0).real());
    for (int q = 1; q <= h; ++q) {
      const double a = 2.0 * rel(c, q).real();
      const double b = 2.0 * rel(c, q).imag();
      if (a == 0.0 && b == 0.0) continue;
      for (int k = 0; k < n; ++k) {
        const int idx = (q * k) & (n - 1);
        y[k] += a * cos_[idx] - b * sin_[idx];
      }
    }
    const double gap = gap_[c];
    auto closed = [&](int k) { return y[k & (n - 1)] >= gap; };
    arcs.clear();
    int first_open = -1;
    for (int k = 0; k < n && first_open < 0; ++k)
      if (!closed(k)) first_open = k;
    if (first_open < 0) {
      arcs.emplace_back(0.0, 2.0 * kPi);
    } else {
      // walk one full period starting from an open sample
      double alpha = 0.0;
      for (int k = first_open; k < first_open + n; ++k) {
        if (closed(k) == closed(k + 1)) continue;
        const double t = refine_root(rel, c, gap, k * step, (k + 1) * step);
        if (closed(k + 1)) alpha = t;
        else arcs.emplace_back(alpha, t);
      }
    }
    // indicator_m = k_p / (2 pi) * integral over the closed arcs of e^{-i m theta}
    for (const auto& [lo, hi] : arcs) {
      indicator(c, 0) += hi - lo;
      for (int m = 1; m <= 2 * h; ++m)
        indicator(c, m) += (std::exp(Complex(0.0, -m * hi)) - std::exp(Complex(0.0, -m * lo))) / Complex(0.0, -m);
    }
    indicator.row(c) *= penalty_[c] / (2.0 * kPi);
    // f_m = sum_q c_q indicator_{m - q}, q = -h .. h
    for (int m = 0; m <= h; ++m) {
      Complex f = rel(c, 0).real() * indicator(c, m);
      for (int q = 1; q <= h; ++q) {
        const int lo = m - q;
        const Complex g_lo = lo >= 0 ? indicator(c, lo) : std::conj(indicator(c, -lo));
        f += rel(c, q) * g_lo + std::conj(rel(c, q)) * indicator(c, m + q);
      }
      forces(c, m) = f;
    }
    forces(c, 0) = forces(c, 0).real();
    indicator(c, 0) = indicator(c, 0).real();
  }
}

CMat Aft::forces(const CMat& rel) const {
  CMat f, g;
  evaluate(rel, f, g);
  return f;
}

CMat Aft::indicator(const CMat& rel) const {
  CMat f, g;
  evaluate(rel, f, g);
  return g;
}

CMat aft_coefficients(const CMat& rel, const std::vector<ContactPair>& pairs, const AftConfig& cfg) {
  return Aft(cfg, pairs).forces(rel);
}

// ---------------------------------------------------------------------------
// Packing and derivatives

Vec pack(const CMat& coeffs) {
  const auto n = coeffs.rows();
  const auto h = coeffs.cols() - 1;
  Vec z(n * (2 * h + 1));
  z.segment(0, n) = coeffs.col(0).real();
  for (Eigen::Index p = 1; p <= h; ++p) {
    z.segment((2 * p - 1) * n, n) = coeffs.col(p).real();
    z.segment(2 * p * n, n) = coeffs.col(p).imag();
  }
  return z;
}

CMat unpack(const Vec& z, int rows, int h) {
  if (z.size() != static_cast<Eigen::Index>(rows) * (2 * h + 1))
    throw InvalidInput("packed vector has the wrong length");
  CMat c(rows, h + 1);
  c.col(0) = z.segment(0, rows).cast<Complex>();
  for (int p = 1; p <= h; ++p) {
    c.col(p).real() = z.segment((2 * p - 1) * rows, rows);
    c.col(p).imag() = z.segment(2 * p * rows, rows);
  }
  return c;
}

namespace {

Complex ghat(const CMat& g, Eigen::Index c, int m) {
  return m >= 0 ? g(c, m) : std::conj(g(c, -m));
}

/// d f_p / d coordinate j of the same pair, j in packed order [y0, a1, b1, ...].
Complex force_derivative(const CMat& g, Eigen::Index c, int p, int j) {
  if (j == 0) return ghat(g, c, p);
  const int q = (j + 1) / 2;
  const Complex lo = ghat(g, c, p - q);
  const Complex hi = ghat(g, c, p + q);
  return j % 2 == 1 ? lo + hi : Complex(0.0, 1.0) * (lo - hi);
}

CVec load_vector(const SystemModel& model) { return model.force(); }

}  // namespace

Vec full_residual(const SystemModel& model, double omega, const AftConfig& cfg, const Vec& z) {
  cfg.validate();
  const int n = model.size();
  const int h = cfg.harmonics;
  const CMat x = unpack(z, n, h);
  const SpMat b = model.contact_incidence();
  CMat r(n, h + 1);
  const CMat rel = b.transpose().cast<Complex>() * x;
  const CMat f = model.pair_count() ? Aft(cfg, model.contact_pairs).forces(rel) : CMat::Zero(0, h + 1);
  for (int p = 0; p <= h; ++p) {
    r.col(p) = dynamic_stiffness(model, omega, p) * x.col(p);
    if (model.pair_count()) r.col(p) += b.cast<Complex>() * f.col(p);
  }
  r.col(1) -= load_vector(model);
  return pack(r);
}

Mat full_jacobian(const SystemModel& model, double omega, const AftConfig& cfg, const Vec& z) {
  cfg.validate();
  const int n = model.size();
  const int h = cfg.harmonics;
  const int blocks = 2 * h + 1;
  Mat jac = Mat::Zero(n * blocks, n * blocks);
  const Mat k = Mat(model.stiffness);
  const Mat m = Mat(model.mass);
  const Mat c = Mat(model.damping);
  jac.block(0, 0, n, n) = k;
  for (int p = 1; p <= h; ++p) {
    const double s = p * omega;
    const Mat re = k - s * s * m;
    const Mat im = s * c;
    const int rb = (2 * p - 1) * n;
    const int ib = 2 * p * n;
    jac.block(rb, rb, n, n) = re;
    jac.block(rb, ib, n, n) = -im;
    jac.block(ib, rb, n, n) = im;
    jac.block(ib, ib, n, n) = re;
  }
  if (model.pair_count() == 0) return jac;

  const CMat x = unpack(z, n, h);
  const SpMat b = model.contact_incidence();
  const CMat rel = b.transpose().cast<Complex>() * x;
  const CMat g = Aft(cfg, model.contact_pairs).indicator(rel);
  for (int pc = 0; pc < model.pair_count(); ++pc) {
    const auto& pr = model.contact_pairs[pc];
    std::vector<std::pair<int, double>> inc{{pr.dof_plus, 1.0}};
    if (!pr.grounded()) inc.emplace_back(pr.dof_minus, -1.0);
    for (int p = 0; p <= h; ++p) {
      for (int j = 0; j < blocks; ++j) {
        const Complex d = force_derivative(g, pc, p, j);
        for (auto [row, sr] : inc)
          for (auto [col, sc] : inc) {
            const double w = sr * sc;
            if (p == 0) {
              jac(row, j * n + col) += w * d.real();
            } else {
              jac((2 * p - 1) * n + row, j * n + col) += w * d.real();
              jac(2 * p * n + row, j * n + col) += w * d.imag();
            }
          }
      }
    }
  }
  return jac;
}

double certify(const SystemModel& model, const HarmonicSolution& sol, const AftConfig& cfg) {
  AftConfig c = cfg;
  c.harmonics = sol.h;
  const double qn = load_vector(model).norm();
  if (qn == 0.0) throw InvalidInput("cannot certify against a zero load");
  return full_residual(model, sol.omega, c, pack(sol.coeffs)).norm() / qn;
}

// ---------------------------------------------------------------------------
// Newton on the contact coordinates

namespace {

std::atomic<long> g_newton_calls{0};

struct Condensed {
  int nc = 0;
  int h = 0;
  std::vector<DynamicInverse> inverses;  // p = 0..h
  std::vector<CMat> g;                   // B^T D_p^{-1} B
  CVec r;                                // B^T D_1^{-1} a q
};

Condensed condense(const FrequencyOperator& op, double omega, int h) {
  Condensed cd;
  cd.nc = op.model().pair_count();
  cd.h = h;
  for (int p = 0; p <= h; ++p) {
    cd.inverses.push_back(op.at(p * omega));
    if (cd.nc > 0) cd.g.push_back(cd.inverses.back().transfer(Port::Contact, Port::Contact));
  }
  if (cd.nc > 0)
    cd.r = op.model().force_amplitude * cd.inverses[1].transfer(Port::Contact, Port::Force).col(0);
  return cd;
}

Vec condensed_residual(const Condensed& cd, const Aft& aft, const Vec& z, CMat* forces, CMat* ind) {
  const CMat y = unpack(z, cd.nc, cd.h);
  CMat f, g;
  aft.evaluate(y, f, g);
  CMat e = y;
  e.col(1) -= cd.r;
  for (int p = 0; p <= cd.h; ++p) e.col(p) += cd.g[p] * f.col(p);
  if (forces) *forces = std::move(f);
  if (ind) *ind = std::move(g);
  e.col(0).imag().setZero();
  return pack(e);
}

Mat condensed_jacobian(const Condensed& cd, const CMat& ind) {
  const int nc = cd.nc;
  const int h = cd.h;
  const int blocks = 2 * h + 1;
  Mat jac = Mat::Identity(nc * blocks, nc * blocks);
  CMat df(nc, nc * blocks);
  for (int p = 0; p <= h; ++p) {
    df.setZero();
    for (int c = 0; c < nc; ++c)
      for (int j = 0; j < blocks; ++j) df(c, j * nc + c) = force_derivative(ind, c, p, j);
    const CMat rows = cd.g[p] * df;
    if (p == 0) {
      jac.block(0, 0, nc, nc * blocks) += rows.real();
    } else {
      jac.block((2 * p - 1) * nc, 0, nc, nc * blocks) += rows.real();
      jac.block(2 * p * nc, 0, nc, nc * blocks) += rows.imag();
    }
  }
  return jac;
}

// Real matrix of f -> G f in the packed layout.
Mat packed_compliance(const Condensed& cd) {
  const int nc = cd.nc;
  const int blocks = 2 * cd.h + 1;
  Mat out = Mat::Zero(nc * blocks, nc * blocks);
  out.topLeftCorner(nc, nc) = cd.g[0].real();
  for (int p = 1; p <= cd.h; ++p) {
    const int re = (2 * p - 1) * nc;
    const int im = 2 * p * nc;
    out.block(re, re, nc, nc) = cd.g[p].real();
    out.block(re, im, nc, nc) = -cd.g[p].imag();
    out.block(im, re, nc, nc) = cd.g[p].imag();
    out.block(im, im, nc, nc) = cd.g[p].real();
  }
  return out;
}

// Real matrix of the contact-force derivative dF/dy in the packed layout.
Mat packed_force_derivative(const Condensed& cd, const CMat& ind) {
  const int nc = cd.nc;
  const int blocks = 2 * cd.h + 1;
  Mat out = Mat::Zero(nc * blocks, nc * blocks);
  for (int p = 0; p <= cd.h; ++p)
    for (int c = 0; c < nc; ++c)
      for (int j = 0; j < blocks; ++j) {
        const Complex d = force_derivative(ind, c, p, j);
        if (p == 0) {
          out(c, j * nc + c) = d.real();
        } else {
          out((2 * p - 1) * nc + c, j * nc + c) = d.real();
          out(2 * p * nc + c, j * nc + c) = d.imag();
        }
      }
  return out;
}

// Newton on the contact forces, phi(f) = f - F(r - G f). The recovered
// residual is B phi, so this removes the amplification of small errors in the
// relative displacements by the contact stiffness.
void polish_forces(const Condensed& cd, const Aft& aft, CMat& forces, double target) {
  const Mat gmat = packed_compliance(cd);
  auto evaluate = [&](const CMat& f, CMat& ind) {
    CMat y(cd.nc, cd.h + 1);
    for (int p = 0; p <= cd.h; ++p) y.col(p) = -(cd.g[p] * f.col(p));
    y.col(1) += cd.r;
    y.col(0).imag().setZero();
    CMat fy;
    aft.evaluate(y, fy, ind);
    return Vec(pack(f) - pack(fy));
  };
  CMat ind;
  Vec phi = evaluate(forces, ind);
  for (int k = 0; k < 5 && phi.norm() > target; ++k) {
    const Mat jac = Mat::Identity(phi.size(), phi.size()) + packed_force_derivative(cd, ind) * gmat;
    Eigen::FullPivLU<Mat> lu(jac);
    if (!lu.isInvertible()) return;
    const CMat trial = unpack(pack(forces) - lu.solve(phi), cd.nc, cd.h);
    CMat tind;
    const Vec tphi = evaluate(trial, tind);
    if (!(tphi.norm() < phi.norm())) return;
    forces = trial;
    phi = tphi;
    ind = std::move(tind);
  }
}

HarmonicSolution recover(const FrequencyOperator& op, const Condensed& cd, double omega,
                         const CMat& forces) {
  const SystemModel& model = op.model();
  HarmonicSolution sol;
  sol.omega = omega;
  sol.h = cd.h;
  sol.coeffs.setZero(model.size(), cd.h + 1);
  const CMat bq = op.port(Port::Contact).cast<Complex>();
  const CVec load = load_vector(model);
  for (int p = 0; p <= cd.h; ++p) {
    CVec rhs = p == 1 ? load : CVec::Zero(model.size());
    if (cd.nc > 0) rhs -= bq * forces.col(p);
    if (p != 1 && rhs.squaredNorm() == 0.0) continue;
    sol.coeffs.col(p) = cd.inverses[p].solve(rhs);
  }
  sol.coeffs.col(0).imag().setZero();
  return sol;
}

std::string frequency_tag(double omega) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g Hz", rad_to_hz(omega));
  return buf;
}

}  // namespace

HarmonicSolution solve_mhb(const FrequencyOperator& op, double omega, const AftConfig& cfg,
                           const HarmonicSolution* initial, const NewtonOptions& opts) {
  cfg.validate();
  if (!(omega > 0.0)) throw InvalidInput("excitation frequency must be positive");
  ++g_newton_calls;
  const SystemModel& model = op.model();
  const int h = cfg.harmonics;
  const int nc = model.pair_count();
  const double qn = load_vector(model).norm();
  if (qn == 0.0) throw InvalidInput("zero excitation");

  const Condensed cd = condense(op, omega, h);
  if (nc == 0) {
    HarmonicSolution sol = recover(op, cd, omega, CMat());
    sol.iterations = 1;
    sol.residual_norm = certify(model, sol, cfg);
    sol.converged = sol.residual_norm < opts.tolerance;
    if (!sol.converged)
      throw ConvergenceError("linear solve residual too large at " + frequency_tag(omega),
                             sol.residual_norm, 1);
    return sol;
  }

  const Aft aft(cfg, model.contact_pairs);
  CMat y0 = CMat::Zero(nc, h + 1);
  if (initial && initial->coeffs.rows() == model.size()) {
    const CMat rel = op.port(Port::Contact).transpose().cast<Complex>() * initial->coeffs;
    const int cols = std::min<int>(h + 1, static_cast<int>(rel.cols()));
    y0.leftCols(cols) = rel.leftCols(cols);
  } else {
    y0.col(1) = cd.r;  // linear solution
  }
  Vec z = pack(y0);

  CMat forces, ind;
  Vec e = condensed_residual(cd, aft, z, &forces, &ind);
  const double scale = std::max(cd.r.norm(), std::numeric_limits<double>::min());
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    const double en = e.norm();
    if (en <= 1e-13 * scale) break;
    const Mat jac = condensed_jacobian(cd, ind);
    Eigen::FullPivLU<Mat> lu(jac);
    if (!lu.isInvertible())
      throw SolverFailure("singular harmonic-balance Jacobian at " + frequency_tag(omega));
    const Vec dz = lu.solve(-e);
    double t = 1.0;
    Vec trial_z = z + dz;
    CMat tf, tg;
    Vec trial_e = condensed_residual(cd, aft, trial_z, &tf, &tg);
    for (int k = 0; k < opts.max_halvings && !(trial_e.norm() < en); ++k) {
      t *= 0.5;
      trial_z = z + t * dz;
      trial_e = condensed_residual(cd, aft, trial_z, &tf, &tg);
    }
    z = std::move(trial_z);
    e = std::move(trial_e);
    forces = std::move(tf);
    ind = std::move(tg);
    if (dz.norm() * t <= 1e-15 * z.norm()) {
      ++it;
      break;
    }
  }

  polish_forces(cd, aft, forces, 1e-3 * opts.tolerance * qn);
  HarmonicSolution sol = recover(op, cd, omega, forces);
  sol.iterations = it;
  sol.residual_norm = certify(model, sol, cfg);
  sol.converged = sol.residual_norm < opts.tolerance;
  if (!sol.converged)
    throw ConvergenceError("harmonic balance did not converge at " + frequency_tag(omega),
                           sol.residual_norm, it);
  return sol;
}

long newton_call_count() { return g_newton_calls.load(); }

HarmonicSolution solve_mhb(const SystemModel& model, double omega, const AftConfig& cfg,
                           const HarmonicSolution* initial, const NewtonOptions& opts) {
  const FrequencyOperator op(model);
  return solve_mhb(op, omega, cfg, initial, opts);
}

HarmonicSolution solve_mhb_full(const SystemModel& model, double omega, const AftConfig& cfg,
                                const NewtonOptions& opts) {
  cfg.validate();
  ++g_newton_calls;
  const int n = model.size();
  const int h = cfg.harmonics;
  const double qn = load_vector(model).norm();
  if (qn == 0.0) throw InvalidInput("zero excitation");

  CMat x0 = CMat::Zero(n, h + 1);
  Eigen::PartialPivLU<CMat> lin(CMat(dynamic_stiffness(model, omega, 1)));
  x0.col(1) = lin.solve(load_vector(model));
  Vec z = pack(x0);
  Vec r = full_residual(model, omega, cfg, z);
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    const double rn = r.norm();
    if (rn <= 1e-13 * qn) break;
    Eigen::FullPivLU<Mat> lu(full_jacobian(model, omega, cfg, z));
    if (!lu.isInvertible()) throw SolverFailure("singular harmonic-balance Jacobian");
    const Vec dz = lu.solve(-r);
    double t = 1.0;
    Vec trial = z + dz;
    Vec tr = full_residual(model, omega, cfg, trial);
    for (int k = 0; k < opts.max_halvings && !(tr.norm() < rn); ++k) {
      t *= 0.5;
      trial = z + t * dz;
      tr = full_residual(model, omega, cfg, trial);
    }
    z = std::move(trial);
    r = std::move(tr);
  }
  HarmonicSolution sol;
  sol.omega = omega;
  sol.h = h;
  sol.coeffs = unpack(z, n, h);
  sol.iterations = it;
  sol.residual_norm = r.norm() / qn;
  sol.converged = sol.residual_norm < opts.tolerance;
  if (!sol.converged)
    throw ConvergenceError("full harmonic balance did not converge", sol.residual_norm, it);
  return sol;
}

std::vector<HarmonicSolution> sweep(const FrequencyOperator& op, const std::vector<double>& omegas,
                                    const AftConfig& cfg, const NewtonOptions& opts) {
  for (std::size_t i = 1; i < omegas.size(); ++i)
    if (omegas[i] < omegas[i - 1]) throw InvalidInput("sweep frequencies must be ascending");
  std::vector<HarmonicSolution> out;
  out.reserve(omegas.size());
  const HarmonicSolution* last = nullptr;
  for (double w : omegas) {
    try {
      out.push_back(solve_mhb(op, w, cfg, last, opts));
      last = &out.back();
    } catch (const ConvergenceError& e) {
      // Retry from the linear solution, then by sub-stepping from the last
      // converged point, before giving up on this frequency.
      try {
        out.push_back(solve_mhb(op, w, cfg, nullptr, opts));
        last = &out.back();
        continue;
      } catch (const Error&) {
      }
      if (last) {
        try {
          HarmonicSolution guess = *last;
          constexpr int kSubsteps = 8;
          for (int k = 1; k < kSubsteps; ++k)
            guess = solve_mhb(op, last->omega + (w - last->omega) * k / kSubsteps, cfg, &guess, opts);
          out.push_back(solve_mhb(op, w, cfg, &guess, opts));
          last = &out.back();
          continue;
        } catch (const Error&) {
        }
      }
      HarmonicSolution failed;
      failed.omega = w;
      failed.h = cfg.harmonics;
      failed.converged = false;
      failed.residual_norm = e.residual();
      failed.iterations = e.iterations();
      failed.message = e.what();
      out.push_back(std::move(failed));
      last = nullptr;
      for (auto it = out.rbegin(); it != out.rend(); ++it)
        if (it->converged) {
          last = &*it;
          break;
        }
    } catch (const SolverFailure& e) {
      HarmonicSolution failed;
      failed.omega = w;
      failed.h = cfg.harmonics;
      failed.message = e.what();
      out.push_back(std::move(failed));
    }
  }
  return out;
}

std::vector<HarmonicSolution> sweep(const SystemModel& model, const std::vector<double>& omegas,
                                    const AftConfig& cfg, const NewtonOptions& opts) {
  const FrequencyOperator op(model);
  return sweep(op, omegas, cfg, opts);
}

}  // namespace hotr::hbm
