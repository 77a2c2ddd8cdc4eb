#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hotr/dynamics.hpp"
#include "hotr/system.hpp"

/// Multi-harmonic balance with alternating frequency-time contact forces.
///
/// A periodic response is x(t) = x_0 + sum_{p=1..h} (x_p e^{i p w t} + c.c.)
/// and the excitation is q(t) = a (q e^{i w t} + c.c.), so only the p = 1
/// block of the right-hand side is nonzero.
namespace hotr::hbm {

struct AftConfig {
  int harmonics = 5;
  int samples = 1024;  // per period, power of two, >= 4 h + 4

  void validate() const;
};

struct HarmonicSolution {
  double omega = 0.0;
  int h = 0;
  CMat coeffs;  // n x (h + 1); column p holds x_p, column 0 is real
  bool converged = false;
  double residual_norm = 0.0;  // ||R|| / ||q||
  int iterations = 0;
  std::string message;

  CVec harmonic(int p) const { return coeffs.col(p); }
  /// Coefficient p of a linear output row set, e.g. sensor strains.
  CVec output(const Mat& rows, int p) const { return rows.cast<Complex>() * coeffs.col(p); }
  /// x(t) at the given times.
  Mat reconstruct(const Vec& times) const;
};

/// D_p = -(p w)^2 M + i p w C + K.
CSpMat dynamic_stiffness(const SystemModel& model, double omega, int p);

/// Sampled AFT on relative displacements, one row per contact pair.
class Aft {
 public:
  Aft(const AftConfig& cfg, const std::vector<ContactPair>& pairs);

  /// rel: nc x (h + 1) harmonics of x_rel. Returns the contact-force harmonics.
  CMat forces(const CMat& rel) const;
  /// Harmonics 0..2h of the contact stiffness k_p H(x_rel >= gap); the
  /// derivative of the sampled contact force with respect to the response.
  CMat indicator(const CMat& rel) const;
  /// Forces and indicator from one time-domain pass.
  void evaluate(const CMat& rel, CMat& forces, CMat& indicator) const;

  const AftConfig& config() const { return cfg_; }

 private:
  AftConfig cfg_;
  Vec penalty_;
  Vec gap_;
  Vec cos_;  // cos(2 pi j / N)
  Vec sin_;
};

/// Contact-force harmonics of x_rel per pair; see Aft::forces.
CMat aft_coefficients(const CMat& rel, const std::vector<ContactPair>& pairs, const AftConfig& cfg);

/// Real packing of n x (h + 1) harmonics: [Re c_0, Re c_1, Im c_1, ..., Re c_h, Im c_h],
/// each block of length n.
Vec pack(const CMat& coeffs);
CMat unpack(const Vec& z, int rows, int h);

/// Harmonic-balance residual R_p = D_p x_p + B f_p - delta_p1 a q in real packing;
/// z packs the full response. Intended for verification on small models.
Vec full_residual(const SystemModel& model, double omega, const AftConfig& cfg, const Vec& z);
/// Jacobian dR/dz assembled from the AFT indicator harmonics.
Mat full_jacobian(const SystemModel& model, double omega, const AftConfig& cfg, const Vec& z);

struct NewtonOptions {
  int max_iterations = 50;
  int max_halvings = 10;
  double tolerance = 1e-9;  // on ||R|| / ||q|| of the recovered solution
};

/// Steady state at one frequency by Newton iterations on the contact-pair
/// relative displacements, with the remaining DoFs recovered exactly from
/// D_p^{-1}. Starts from the linear solution unless `initial` is given.
/// Throws ConvergenceError if the certified residual is not reached.
HarmonicSolution solve_mhb(const FrequencyOperator& op, double omega, const AftConfig& cfg,
                           const HarmonicSolution* initial = nullptr, const NewtonOptions& opts = {});
HarmonicSolution solve_mhb(const SystemModel& model, double omega, const AftConfig& cfg,
                           const HarmonicSolution* initial = nullptr, const NewtonOptions& opts = {});

/// Dense Newton on the full real residual; small models only.
HarmonicSolution solve_mhb_full(const SystemModel& model, double omega, const AftConfig& cfg,
                                const NewtonOptions& opts = {});

/// Ascending sweep with sequential continuation. Failed frequencies are kept
/// with converged = false and a message naming the frequency.
std::vector<HarmonicSolution> sweep(const FrequencyOperator& op, const std::vector<double>& omegas,
                                    const AftConfig& cfg, const NewtonOptions& opts = {});
std::vector<HarmonicSolution> sweep(const SystemModel& model, const std::vector<double>& omegas,
                                    const AftConfig& cfg, const NewtonOptions& opts = {});

/// Number of Newton solves started in this process.
long newton_call_count();

/// Independent re-evaluation of ||R|| / ||q|| for a full solution.
double certify(const SystemModel& model, const HarmonicSolution& sol, const AftConfig& cfg);

}  // namespace hotr::hbm
