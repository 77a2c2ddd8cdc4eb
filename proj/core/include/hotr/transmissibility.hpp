#pragma once

#include <vector>

#include "hotr/dynamics.hpp"
#include "hotr/hbm.hpp"
#include "hotr/system.hpp"

/// Higher-order transmissibility Tr_p^(m,n) = e_p^(m) / e_p^(n) between sensor
/// outputs, from nonlinear harmonic-balance solutions or from the linear
/// closed-crack surrogate.
namespace hotr::tr {

enum class Method { Nonlinear, Surrogate };
const char* method_name(Method method);

struct SensorPair {
  int m = 0;  // numerator sensor
  int n = 0;  // denominator sensor
  bool operator==(const SensorPair&) const = default;
};

/// All (m, n) with m != n.
std::vector<SensorPair> ordered_pairs(int sensor_count);
/// All (m, n) with m < n.
std::vector<SensorPair> unordered_pairs(int sensor_count);

struct TransmissibilityRecord {
  int order = 0;
  SensorPair pair;
  double omega = 0.0;
  Complex value;
  Method method = Method::Nonlinear;
};

/// Raised when a denominator output vanishes (below the relative floor), which
/// for p >= 2 means the structure shows no higher harmonics at that sensor.
class UndefinedTransmissibility : public Error {
 public:
  UndefinedTransmissibility(const std::string& what, int sensor) : Error(what), sensor_(sensor) {}
  int sensor() const noexcept { return sensor_; }

 private:
  int sensor_;
};

inline constexpr double kDenominatorFloor = 1e-14;

/// Ratios of `values` (one per sensor) for every pair; the floor is relative to `reference`.
std::vector<TransmissibilityRecord> ratios(const CVec& values, double reference, int order, double omega,
                                           const std::vector<SensorPair>& pairs, Method method);

/// Nonlinear transmissibility of order p from a converged solution; the floor
/// is relative to the largest sensor harmonic over all orders.
std::vector<TransmissibilityRecord> tr_nonlinear(const hbm::HarmonicSolution& sol, const Mat& sensor_rows,
                                                 int p, const std::vector<SensorPair>& pairs);

/// Closed-crack (compatibility-enforced) response at the fundamental, driven
/// by the unit force pattern.
struct ClosedCrackSolve {
  double omega = 0.0;
  CVec lambda;    // crack-face constraint forces
  CMat psi_cr;    // lambda = psi_cr * q (Schur path only)
  SpMat incidence;
  CVec response;  // full response; empty on the Schur path
  double compatibility_residual = 0.0;  // ||B^T x|| / ||x|| (bordered path)
};

/// Direct factorization of [[D_1, B], [B^T, 0]].
ClosedCrackSolve solve_closed_crack(const SystemModel& model, double omega);
/// Schur complement: lambda = (B^T D_1^{-1} B)^{-1} B^T D_1^{-1} q.
ClosedCrackSolve solve_closed_crack(const FrequencyOperator& op, double omega);

/// Surrogate outputs S D_p^{-1} B lambda for each requested order.
CMat surrogate_outputs(const FrequencyOperator& op, double omega, const std::vector<int>& orders);

/// Surrogate transmissibility for each order; no harmonic-balance iteration.
std::vector<TransmissibilityRecord> tr_surrogate(const FrequencyOperator& op, double omega, int p,
                                                 const std::vector<SensorPair>& pairs);

/// RMSE over frequency of |Tr_a - Tr_b| for one pair; curves must align.
double rmse(const std::vector<Complex>& a, const std::vector<Complex>& b);

}  // namespace hotr::tr
