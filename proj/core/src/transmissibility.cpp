#include "hotr/transmissibility.hpp"

#include <cmath>

#include <Eigen/SparseLU>

namespace hotr::tr {

const char* method_name(Method method) {
  return method == Method::Nonlinear ? "nonlinear" : "surrogate";
}

std::vector<SensorPair> ordered_pairs(int sensor_count) {
  std::vector<SensorPair> out;
  for (int m = 0; m < sensor_count; ++m)
    for (int n = 0; n < sensor_count; ++n)
      if (m != n) out.push_back({m, n});
  return out;
}

std::vector<SensorPair> unordered_pairs(int sensor_count) {
  std::vector<SensorPair> out;
  for (int m = 0; m < sensor_count; ++m)
    for (int n = m + 1; n < sensor_count; ++n) out.push_back({m, n});
  return out;
}

std::vector<TransmissibilityRecord> ratios(const CVec& values, double reference, int order, double omega,
                                           const std::vector<SensorPair>& pairs, Method method) {
  const double floor = kDenominatorFloor * reference;
  std::vector<TransmissibilityRecord> out;
  out.reserve(pairs.size());
  for (const auto& pr : pairs) {
    if (pr.m < 0 || pr.n < 0 || pr.m >= values.size() || pr.n >= values.size())
      throw InvalidInput("sensor pair refers to a missing sensor");
    TransmissibilityRecord rec;
    rec.order = order;
    rec.pair = pr;
    rec.omega = omega;
    rec.method = method;
    const Complex den = values[pr.n];
    if (!(reference > 0.0) || !(std::abs(den) > floor))
      throw UndefinedTransmissibility("order-" + std::to_string(order) + " output of sensor " +
                                          std::to_string(pr.n) + " is below the floor",
                                      pr.n);
    rec.value = pr.m == pr.n ? Complex(1.0, 0.0) : values[pr.m] / den;
    out.push_back(rec);
  }
  return out;
}

std::vector<TransmissibilityRecord> tr_nonlinear(const hbm::HarmonicSolution& sol, const Mat& sensor_rows,
                                                 int p, const std::vector<SensorPair>& pairs) {
  if (!sol.converged) throw InvalidInput("transmissibility needs a converged solution");
  if (p < 1 || p > sol.h) throw InvalidInput("transmissibility order outside the harmonic range");
  double reference = 0.0;
  for (int q = 1; q <= sol.h; ++q) reference = std::max(reference, sol.output(sensor_rows, q).cwiseAbs().maxCoeff());
  return ratios(sol.output(sensor_rows, p), reference, p, sol.omega, pairs, Method::Nonlinear);
}

ClosedCrackSolve solve_closed_crack(const SystemModel& model, double omega) {
  model.validate();
  if (!model.cracked()) throw InvalidInput("closed-crack solve needs a cracked model");
  const int n = model.size();
  const int nc = model.pair_count();
  const SpMat b = model.contact_incidence();
  const CSpMat d = dynamic_stiffness_at(model, omega);

  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(d.nonZeros() + 4 * nc);
  for (int k = 0; k < d.outerSize(); ++k)
    for (CSpMat::InnerIterator it(d, k); it; ++it) trips.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < b.outerSize(); ++k)
    for (SpMat::InnerIterator it(b, k); it; ++it) {
      trips.emplace_back(it.row(), n + it.col(), it.value());
      trips.emplace_back(n + it.col(), it.row(), it.value());
    }
  CSpMat aug(n + nc, n + nc);
  aug.setFromTriplets(trips.begin(), trips.end());
  aug.makeCompressed();
  Eigen::SparseLU<CSpMat, Eigen::COLAMDOrdering<int>> lu(aug);
  if (lu.info() != Eigen::Success) throw SolverFailure("closed-crack saddle system is singular");
  CVec rhs = CVec::Zero(n + nc);
  rhs.head(n) = model.force_pattern;
  const CVec sol = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !sol.allFinite()) throw SolverFailure("closed-crack solve failed");

  ClosedCrackSolve out;
  out.omega = omega;
  out.response = sol.head(n);
  out.lambda = sol.tail(nc);
  out.incidence = b;
  const double xn = out.response.norm();
  out.compatibility_residual = xn > 0.0 ? (b.transpose().cast<Complex>() * out.response).norm() / xn : 0.0;
  return out;
}

ClosedCrackSolve solve_closed_crack(const FrequencyOperator& op, double omega) {
  const SystemModel& model = op.model();
  if (!model.cracked()) throw InvalidInput("closed-crack solve needs a cracked model");
  const DynamicInverse inv = op.at(omega);
  const CMat g = inv.transfer(Port::Contact, Port::Contact);
  Eigen::FullPivLU<CMat> lu(g);
  if (!lu.isInvertible()) throw SolverFailure("closed-crack Schur complement is singular");
  const CMat dinv_b = inv.solve(CMat(op.port(Port::Contact).cast<Complex>()));

  ClosedCrackSolve out;
  out.omega = omega;
  out.incidence = model.contact_incidence();
  out.psi_cr = lu.solve(CMat(dinv_b.transpose()));
  out.lambda = lu.solve(CVec(inv.transfer(Port::Contact, Port::Force).col(0)));
  return out;
}

CMat surrogate_outputs(const FrequencyOperator& op, double omega, const std::vector<int>& orders) {
  const SystemModel& model = op.model();
  if (!model.cracked()) throw UndefinedTransmissibility("surrogate needs crack faces; model is healthy", -1);
  if (model.sensor_count() == 0) throw InvalidInput("model has no sensors");
  const DynamicInverse base = op.at(omega);
  const CMat g = base.transfer(Port::Contact, Port::Contact);
  Eigen::PartialPivLU<CMat> lu(g);
  const CVec lambda = lu.solve(CVec(base.transfer(Port::Contact, Port::Force).col(0)));
  if (!lambda.allFinite()) throw SolverFailure("closed-crack Schur complement is singular");

  CMat out(model.sensor_count(), static_cast<Eigen::Index>(orders.size()));
  for (std::size_t k = 0; k < orders.size(); ++k) {
    const int p = orders[k];
    if (p < 1) throw InvalidInput("transmissibility order must be at least 1");
    const DynamicInverse inv = p == 1 ? base : op.at(p * omega);
    out.col(static_cast<Eigen::Index>(k)) = inv.transfer(Port::Sensors, Port::Contact) * lambda;
  }
  return out;
}

std::vector<TransmissibilityRecord> tr_surrogate(const FrequencyOperator& op, double omega, int p,
                                                 const std::vector<SensorPair>& pairs) {
  const CVec v = surrogate_outputs(op, omega, {p}).col(0);
  return ratios(v, v.cwiseAbs().maxCoeff(), p, omega, pairs, Method::Surrogate);
}

double rmse(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  if (a.size() != b.size() || a.empty()) throw InvalidInput("RMSE needs two aligned, non-empty curves");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += std::norm(a[k] - b[k]);
  return std::sqrt(acc / double(a.size()));
}

}  // namespace hotr::tr
