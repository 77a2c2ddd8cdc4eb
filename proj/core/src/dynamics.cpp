#include "hotr/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace hotr {

// ---------------------------------------------------------------------------
// SystemModel helpers

SpMat SystemModel::contact_incidence() const {
  std::vector<Triplet> trips;
  for (int c = 0; c < pair_count(); ++c) {
    const auto& pr = contact_pairs[c];
    trips.emplace_back(pr.dof_plus, c, 1.0);
    if (!pr.grounded()) trips.emplace_back(pr.dof_minus, c, -1.0);
  }
  SpMat b(size(), pair_count());
  b.setFromTriplets(trips.begin(), trips.end());
  return b;
}

DofPartition SystemModel::partition() const {
  DofPartition part;
  std::vector<char> used(size(), 0);
  for (const auto& pr : contact_pairs) {
    part.crack_plus.push_back(pr.dof_plus);
    used[pr.dof_plus] = 1;
    if (!pr.grounded()) {
      part.crack_minus.push_back(pr.dof_minus);
      used[pr.dof_minus] = 1;
    }
  }
  for (int i = 0; i < size(); ++i)
    if (!used[i]) part.rest.push_back(i);
  return part;
}

void SystemModel::validate() const {
  const int n = size();
  if (n == 0) throw InvalidInput("system model has no degrees of freedom");
  if (stiffness.cols() != n || mass.rows() != n || mass.cols() != n || damping.rows() != n ||
      damping.cols() != n)
    throw InvalidInput("system matrices have inconsistent dimensions");
  if (force_pattern.size() != n) throw InvalidInput("force pattern length does not match model size");
  if (sensor_rows.rows() > 0 && sensor_rows.cols() != n)
    throw InvalidInput("sensor rows do not match model size");
  std::vector<char> used(n, 0);
  for (const auto& pr : contact_pairs) {
    if (pr.dof_plus < 0 || pr.dof_plus >= n || pr.dof_minus >= n)
      throw InvalidInput("contact pair references a DoF outside the model");
    if (pr.penalty <= 0.0) throw InvalidInput("contact penalty must be positive");
    if (used[pr.dof_plus] || (!pr.grounded() && used[pr.dof_minus]))
      throw InvalidInput("contact DoFs must be distinct across pairs");
    used[pr.dof_plus] = 1;
    if (!pr.grounded()) used[pr.dof_minus] = 1;
  }
}

SpMat closed_contact_stiffness(const SystemModel& model) {
  const SpMat b = model.contact_incidence();
  Vec k(model.pair_count());
  for (int c = 0; c < model.pair_count(); ++c) k[c] = model.contact_pairs[c].penalty;
  SpMat kc = b * k.asDiagonal() * b.transpose();
  return model.stiffness + kc;
}

Vec solve_static(const SystemModel& model, const Vec& load) {
  Eigen::SimplicialLDLT<SpMat> ldlt(model.stiffness);
  if (ldlt.info() != Eigen::Success) throw SolverFailure("static solve: stiffness factorization failed");
  Vec x = ldlt.solve(load);
  if (ldlt.info() != Eigen::Success) throw SolverFailure("static solve failed");
  return x;
}

// ---------------------------------------------------------------------------
// Eigen solvers

Vec EigenPairs::frequencies_hz() const {
  Vec f(eigenvalues.size());
  for (Eigen::Index i = 0; i < f.size(); ++i)
    f[i] = std::sqrt(std::max(eigenvalues[i], 0.0)) / (2.0 * kPi);
  return f;
}

namespace {

EigenPairs dense_eigenpairs(const Mat& k, const Mat& m, int count) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(k, m);
  if (es.info() != Eigen::Success) throw SolverFailure("dense generalized eigensolver failed");
  EigenPairs out;
  out.eigenvalues = es.eigenvalues().head(count);
  out.vectors = es.eigenvectors().leftCols(count);
  return out;
}

// Subspace iteration (Rayleigh-Ritz on K^{-1} M X).
EigenPairs subspace_eigenpairs(const SpMat& k, const SpMat& m, int count) {
  const int n = static_cast<int>(k.rows());
  const int q = std::min(n, std::max(2 * count, count + 8));

  Eigen::SimplicialLDLT<SpMat> ldlt(k);
  if (ldlt.info() != Eigen::Success)
    throw SolverFailure("eigensolver: stiffness factorization failed (singular stiffness?)");

  std::mt19937_64 rng(20240917);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Mat x(n, q);
  x.col(0) = m.diagonal();
  for (int j = 1; j < q; ++j)
    for (int i = 0; i < n; ++i) x(i, j) = uni(rng);

  Vec previous = Vec::Constant(count, 0.0);
  EigenPairs out;
  for (int it = 0; it < 500; ++it) {
    Mat mx = m * x;
    Mat y = ldlt.solve(mx);
    Mat kr = y.transpose() * mx;  // Y^T K Y = Y^T M X
    Mat mr = y.transpose() * (m * y);
    kr = 0.5 * (kr + kr.transpose()).eval();
    mr = 0.5 * (mr + mr.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(kr, mr);
    if (es.info() != Eigen::Success) throw SolverFailure("eigensolver: Ritz problem failed");
    x = y * es.eigenvectors();
    const Vec lam = es.eigenvalues().head(count);
    double change = 0.0;
    for (int i = 0; i < count; ++i)
      change = std::max(change, std::abs(lam[i] - previous[i]) / std::abs(lam[i]));
    previous = lam;
    if (change < 1e-14 && it > 2) break;
  }
  out.eigenvalues = previous;
  out.vectors = x.leftCols(count);
  return out;
}

}  // namespace

EigenPairs lowest_eigenpairs(const SpMat& stiffness, const SpMat& mass, int count) {
  const int n = static_cast<int>(stiffness.rows());
  if (count < 1) throw InvalidInput("eigenpair count must be positive");
  if (count > n) throw InvalidInput("requested more eigenpairs than free DoFs");
  if (n <= FrequencyOperator::kDenseLimit || 3 * count >= n)
    return dense_eigenpairs(Mat(stiffness), Mat(mass), count);
  return subspace_eigenpairs(stiffness, mass, count);
}

CSpMat dynamic_stiffness_at(const SystemModel& model, double s) {
  CSpMat d = model.stiffness.cast<Complex>();
  d += (-s * s) * model.mass.cast<Complex>();
  d += Complex(0.0, s) * model.damping.cast<Complex>();
  d.makeCompressed();
  return d;
}

// ---------------------------------------------------------------------------
// FrequencyOperator

struct DynamicInverse::Dense {
  Eigen::PartialPivLU<CMat> lu;
};

struct DynamicInverse::Sparse {
  Eigen::SparseLU<CSpMat, Eigen::COLAMDOrdering<int>> lu;
};

FrequencyOperator::FrequencyOperator(const SystemModel& model, Backend backend)
    : model_(&model), backend_(backend) {
  model.validate();
  const int n = model.size();
  force_port_ = model.force_pattern.real();
  if (model.force_pattern.imag().norm() > 0.0)
    throw InvalidInput("force pattern must be real (single-phase excitation)");
  contact_port_ = Mat(model.contact_incidence());
  sensor_port_ = model.sensor_rows.transpose();
  if (sensor_port_.rows() != n) sensor_port_.resize(n, 0);

  if (backend_ == Backend::Automatic) {
    if (n > kDenseLimit)
      backend_ = Backend::SparseLU;
    else
      backend_ = model.rayleigh ? Backend::Modal : Backend::DenseLU;
  }
  if (backend_ == Backend::Modal && !model.rayleigh)
    throw InvalidInput("modal backend requires Rayleigh damping");

  switch (backend_) {
    case Backend::Modal: {
      Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(Mat(model.stiffness), Mat(model.mass));
      if (es.info() != Eigen::Success) throw SolverFailure("modal decomposition failed");
      modes_ = es.eigenvectors();
      modal_stiffness_ = es.eigenvalues();
      modal_damping_ = (model.rayleigh_alpha + model.rayleigh_beta * modal_stiffness_.array()).matrix();
      projected_force_ = modes_.transpose() * force_port_;
      projected_contact_ = modes_.transpose() * contact_port_;
      projected_sensors_ = modes_.transpose() * sensor_port_;
      break;
    }
    case Backend::DenseLU:
      dense_mass_ = Mat(model.mass);
      dense_damping_ = Mat(model.damping);
      dense_stiffness_ = Mat(model.stiffness);
      break;
    default:
      break;
  }
}

const Mat& FrequencyOperator::port(Port p) const {
  switch (p) {
    case Port::Force:
      return force_port_;
    case Port::Contact:
      return contact_port_;
    case Port::Sensors:
      return sensor_port_;
  }
  return force_port_;
}

DynamicInverse FrequencyOperator::at(double s) const {
  DynamicInverse inv;
  inv.op_ = this;
  inv.s_ = s;
  switch (backend_) {
    case Backend::Modal: {
      const Eigen::Index k = modal_stiffness_.size();
      inv.modal_inverse_.resize(k);
      for (Eigen::Index i = 0; i < k; ++i) {
        const Complex d(modal_stiffness_[i] - s * s, s * modal_damping_[i]);
        if (std::abs(d) == 0.0) throw SolverFailure("dynamic stiffness is singular at this frequency");
        inv.modal_inverse_[i] = 1.0 / d;
      }
      break;
    }
    case Backend::DenseLU: {
      CMat d = dense_stiffness_.cast<Complex>();
      d += (-s * s) * dense_mass_.cast<Complex>();
      d += Complex(0.0, s) * dense_damping_.cast<Complex>();
      auto dense = std::make_shared<DynamicInverse::Dense>();
      dense->lu.compute(d);
      if (!(std::abs(dense->lu.determinant()) > 0.0))
        throw SolverFailure("dynamic stiffness is singular at this frequency");
      inv.dense_ = std::move(dense);
      break;
    }
    default: {
      auto sparse = std::make_shared<DynamicInverse::Sparse>();
      sparse->lu.compute(dynamic_stiffness_at(*model_, s));
      if (sparse->lu.info() != Eigen::Success)
        throw SolverFailure("sparse factorization of the dynamic stiffness failed");
      inv.sparse_ = std::move(sparse);
      break;
    }
  }
  return inv;
}

CMat DynamicInverse::solve(const CMat& rhs) const {
  if (!op_) throw InvalidInput("uninitialized dynamic inverse");
  if (dense_) return dense_->lu.solve(rhs);
  if (sparse_) {
    CMat x = sparse_->lu.solve(rhs);
    if (sparse_->lu.info() != Eigen::Success) throw SolverFailure("sparse solve failed");
    return x;
  }
  const CMat modal = op_->modes_.transpose().cast<Complex>() * rhs;
  return op_->modes_.cast<Complex>() * (modal_inverse_.asDiagonal() * modal);
}

CVec DynamicInverse::solve(const CVec& rhs) const {
  CMat m = rhs;
  return solve(m).col(0);
}

CMat DynamicInverse::transfer(Port out_port, Port in_port) const {
  if (!op_) throw InvalidInput("uninitialized dynamic inverse");
  if (!dense_ && !sparse_) {
    auto projected = [this](Port p) -> const Mat& {
      switch (p) {
        case Port::Force:
          return op_->projected_force_;
        case Port::Contact:
          return op_->projected_contact_;
        case Port::Sensors:
          return op_->projected_sensors_;
      }
      return op_->projected_force_;
    };
    const Mat& po = projected(out_port);
    const Mat& pi = projected(in_port);
    return po.transpose().cast<Complex>() * (modal_inverse_.asDiagonal() * pi.cast<Complex>());
  }
  const CMat x = solve(CMat(op_->port(in_port).cast<Complex>()));
  return op_->port(out_port).transpose().cast<Complex>() * x;
}

}  // namespace hotr
