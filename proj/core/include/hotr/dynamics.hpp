#pragma once

#include <memory>
#include <variant>

#include "hotr/system.hpp"

namespace hotr {

/// Mass-normalized generalized eigenpairs K v = lambda M v, ascending.
struct EigenPairs {
  Vec eigenvalues;
  Mat vectors;

  Vec frequencies_hz() const;
};

/// Lowest `count` eigenpairs of the symmetric pencil (K, M).
///
/// Small problems go through a dense solver; large sparse ones use subspace
/// iteration with a sparse LDLT of K, so K must be nonsingular.
EigenPairs lowest_eigenpairs(const SpMat& stiffness, const SpMat& mass, int count);

/// Complex dynamic stiffness -(s^2) M + i s C + K at circular frequency s.
CSpMat dynamic_stiffness_at(const SystemModel& model, double s);

/// Selects which fixed right-hand side (or output map) a transfer refers to.
enum class Port { Force, Contact, Sensors };

class FrequencyOperator;

/// D(s)^{-1} for one circular frequency s; cheap to copy.
class DynamicInverse {
 public:
  CMat solve(const CMat& rhs) const;
  CVec solve(const CVec& rhs) const;

  /// out_port^T D(s)^{-1} in_port.
  CMat transfer(Port out_port, Port in_port) const;

  double frequency() const { return s_; }

 private:
  friend class FrequencyOperator;
  struct Dense;
  struct Sparse;

  const FrequencyOperator* op_ = nullptr;
  double s_ = 0.0;
  // modal backend: reciprocal modal dynamic stiffness
  CVec modal_inverse_;
  std::shared_ptr<const Dense> dense_;
  std::shared_ptr<const Sparse> sparse_;
};

/// Frequency-domain solves against one immutable SystemModel.
///
/// Three backends: modal (dense, Rayleigh damping: diagonal in modal
/// coordinates), dense LU and sparse LU. The choice is automatic unless
/// forced. The port matrices (force pattern, contact incidence, sensor rows)
/// are projected once so that the small transfer matrices used by the
/// harmonic balance and transmissibility code avoid full-size solves.
class FrequencyOperator {
 public:
  enum class Backend { Automatic, Modal, DenseLU, SparseLU };

  explicit FrequencyOperator(const SystemModel& model, Backend backend = Backend::Automatic);

  DynamicInverse at(double s) const;

  Backend backend() const { return backend_; }
  const SystemModel& model() const { return *model_; }
  const Mat& port(Port p) const;

  static constexpr int kDenseLimit = 600;

 private:
  friend class DynamicInverse;

  const SystemModel* model_;
  Backend backend_;
  Mat force_port_;
  Mat contact_port_;
  Mat sensor_port_;

  // modal backend
  Vec modal_stiffness_;
  Vec modal_damping_;
  Mat modes_;
  Mat projected_force_;
  Mat projected_contact_;
  Mat projected_sensors_;

  // dense LU backend
  Mat dense_mass_;
  Mat dense_damping_;
  Mat dense_stiffness_;
};

}  // namespace hotr
