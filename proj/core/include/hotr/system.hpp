#pragma once

#include <vector>

#include "hotr/common.hpp"

namespace hotr {

/// Node-to-node unilateral penalty contact between two crack-face DoFs.
///
/// The relative coordinate is x_rel = x[dof_plus] - x[dof_minus]; the pair
/// transmits k_p * x_rel while x_rel >= gap and nothing otherwise. A negative
/// dof_minus grounds the pair (x_rel = x[dof_plus]), which is how the
/// single-DoF unilateral spring is expressed.
struct ContactPair {
  int dof_plus = -1;
  int dof_minus = -1;
  double penalty = 0.0;
  double gap = 0.0;

  bool grounded() const { return dof_minus < 0; }
};

/// Index sets (c+, c-, r) of the crack-face partition.
struct DofPartition {
  std::vector<int> crack_plus;
  std::vector<int> crack_minus;
  std::vector<int> rest;
};

/// Linear structural model plus its crack-face contact pairs.
///
/// Matrices act on free coordinates only (boundary conditions already
/// eliminated). The excitation is q(t) = a (q e^{i w t} + c.c.) with a the
/// force amplitude and q the unit spatial pattern, so that everything that is
/// insensitive to a (transmissibility) can work on the pattern alone.
struct SystemModel {
  SpMat mass;
  SpMat damping;
  SpMat stiffness;

  /// Set when damping == rayleigh_alpha * mass + rayleigh_beta * stiffness.
  bool rayleigh = false;
  double rayleigh_alpha = 0.0;
  double rayleigh_beta = 0.0;

  std::vector<ContactPair> contact_pairs;

  CVec force_pattern;
  double force_amplitude = 1.0;

  /// One row per strain sensor: strain = sensor_rows.row(s) * x.
  Mat sensor_rows;

  int size() const { return static_cast<int>(stiffness.rows()); }
  int sensor_count() const { return static_cast<int>(sensor_rows.rows()); }
  int pair_count() const { return static_cast<int>(contact_pairs.size()); }
  bool cracked() const { return !contact_pairs.empty(); }

  CVec force() const { return force_amplitude * force_pattern; }

  /// Signed incidence B (n x nc): +1 at dof_plus, -1 at dof_minus.
  SpMat contact_incidence() const;

  DofPartition partition() const;

  /// Throws InvalidInput on inconsistent dimensions or contact data.
  void validate() const;
};

/// Sum of K plus the penalty springs of every pair forced closed.
SpMat closed_contact_stiffness(const SystemModel& model);

/// Static displacement K^{-1} load (crack faces open, no contact).
Vec solve_static(const SystemModel& model, const Vec& load);

}  // namespace hotr
