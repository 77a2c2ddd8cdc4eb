#pragma once

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hotr/system.hpp"

/// Plane-stress finite-element model of a rectangular beam with an optional
/// breathing edge crack. Units: mm, N, tonne, s (so stresses are in MPa).
namespace hotr::fe {

struct Node {
  double x = 0.0;
  double y = 0.0;
};

/// Structured grid of 4-node quads; node (i, j) is column i, row j from the
/// bottom edge. A crack appends duplicate nodes after the grid nodes.
struct Mesh2D {
  std::vector<Node> nodes;
  std::vector<std::array<int, 4>> elements;  // counterclockwise
  int nx = 0;
  int ny = 0;
  double dx = 0.0;
  double dy = 0.0;

  /// (plus-face node, minus-face duplicate) from the top edge downwards.
  std::vector<std::pair<int, int>> crack_node_pairs;

  int grid_node(int i, int j) const { return j * (nx + 1) + i; }
  int element_at(int i, int j) const { return j * nx + i; }
  int grid_node_count() const { return (nx + 1) * (ny + 1); }
  double length() const { return nx * dx; }
  double height() const { return ny * dy; }
};

Mesh2D build_mesh(double length, double height, int nx, int ny);

/// Smallest Jacobian determinant over all elements and Gauss points.
double min_jacobian(const Mesh2D& mesh);

struct Material {
  double youngs_modulus = 2.1e5;  // MPa
  double density = 7.3e3;         // kg/m^3
  double poisson = 0.26;
  double thickness = 1.0;  // mm, out of plane

  void validate() const;
  /// Density in the consistent unit system (tonne/mm^3).
  double density_t_mm3() const { return density * 1e-12; }
};

/// Edge crack descending from the top surface along a vertical node line.
struct CrackSpec {
  int location_index = 0;  // vertical node line, 1 .. nx-1
  int depth_percent = 0;   // crack depth as percent of the beam height

  double normalized_location(int nx) const { return 2.0 * location_index / nx - 1.0; }
  int depth_elements(int ny) const;

  /// Nearest node line to a normalized location L_c in (-1, 1).
  static CrackSpec from_normalized(double normalized_location, int depth_percent, int nx);

  bool operator==(const CrackSpec&) const = default;
};

/// Duplicates the crack-line nodes and reconnects the elements right of the line.
Mesh2D insert_crack(const Mesh2D& mesh, const CrackSpec& crack);

struct Support {
  int node = -1;
  bool fix_x = false;
  bool fix_y = false;
};

/// Free-DoF numbering. Crack duplicate nodes get their own x DoF and share
/// the y DoF of their partner, so the faces can separate only normally.
struct DofMap {
  std::vector<std::array<int, 2>> node_dofs;  // -1: fixed or inactive
  int free_count = 0;

  int dof(int node, int dir) const { return node_dofs[node][dir]; }
};

/// Numbers the DoFs of every node touched by `elements` (all elements if empty).
DofMap number_dofs(const Mesh2D& mesh, std::span<const Support> supports,
                   std::span<const int> elements = {});

/// Element matrices of a bilinear quad (2x2 Gauss, plane stress, consistent mass).
struct ElementMatrices {
  Eigen::Matrix<double, 8, 8> stiffness;
  Eigen::Matrix<double, 8, 8> mass;
};
ElementMatrices element_matrices(const Mesh2D& mesh, int element, const Material& material);

SpMat assemble_stiffness(const Mesh2D& mesh, const Material& material, const DofMap& dofs,
                         std::span<const int> elements = {});
SpMat assemble_mass(const Mesh2D& mesh, const Material& material, const DofMap& dofs,
                    std::span<const int> elements = {});

/// x-strain gauge at an element centroid.
struct SensorSpec {
  int element = -1;
};

/// Row S with eps_xx(sensor) = S x over the free DoFs of `dofs`.
Vec strain_row(const Mesh2D& mesh, const DofMap& dofs, const SensorSpec& sensor);

/// End-moment load: horizontal nodal forces varying linearly over the height
/// of both end faces, unit magnitude at the top and bottom fibres.
Vec end_moment_pattern(const Mesh2D& mesh, const DofMap& dofs);

struct AssemblyOptions {
  double penalty = 0.0;  // N/mm per contact pair
  double rayleigh_alpha = 0.0;
  double rayleigh_beta = 0.0;
  double force_amplitude = 1.0;
  std::vector<Support> supports;
  std::vector<SensorSpec> sensors;
};

/// A full-order beam model together with its mesh bookkeeping.
struct BeamModel {
  Mesh2D mesh;
  DofMap dofs;
  std::optional<CrackSpec> crack;
  SystemModel system;
  std::vector<int> forcing_dofs;  // free DoFs carrying end-moment forces
};

/// Assembles K, M and C = alpha M + beta K, inserting `crack` (if any) as
/// contact pairs on the crack-face x DoFs.
BeamModel assemble(const Mesh2D& mesh, const Material& material,
                   const std::optional<CrackSpec>& crack, const AssemblyOptions& options);

/// Basis T (n x (n - nc)) that ties every minus-face DoF to its plus partner.
SpMat closed_crack_basis(const SystemModel& model);

struct Mode {
  double frequency_hz = 0.0;
  Vec shape;  // mass-normalized, model coordinates
};

/// Lowest modes; crack pairs, if any, are treated as closed.
std::vector<Mode> eigenmodes(const SystemModel& model, int count);

/// Fraction of modal kinetic energy carried by y DoFs (1 for a pure transverse mode).
double transverse_fraction(const Mesh2D& mesh, const DofMap& dofs, const SystemModel& model,
                           const Vec& shape);

struct BeamConfig {
  double length = 1200.0;
  double height = 200.0;
  int nx = 120;
  int ny = 20;
  Material material;
  std::optional<double> penalty;  // default: 100 * E * t * dy / dx
  double damping_ratio = 0.002;
  double midspan_deflection = 2.0;  // mm, static, at peak load
  std::vector<int> sensor_columns{24, 48, 72, 96};  // top element row

  void validate() const;
};

/// Healthy reference beam: fixes the Rayleigh coefficients (first two bending
/// modes) and the load amplitude once, then assembles healthy or cracked
/// variants that share them.
class BeamProblem {
 public:
  explicit BeamProblem(BeamConfig config);

  const BeamConfig& config() const { return config_; }
  const Mesh2D& mesh() const { return mesh_; }
  const Material& material() const { return config_.material; }

  double penalty() const { return penalty_; }
  double rayleigh_alpha() const { return alpha_; }
  double rayleigh_beta() const { return beta_; }
  double force_amplitude() const { return amplitude_; }
  /// Healthy frequencies [Hz] of the two bending modes used for damping.
  std::array<double, 2> bending_frequencies_hz() const { return bending_hz_; }

  std::vector<Support> supports() const;
  std::vector<SensorSpec> sensors() const;
  AssemblyOptions assembly_options() const;

  BeamModel assemble(const std::optional<CrackSpec>& crack = std::nullopt) const;

  /// Valid crack location indices (interior node lines).
  int min_location() const { return 1; }
  int max_location() const { return config_.nx - 1; }

  /// Stable fingerprint of everything the assembly depends on.
  std::uint64_t fingerprint() const;

 private:
  BeamConfig config_;
  Mesh2D mesh_;
  double penalty_ = 0.0;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  double amplitude_ = 1.0;
  std::array<double, 2> bending_hz_{};
};

}  // namespace hotr::fe
