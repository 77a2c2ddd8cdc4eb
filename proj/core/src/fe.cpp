#include "hotr/fe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "hotr/dynamics.hpp"

namespace hotr::fe {

namespace {

constexpr double kGauss = 0.57735026918962576451;  // 1/sqrt(3)
constexpr std::array<double, 4> kXi{-1.0, 1.0, 1.0, -1.0};
constexpr std::array<double, 4> kEta{-1.0, -1.0, 1.0, 1.0};

struct ShapeGradients {
  Eigen::Matrix<double, 4, 1> n;
  Eigen::Matrix<double, 2, 4> dn_dx;  // rows: d/dx, d/dy
  double det_j = 0.0;
};

ShapeGradients shape_at(const Mesh2D& mesh, const std::array<int, 4>& conn, double xi, double eta) {
  ShapeGradients sg;
  Eigen::Matrix<double, 2, 4> dn_dxi;
  for (int a = 0; a < 4; ++a) {
    sg.n[a] = 0.25 * (1 + xi * kXi[a]) * (1 + eta * kEta[a]);
    dn_dxi(0, a) = 0.25 * kXi[a] * (1 + eta * kEta[a]);
    dn_dxi(1, a) = 0.25 * kEta[a] * (1 + xi * kXi[a]);
  }
  Eigen::Matrix<double, 4, 2> coords;
  for (int a = 0; a < 4; ++a) {
    coords(a, 0) = mesh.nodes[conn[a]].x;
    coords(a, 1) = mesh.nodes[conn[a]].y;
  }
  const Eigen::Matrix2d jac = dn_dxi * coords;
  sg.det_j = jac.determinant();
  sg.dn_dx = jac.inverse() * dn_dxi;
  return sg;
}

std::vector<int> all_elements(const Mesh2D& mesh, std::span<const int> elements) {
  if (!elements.empty()) return {elements.begin(), elements.end()};
  std::vector<int> all(mesh.elements.size());
  for (std::size_t e = 0; e < all.size(); ++e) all[e] = static_cast<int>(e);
  return all;
}

std::array<int, 8> element_dofs(const Mesh2D& mesh, const DofMap& dofs, int element) {
  std::array<int, 8> out{};
  for (int a = 0; a < 4; ++a) {
    const int node = mesh.elements[element][a];
    out[2 * a] = dofs.dof(node, 0);
    out[2 * a + 1] = dofs.dof(node, 1);
  }
  return out;
}

template <typename ElementFn>
SpMat assemble_with(const Mesh2D& mesh, const DofMap& dofs, std::span<const int> elements,
                    ElementFn&& fn) {
  std::vector<Triplet> trips;
  const auto list = all_elements(mesh, elements);
  trips.reserve(list.size() * 64);
  for (int e : list) {
    const Eigen::Matrix<double, 8, 8> ke = fn(e);
    const auto ed = element_dofs(mesh, dofs, e);
    for (int a = 0; a < 8; ++a) {
      if (ed[a] < 0) continue;
      for (int b = 0; b < 8; ++b) {
        if (ed[b] < 0) continue;
        trips.emplace_back(ed[a], ed[b], ke(a, b));
      }
    }
  }
  SpMat k(dofs.free_count, dofs.free_count);
  k.setFromTriplets(trips.begin(), trips.end());
  k.makeCompressed();
  return k;
}

}  // namespace

Mesh2D build_mesh(double length, double height, int nx, int ny) {
  if (!(length > 0.0) || !(height > 0.0)) throw InvalidInput("beam dimensions must be positive");
  if (nx < 1 || ny < 1) throw InvalidInput("element counts must be at least 1");
  Mesh2D mesh;
  mesh.nx = nx;
  mesh.ny = ny;
  mesh.dx = length / nx;
  mesh.dy = height / ny;
  mesh.nodes.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) mesh.nodes.push_back({i * mesh.dx, j * mesh.dy});
  mesh.elements.reserve(nx * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      mesh.elements.push_back({mesh.grid_node(i, j), mesh.grid_node(i + 1, j),
                               mesh.grid_node(i + 1, j + 1), mesh.grid_node(i, j + 1)});
  return mesh;
}

double min_jacobian(const Mesh2D& mesh) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& conn : mesh.elements)
    for (int g = 0; g < 4; ++g)
      m = std::min(m, shape_at(mesh, conn, kXi[g] * kGauss, kEta[g] * kGauss).det_j);
  return m;
}

void Material::validate() const {
  if (!(youngs_modulus > 0.0)) throw InvalidInput("Young's modulus must be positive");
  if (!(density > 0.0)) throw InvalidInput("density must be positive");
  if (!(poisson >= 0.0 && poisson < 0.5)) throw InvalidInput("Poisson ratio must lie in [0, 0.5)");
  if (!(thickness > 0.0)) throw InvalidInput("thickness must be positive");
}

int CrackSpec::depth_elements(int ny) const {
  const int scaled = depth_percent * ny;
  if (depth_percent <= 0 || scaled % 100 != 0)
    throw InvalidInput("crack depth " + std::to_string(depth_percent) +
                       "% does not align with the element rows");
  return scaled / 100;
}

CrackSpec CrackSpec::from_normalized(double normalized_location, int depth_percent, int nx) {
  if (!(normalized_location > -1.0 && normalized_location < 1.0))
    throw InvalidInput("normalized crack location must lie in (-1, 1)");
  CrackSpec c;
  c.location_index = static_cast<int>(std::lround((normalized_location + 1.0) * nx / 2.0));
  c.depth_percent = depth_percent;
  return c;
}

Mesh2D insert_crack(const Mesh2D& mesh, const CrackSpec& crack) {
  if (!mesh.crack_node_pairs.empty()) throw InvalidInput("mesh already contains a crack");
  if (crack.location_index < 1 || crack.location_index > mesh.nx - 1)
    throw InvalidInput("crack location index must address an interior node line");
  const int depth = crack.depth_elements(mesh.ny);
  if (depth > mesh.ny - 1) throw InvalidInput("through-cracks are not supported");

  Mesh2D out = mesh;
  const int i = crack.location_index;
  std::vector<int> duplicate_of(mesh.nodes.size(), -1);
  for (int k = 0; k < depth; ++k) {
    const int j = mesh.ny - k;
    const int original = mesh.grid_node(i, j);
    const int dup = static_cast<int>(out.nodes.size());
    out.nodes.push_back(mesh.nodes[original]);
    duplicate_of[original] = dup;
    out.crack_node_pairs.emplace_back(original, dup);
  }
  // Elements right of the crack line take the duplicates.
  for (int j = mesh.ny - depth; j < mesh.ny; ++j) {
    auto& conn = out.elements[mesh.element_at(i, j)];
    for (int a : {0, 3})
      if (duplicate_of[conn[a]] >= 0) conn[a] = duplicate_of[conn[a]];
  }
  return out;
}

DofMap number_dofs(const Mesh2D& mesh, std::span<const Support> supports,
                   std::span<const int> elements) {
  const std::size_t nn = mesh.nodes.size();
  std::vector<char> active(nn, 0);
  for (int e : all_elements(mesh, elements))
    for (int node : mesh.elements[e]) active[node] = 1;

  std::vector<char> fix_x(nn, 0), fix_y(nn, 0);
  for (const auto& s : supports) {
    if (s.node < 0 || static_cast<std::size_t>(s.node) >= nn) throw InvalidInput("support node out of range");
    fix_x[s.node] |= s.fix_x;
    fix_y[s.node] |= s.fix_y;
  }
  std::vector<int> partner(nn, -1);
  for (const auto& [plus, minus] : mesh.crack_node_pairs) partner[minus] = plus;

  DofMap map;
  map.node_dofs.assign(nn, {-1, -1});
  int next = 0;
  for (std::size_t n = 0; n < nn; ++n) {
    if (!active[n]) continue;
    if (!fix_x[n]) map.node_dofs[n][0] = next++;
    if (partner[n] >= 0) {
      map.node_dofs[n][1] = map.node_dofs[partner[n]][1];
      if (!active[partner[n]]) map.node_dofs[n][1] = next++;
    } else if (!fix_y[n]) {
      map.node_dofs[n][1] = next++;
    }
  }
  map.free_count = next;
  return map;
}

ElementMatrices element_matrices(const Mesh2D& mesh, int element, const Material& material) {
  const auto& conn = mesh.elements[element];
  const double e = material.youngs_modulus;
  const double nu = material.poisson;
  const double t = material.thickness;
  const double rho = material.density_t_mm3();

  Eigen::Matrix3d d;
  d << 1, nu, 0, nu, 1, 0, 0, 0, 0.5 * (1 - nu);
  d *= e / (1 - nu * nu);

  ElementMatrices em;
  em.stiffness.setZero();
  em.mass.setZero();
  for (int g = 0; g < 4; ++g) {
    const auto sg = shape_at(mesh, conn, kXi[g] * kGauss, kEta[g] * kGauss);
    if (!(sg.det_j > 0.0)) throw InvalidInput("inverted element in mesh");
    Eigen::Matrix<double, 3, 8> b = Eigen::Matrix<double, 3, 8>::Zero();
    Eigen::Matrix<double, 2, 8> n = Eigen::Matrix<double, 2, 8>::Zero();
    for (int a = 0; a < 4; ++a) {
      b(0, 2 * a) = sg.dn_dx(0, a);
      b(1, 2 * a + 1) = sg.dn_dx(1, a);
      b(2, 2 * a) = sg.dn_dx(1, a);
      b(2, 2 * a + 1) = sg.dn_dx(0, a);
      n(0, 2 * a) = sg.n[a];
      n(1, 2 * a + 1) = sg.n[a];
    }
    em.stiffness += b.transpose() * d * b * (sg.det_j * t);
    em.mass += n.transpose() * n * (rho * sg.det_j * t);
  }
  return em;
}

SpMat assemble_stiffness(const Mesh2D& mesh, const Material& material, const DofMap& dofs,
                         std::span<const int> elements) {
  return assemble_with(mesh, dofs, elements,
                       [&](int e) { return element_matrices(mesh, e, material).stiffness; });
}

SpMat assemble_mass(const Mesh2D& mesh, const Material& material, const DofMap& dofs,
                    std::span<const int> elements) {
  return assemble_with(mesh, dofs, elements,
                       [&](int e) { return element_matrices(mesh, e, material).mass; });
}

Vec strain_row(const Mesh2D& mesh, const DofMap& dofs, const SensorSpec& sensor) {
  if (sensor.element < 0 || static_cast<std::size_t>(sensor.element) >= mesh.elements.size())
    throw InvalidInput("sensor element does not exist");
  const auto& conn = mesh.elements[sensor.element];
  const auto sg = shape_at(mesh, conn, 0.0, 0.0);
  Vec row = Vec::Zero(dofs.free_count);
  for (int a = 0; a < 4; ++a) {
    const int d = dofs.dof(conn[a], 0);
    if (d >= 0) row[d] += sg.dn_dx(0, a);
  }
  return row;
}

Vec end_moment_pattern(const Mesh2D& mesh, const DofMap& dofs) {
  Vec p = Vec::Zero(dofs.free_count);
  const double half = 0.5 * mesh.height();
  for (int j = 0; j <= mesh.ny; ++j) {
    const double y = j * mesh.dy;
    const double shape = (y - half) / half;
    const int left = dofs.dof(mesh.grid_node(0, j), 0);
    const int right = dofs.dof(mesh.grid_node(mesh.nx, j), 0);
    if (left >= 0) p[left] += -shape;
    if (right >= 0) p[right] += shape;
  }
  return p;
}

BeamModel assemble(const Mesh2D& mesh, const Material& material,
                   const std::optional<CrackSpec>& crack, const AssemblyOptions& options) {
  material.validate();
  BeamModel bm;
  bm.mesh = crack ? insert_crack(mesh, *crack) : mesh;
  bm.crack = crack;
  bm.dofs = number_dofs(bm.mesh, options.supports);

  SystemModel& sys = bm.system;
  sys.stiffness = assemble_stiffness(bm.mesh, material, bm.dofs);
  sys.mass = assemble_mass(bm.mesh, material, bm.dofs);
  sys.damping = options.rayleigh_alpha * sys.mass + options.rayleigh_beta * sys.stiffness;
  sys.rayleigh = true;
  sys.rayleigh_alpha = options.rayleigh_alpha;
  sys.rayleigh_beta = options.rayleigh_beta;

  if (crack) {
    if (!(options.penalty > 0.0)) throw InvalidInput("contact penalty must be positive");
    for (const auto& [plus, minus] : bm.mesh.crack_node_pairs)
      sys.contact_pairs.push_back({bm.dofs.dof(plus, 0), bm.dofs.dof(minus, 0), options.penalty, 0.0});
  }

  const Vec pattern = end_moment_pattern(bm.mesh, bm.dofs);
  sys.force_pattern = pattern.cast<Complex>();
  sys.force_amplitude = options.force_amplitude;
  for (int i = 0; i < pattern.size(); ++i)
    if (pattern[i] != 0.0) bm.forcing_dofs.push_back(i);

  sys.sensor_rows.resize(static_cast<Eigen::Index>(options.sensors.size()), bm.dofs.free_count);
  for (std::size_t s = 0; s < options.sensors.size(); ++s)
    sys.sensor_rows.row(static_cast<Eigen::Index>(s)) =
        strain_row(bm.mesh, bm.dofs, options.sensors[s]).transpose();
  sys.validate();
  return bm;
}

SpMat closed_crack_basis(const SystemModel& model) {
  const int n = model.size();
  std::vector<int> merged_into(n, -1);
  for (const auto& pr : model.contact_pairs)
    if (!pr.grounded()) merged_into[pr.dof_minus] = pr.dof_plus;
  std::vector<int> column(n, -1);
  int next = 0;
  for (int i = 0; i < n; ++i)
    if (merged_into[i] < 0) column[i] = next++;
  std::vector<Triplet> trips;
  for (int i = 0; i < n; ++i)
    trips.emplace_back(i, merged_into[i] < 0 ? column[i] : column[merged_into[i]], 1.0);
  SpMat t(n, next);
  t.setFromTriplets(trips.begin(), trips.end());
  return t;
}

std::vector<Mode> eigenmodes(const SystemModel& model, int count) {
  EigenPairs ep;
  SpMat basis;
  if (model.cracked()) {
    basis = closed_crack_basis(model);
    const SpMat k = basis.transpose() * model.stiffness * basis;
    const SpMat m = basis.transpose() * model.mass * basis;
    ep = lowest_eigenpairs(k, m, count);
  } else {
    ep = lowest_eigenpairs(model.stiffness, model.mass, count);
  }
  std::vector<Mode> modes(count);
  const Vec f = ep.frequencies_hz();
  for (int i = 0; i < count; ++i) {
    modes[i].frequency_hz = f[i];
    modes[i].shape = model.cracked() ? Vec(basis * ep.vectors.col(i)) : Vec(ep.vectors.col(i));
  }
  return modes;
}

double transverse_fraction(const Mesh2D& mesh, const DofMap& dofs, const SystemModel& model,
                           const Vec& shape) {
  std::vector<char> is_y(dofs.free_count, 0);
  for (std::size_t n = 0; n < mesh.nodes.size(); ++n)
    if (dofs.node_dofs[n][1] >= 0) is_y[dofs.node_dofs[n][1]] = 1;
  const Vec md = model.mass.diagonal();
  double ey = 0.0, total = 0.0;
  for (int i = 0; i < shape.size(); ++i) {
    const double e = md[i] * shape[i] * shape[i];
    total += e;
    if (is_y[i]) ey += e;
  }
  return total > 0.0 ? ey / total : 0.0;
}

// ---------------------------------------------------------------------------

void BeamConfig::validate() const {
  if (!(length > 0.0) || !(height > 0.0)) throw InvalidInput("beam dimensions must be positive");
  if (nx < 2 || ny < 2) throw InvalidInput("beam grid needs at least 2x2 elements");
  material.validate();
  if (penalty && !(*penalty > 0.0)) throw InvalidInput("penalty must be positive");
  if (!(damping_ratio >= 0.0)) throw InvalidInput("damping ratio must be non-negative");
  if (!(midspan_deflection > 0.0)) throw InvalidInput("midspan deflection must be positive");
  for (int c : sensor_columns)
    if (c < 0 || c >= nx) throw InvalidInput("sensor column outside the beam");
}

BeamProblem::BeamProblem(BeamConfig config) : config_(std::move(config)) {
  config_.validate();
  mesh_ = build_mesh(config_.length, config_.height, config_.nx, config_.ny);
  const auto& mat = config_.material;
  penalty_ = config_.penalty.value_or(100.0 * mat.youngs_modulus * mat.thickness * mesh_.dy / mesh_.dx);

  AssemblyOptions raw = assembly_options();
  raw.rayleigh_alpha = 0.0;
  raw.rayleigh_beta = 0.0;
  raw.force_amplitude = 1.0;
  const BeamModel healthy = fe::assemble(mesh_, mat, std::nullopt, raw);

  const int probe = std::min(10, healthy.system.size());
  const auto modes = eigenmodes(healthy.system, probe);
  std::vector<double> bending;
  for (const auto& m : modes) {
    if (transverse_fraction(healthy.mesh, healthy.dofs, healthy.system, m.shape) > 0.5)
      bending.push_back(m.frequency_hz);
    if (bending.size() == 2) break;
  }
  if (bending.size() < 2) throw SolverFailure("could not identify two bending modes for damping");
  bending_hz_ = {bending[0], bending[1]};
  const double wa = hz_to_rad(bending[0]);
  const double wb = hz_to_rad(bending[1]);
  alpha_ = 2.0 * config_.damping_ratio * wa * wb / (wa + wb);
  beta_ = 2.0 * config_.damping_ratio / (wa + wb);

  const Vec u = solve_static(healthy.system, healthy.system.force_pattern.real());
  const int mid = healthy.dofs.dof(mesh_.grid_node(config_.nx / 2, config_.ny / 2), 1);
  if (mid < 0 || std::abs(u[mid]) == 0.0) throw SolverFailure("midspan deflection is zero");
  // q(t) = a (q e^{iwt} + c.c.) peaks at 2a q.
  amplitude_ = config_.midspan_deflection / (2.0 * std::abs(u[mid]));
}

std::vector<Support> BeamProblem::supports() const {
  const int mid = config_.ny / 2;
  return {{mesh_.grid_node(0, mid), true, true}, {mesh_.grid_node(config_.nx, mid), false, true}};
}

std::vector<SensorSpec> BeamProblem::sensors() const {
  std::vector<SensorSpec> out;
  for (int c : config_.sensor_columns) out.push_back({mesh_.element_at(c, config_.ny - 1)});
  return out;
}

AssemblyOptions BeamProblem::assembly_options() const {
  AssemblyOptions o;
  o.penalty = penalty_;
  o.rayleigh_alpha = alpha_;
  o.rayleigh_beta = beta_;
  o.force_amplitude = amplitude_;
  o.supports = supports();
  o.sensors = sensors();
  return o;
}

BeamModel BeamProblem::assemble(const std::optional<CrackSpec>& crack) const {
  return fe::assemble(mesh_, config_.material, crack, assembly_options());
}

std::uint64_t BeamProblem::fingerprint() const {
  char buf[512];
  const auto& m = config_.material;
  std::snprintf(buf, sizeof(buf), "beam:%.17g:%.17g:%d:%d:%.17g:%.17g:%.17g:%.17g:%.17g:%.17g:%.17g",
                config_.length, config_.height, config_.nx, config_.ny, m.youngs_modulus, m.density,
                m.poisson, m.thickness, penalty_, config_.damping_ratio, config_.midspan_deflection);
  std::string key(buf);
  for (int c : config_.sensor_columns) key += ":" + std::to_string(c);
  return fnv1a64(key);
}

}  // namespace hotr::fe
