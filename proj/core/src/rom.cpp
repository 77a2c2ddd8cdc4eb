#include "hotr/rom.hpp"

#include <chrono>
#include <cstring>
#include <fstream>
#include <set>

#include <Eigen/SparseCholesky>

#include "hotr/dynamics.hpp"

namespace hotr::rom {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SpMat to_sparse(const Mat& a) {
  SpMat s = a.sparseView(0.0, 0.0);
  s.makeCompressed();
  return s;
}

Mat symmetrized(const Mat& a) { return 0.5 * (a + a.transpose()); }

}  // namespace

const char* kind_name(Kind kind) {
  switch (kind) {
    case Kind::Full:
      return "FULL";
    case Kind::RB:
      return "RB";
    case Kind::SUB:
      return "SUB";
  }
  return "?";
}

ReducedModel reduce_rubin(const SystemModel& model, const std::vector<int>& retained, int n_modes) {
  model.validate();
  const int n = model.size();
  const int nb = static_cast<int>(retained.size());
  if (nb == 0) throw InvalidInput("Rubin reduction needs at least one retained DoF");
  std::vector<int> coord(n, -1);
  for (int k = 0; k < nb; ++k) {
    const int d = retained[k];
    if (d < 0 || d >= n) throw InvalidInput("retained DoF outside the model");
    if (coord[d] >= 0) throw InvalidInput("retained DoFs must be distinct");
    coord[d] = k;
  }
  for (const auto& pr : model.contact_pairs)
    if (coord[pr.dof_plus] < 0 || (!pr.grounded() && coord[pr.dof_minus] < 0))
      throw InvalidInput("contact DoFs must be retained");

  Mat t;
  int modes = 0;
  if (nb == n) {
    t = Mat::Zero(n, n);
    for (int k = 0; k < n; ++k) t(retained[k], k) = 1.0;
  } else {
    if (n_modes < 1) throw InvalidInput("Rubin reduction needs at least one mode");
    if (nb + n_modes > n) throw InvalidInput("more reduced coordinates than DoFs");
    modes = n_modes;
    Eigen::SimplicialLDLT<SpMat> ldlt(model.stiffness);
    if (ldlt.info() != Eigen::Success) throw SolverFailure("Rubin reduction: stiffness is singular");
    Mat eb = Mat::Zero(n, nb);
    for (int k = 0; k < nb; ++k) eb(retained[k], k) = 1.0;
    const Mat flex = ldlt.solve(eb);
    const EigenPairs ep = lowest_eigenpairs(model.stiffness, model.mass, modes);
    const Mat& phi = ep.vectors;
    Mat phi_b(nb, modes);
    for (int k = 0; k < nb; ++k) phi_b.row(k) = phi.row(retained[k]);
    const Mat g_res = flex - phi * ep.eigenvalues.cwiseInverse().asDiagonal() * phi_b.transpose();
    Mat g_bb(nb, nb);
    for (int k = 0; k < nb; ++k) g_bb.row(k) = g_res.row(retained[k]);
    g_bb = symmetrized(g_bb);
    Eigen::LLT<Mat> llt(g_bb);
    if (llt.info() != Eigen::Success)
      throw SolverFailure("Rubin reduction: residual flexibility is singular (redundant retained set)");
    const Mat attach = llt.solve(g_res.transpose()).transpose();  // G_res G_bb^{-1}
    t.resize(n, nb + modes);
    t.leftCols(nb) = attach;
    t.rightCols(modes) = phi - attach * phi_b;
    for (int k = 0; k < nb; ++k) {
      t.row(retained[k]).setZero();
      t(retained[k], k) = 1.0;
    }
  }

  ReducedModel out;
  out.retained = retained;
  out.modal_count = modes;
  SystemModel& r = out.system;
  const Mat kr = symmetrized(t.transpose() * (model.stiffness * t));
  const Mat mr = symmetrized(t.transpose() * (model.mass * t));
  r.stiffness = to_sparse(kr);
  r.mass = to_sparse(mr);
  r.rayleigh = model.rayleigh;
  r.rayleigh_alpha = model.rayleigh_alpha;
  r.rayleigh_beta = model.rayleigh_beta;
  if (model.rayleigh)
    r.damping = to_sparse(model.rayleigh_alpha * mr + model.rayleigh_beta * kr);
  else
    r.damping = to_sparse(symmetrized(t.transpose() * (model.damping * t)));
  for (auto pr : model.contact_pairs) {
    pr.dof_plus = coord[pr.dof_plus];
    if (!pr.grounded()) pr.dof_minus = coord[pr.dof_minus];
    r.contact_pairs.push_back(pr);
  }
  r.force_pattern = t.transpose().cast<Complex>() * model.force_pattern;
  r.force_amplitude = model.force_amplitude;
  r.sensor_rows = model.sensor_rows * t;
  out.basis = std::move(t);
  r.validate();
  return out;
}

ReducedModel build_rb_model(const fe::BeamProblem& problem, const fe::CrackSpec& crack, int n_modes) {
  const auto t0 = std::chrono::steady_clock::now();
  const fe::BeamModel bm = problem.assemble(crack);
  std::vector<int> retained;
  for (const auto& pr : bm.system.contact_pairs) {
    retained.push_back(pr.dof_plus);
    retained.push_back(pr.dof_minus);
  }
  retained.insert(retained.end(), bm.forcing_dofs.begin(), bm.forcing_dofs.end());
  ReducedModel out = reduce_rubin(bm.system, retained, n_modes);
  out.kind = Kind::RB;
  out.online_seconds = seconds_since(t0);
  return out;
}

// ---------------------------------------------------------------------------
// Substructuring

SubstructureSplit SubstructureSplit::top_band(const fe::Mesh2D& mesh, int band_rows) {
  if (band_rows < 2 || band_rows >= mesh.ny)
    throw InvalidInput("region A must span at least 2 and fewer than ny element rows");
  SubstructureSplit s;
  s.band_rows = band_rows;
  const int first = mesh.ny - band_rows;
  for (int j = 0; j < mesh.ny; ++j)
    for (int i = 0; i < mesh.nx; ++i) (j >= first ? s.region_a : s.region_b).push_back(mesh.element_at(i, j));
  for (int i = 0; i <= mesh.nx; ++i) s.interface_nodes.push_back(mesh.grid_node(i, first));
  return s;
}

bool SubstructureSplit::contains(const fe::Mesh2D& mesh, const fe::CrackSpec& crack) const {
  if (crack.location_index < 1 || crack.location_index > mesh.nx - 1) return false;
  return crack.depth_elements(mesh.ny) <= band_rows - 1;
}

namespace {

constexpr char kMagic[8] = {'H', 'O', 'T', 'R', 'S', 'U', 'B', 'B'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::string& buf, const T& v) {
  buf.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(const std::string& buf, std::size_t& pos) {
  if (pos + sizeof(T) > buf.size()) throw InvalidInput("substructure cache file is truncated");
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

std::uint64_t ReducedSubstructure::cache_key(const fe::BeamProblem& problem, const SubstructureSplit& split,
                                             int n_modes) {
  const std::string key = "subB:" + to_hex(problem.fingerprint()) + ":" + std::to_string(split.band_rows) +
                          ":" + std::to_string(n_modes) + ":" + std::to_string(kVersion);
  return fnv1a64(key);
}

ReducedSubstructure ReducedSubstructure::build(const fe::BeamProblem& problem, const SubstructureSplit& split,
                                               int n_modes) {
  const auto t0 = std::chrono::steady_clock::now();
  const fe::Mesh2D& mesh = problem.mesh();
  const auto supports = problem.supports();
  const fe::DofMap dofs = fe::number_dofs(mesh, supports, split.region_b);

  SystemModel sys;
  sys.stiffness = fe::assemble_stiffness(mesh, problem.material(), dofs, split.region_b);
  sys.mass = fe::assemble_mass(mesh, problem.material(), dofs, split.region_b);
  sys.damping = problem.rayleigh_alpha() * sys.mass + problem.rayleigh_beta() * sys.stiffness;
  sys.rayleigh = true;
  sys.rayleigh_alpha = problem.rayleigh_alpha();
  sys.rayleigh_beta = problem.rayleigh_beta();
  sys.force_pattern = CVec::Zero(dofs.free_count);

  std::vector<std::pair<int, int>> owner(dofs.free_count, {-1, -1});
  for (std::size_t node = 0; node < dofs.node_dofs.size(); ++node)
    for (int dir = 0; dir < 2; ++dir)
      if (dofs.node_dofs[node][dir] >= 0) owner[dofs.node_dofs[node][dir]] = {static_cast<int>(node), dir};

  ReducedSubstructure out;
  std::vector<int> retained;
  std::set<int> interface(split.interface_nodes.begin(), split.interface_nodes.end());
  for (int node : split.interface_nodes)
    for (int dir = 0; dir < 2; ++dir)
      if (dofs.dof(node, dir) >= 0) {
        retained.push_back(dofs.dof(node, dir));
        out.retained.emplace_back(node, dir);
      }
  const Vec pattern = fe::end_moment_pattern(mesh, dofs);
  for (int d = 0; d < pattern.size(); ++d)
    if (pattern[d] != 0.0 && !interface.count(owner[d].first)) {
      retained.push_back(d);
      out.retained.push_back(owner[d]);
    }

  const ReducedModel red = reduce_rubin(sys, retained, n_modes);
  out.key = cache_key(problem, split, n_modes);
  out.modal_count = red.modal_count;
  out.stiffness = Mat(red.system.stiffness);
  out.mass = Mat(red.system.mass);
  out.build_seconds = seconds_since(t0);
  return out;
}

void ReducedSubstructure::save(const std::filesystem::path& path) const {
  std::string buf(kMagic, sizeof(kMagic));
  put(buf, kVersion);
  put(buf, key);
  put(buf, static_cast<std::int32_t>(retained.size()));
  put(buf, static_cast<std::int32_t>(modal_count));
  for (const auto& [node, dir] : retained) {
    put(buf, static_cast<std::int32_t>(node));
    put(buf, static_cast<std::int32_t>(dir));
  }
  const auto n = stiffness.rows();
  buf.append(reinterpret_cast<const char*>(stiffness.data()), sizeof(double) * n * n);
  buf.append(reinterpret_cast<const char*>(mass.data()), sizeof(double) * n * n);
  put(buf, fnv1a64(buf));

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot write substructure cache " + tmp.string());
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!os) throw Error("failed writing substructure cache " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

ReducedSubstructure ReducedSubstructure::load(const std::filesystem::path& path, std::uint64_t expected_key) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidInput("cannot open substructure cache " + path.string());
  const std::string buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (buf.size() < sizeof(kMagic) + 8 || std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0)
    throw InvalidInput("not a substructure cache file: " + path.string());
  std::size_t tail = buf.size() - sizeof(std::uint64_t);
  std::uint64_t stored;
  std::memcpy(&stored, buf.data() + tail, sizeof(stored));
  if (stored != fnv1a64(std::string_view(buf.data(), tail)))
    throw InvalidInput("substructure cache checksum mismatch: " + path.string());

  std::size_t pos = sizeof(kMagic);
  if (take<std::uint32_t>(buf, pos) != kVersion) throw InvalidInput("substructure cache version mismatch");
  ReducedSubstructure out;
  out.key = take<std::uint64_t>(buf, pos);
  if (out.key != expected_key) throw InvalidInput("substructure cache key mismatch");
  const int nret = take<std::int32_t>(buf, pos);
  out.modal_count = take<std::int32_t>(buf, pos);
  if (nret < 0 || out.modal_count < 0) throw InvalidInput("corrupt substructure cache header");
  for (int k = 0; k < nret; ++k) {
    const int node = take<std::int32_t>(buf, pos);
    const int dir = take<std::int32_t>(buf, pos);
    out.retained.emplace_back(node, dir);
  }
  const Eigen::Index n = nret + out.modal_count;
  const std::size_t bytes = sizeof(double) * n * n;
  if (pos + 2 * bytes != tail) throw InvalidInput("substructure cache size mismatch");
  out.stiffness.resize(n, n);
  out.mass.resize(n, n);
  std::memcpy(out.stiffness.data(), buf.data() + pos, bytes);
  std::memcpy(out.mass.data(), buf.data() + pos + bytes, bytes);
  return out;
}

ReducedSubstructure ReducedSubstructure::load_or_build(const fe::BeamProblem& problem,
                                                       const SubstructureSplit& split, int n_modes,
                                                       const std::filesystem::path& cache_dir,
                                                       bool* from_cache) {
  const std::uint64_t key = cache_key(problem, split, n_modes);
  const auto path = cache_dir / ("subB-" + to_hex(key) + ".bin");
  if (std::filesystem::exists(path)) {
    try {
      auto out = load(path, key);
      if (from_cache) *from_cache = true;
      return out;
    } catch (const InvalidInput&) {
      // Stale or damaged entry: rebuild below.
    }
  }
  auto out = build(problem, split, n_modes);
  std::filesystem::create_directories(cache_dir);
  out.save(path);
  if (from_cache) *from_cache = false;
  return out;
}

ReducedModel build_sub_model(const fe::BeamProblem& problem, const SubstructureSplit& split,
                             const ReducedSubstructure& b, const std::optional<fe::CrackSpec>& crack) {
  const auto t0 = std::chrono::steady_clock::now();
  if (crack && !split.contains(problem.mesh(), *crack))
    throw InvalidInput("crack reaches the substructure interface; deepen region A");
  const fe::Mesh2D mesh = crack ? fe::insert_crack(problem.mesh(), *crack) : problem.mesh();
  fe::DofMap dofs = fe::number_dofs(mesh, problem.supports(), split.region_a);
  const int na = dofs.free_count;

  std::vector<int> map(b.retained.size() + b.modal_count);
  int next = na;
  for (std::size_t k = 0; k < b.retained.size(); ++k) {
    const auto [node, dir] = b.retained[k];
    if (node < 0 || static_cast<std::size_t>(node) >= dofs.node_dofs.size())
      throw InvalidInput("substructure B references a node outside the mesh");
    if (dofs.dof(node, dir) < 0) dofs.node_dofs[node][dir] = next++;
    map[k] = dofs.dof(node, dir);
  }
  for (int k = 0; k < b.modal_count; ++k) map[b.retained.size() + k] = next++;
  dofs.free_count = next;

  SpMat ka = fe::assemble_stiffness(mesh, problem.material(), dofs, split.region_a);
  SpMat ma = fe::assemble_mass(mesh, problem.material(), dofs, split.region_a);
  std::vector<Triplet> kt, mt;
  const auto nr = static_cast<Eigen::Index>(map.size());
  for (Eigen::Index i = 0; i < nr; ++i)
    for (Eigen::Index j = 0; j < nr; ++j) {
      if (b.stiffness(i, j) != 0.0) kt.emplace_back(map[i], map[j], b.stiffness(i, j));
      if (b.mass(i, j) != 0.0) mt.emplace_back(map[i], map[j], b.mass(i, j));
    }
  SpMat kb(next, next), mb(next, next);
  kb.setFromTriplets(kt.begin(), kt.end());
  mb.setFromTriplets(mt.begin(), mt.end());

  ReducedModel out;
  out.kind = Kind::SUB;
  out.modal_count = b.modal_count;
  SystemModel& s = out.system;
  s.stiffness = ka + kb;
  s.mass = ma + mb;
  s.stiffness.makeCompressed();
  s.mass.makeCompressed();
  s.damping = problem.rayleigh_alpha() * s.mass + problem.rayleigh_beta() * s.stiffness;
  s.rayleigh = true;
  s.rayleigh_alpha = problem.rayleigh_alpha();
  s.rayleigh_beta = problem.rayleigh_beta();
  for (const auto& [plus, minus] : mesh.crack_node_pairs)
    s.contact_pairs.push_back({dofs.dof(plus, 0), dofs.dof(minus, 0), problem.penalty(), 0.0});
  s.force_pattern = fe::end_moment_pattern(mesh, dofs).cast<Complex>();
  s.force_amplitude = problem.force_amplitude();
  const std::set<int> in_a(split.region_a.begin(), split.region_a.end());
  const auto sensors = problem.sensors();
  s.sensor_rows.resize(static_cast<Eigen::Index>(sensors.size()), next);
  for (std::size_t k = 0; k < sensors.size(); ++k) {
    if (!in_a.count(sensors[k].element)) throw InvalidInput("SUB sensors must lie in region A");
    s.sensor_rows.row(static_cast<Eigen::Index>(k)) = fe::strain_row(mesh, dofs, sensors[k]).transpose();
  }
  s.validate();
  out.online_seconds = seconds_since(t0);
  out.offline_seconds = b.build_seconds;
  return out;
}

}  // namespace hotr::rom
