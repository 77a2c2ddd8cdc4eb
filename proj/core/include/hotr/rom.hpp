#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "hotr/fe.hpp"
#include "hotr/system.hpp"

/// Rubin reduction (free-interface normal modes plus residual-flexibility
/// attachment modes) and the two reduced beam models built from it: a
/// globally reduced one (RB) and a substructured one (SUB) whose crack-free
/// part is reduced once and cached.
namespace hotr::rom {

enum class Kind { Full, RB, SUB };
const char* kind_name(Kind kind);

struct ReducedModel {
  Kind kind = Kind::RB;
  /// Reduced system; retained DoFs come first, then modal coordinates.
  SystemModel system;
  /// Full-model DoF for each retained coordinate (RB only).
  std::vector<int> retained;
  int modal_count = 0;
  /// x_full = basis * x_reduced (RB only; empty for SUB).
  Mat basis;
  double online_seconds = 0.0;   // crack-dependent construction
  double offline_seconds = 0.0;  // crack-independent work (SUB substructure B)
};

/// Reduces `model` keeping `retained` DoFs as explicit coordinates, in the given
/// order, plus `n_modes` modal coordinates. Contact pairs must be retained.
/// Retaining every DoF returns the model unchanged (identity basis).
ReducedModel reduce_rubin(const SystemModel& model, const std::vector<int>& retained, int n_modes);

/// RB model of a cracked beam: crack-face and forcing DoFs retained.
ReducedModel build_rb_model(const fe::BeamProblem& problem, const fe::CrackSpec& crack, int n_modes = 6);

/// Region A: the top `band_rows` element rows over the full length; region B: the rest.
struct SubstructureSplit {
  int band_rows = 4;
  std::vector<int> region_a;         // element indices
  std::vector<int> region_b;
  std::vector<int> interface_nodes;  // grid nodes shared by A and B

  static SubstructureSplit top_band(const fe::Mesh2D& mesh, int band_rows = 4);
  /// True when the crack, tip included, lies strictly inside region A.
  bool contains(const fe::Mesh2D& mesh, const fe::CrackSpec& crack) const;
};

/// Reduced substructure B: its interface and forcing DoFs retained, plus modes.
struct ReducedSubstructure {
  std::uint64_t key = 0;
  std::vector<std::pair<int, int>> retained;  // (grid node, direction) per retained coordinate
  int modal_count = 0;
  Mat stiffness;
  Mat mass;
  double build_seconds = 0.0;

  static ReducedSubstructure build(const fe::BeamProblem& problem, const SubstructureSplit& split,
                                   int n_modes = 6);
  static std::uint64_t cache_key(const fe::BeamProblem& problem, const SubstructureSplit& split,
                                 int n_modes);

  void save(const std::filesystem::path& path) const;
  /// Throws InvalidInput on a corrupt file, a version mismatch or a key mismatch.
  static ReducedSubstructure load(const std::filesystem::path& path, std::uint64_t expected_key);

  /// Loads `<cache_dir>/subB-<key>.bin` or builds and writes it atomically.
  static ReducedSubstructure load_or_build(const fe::BeamProblem& problem, const SubstructureSplit& split,
                                           int n_modes, const std::filesystem::path& cache_dir,
                                           bool* from_cache = nullptr);
};

/// SUB model: region A assembled in full with the crack, substructure B taken
/// from its reduction, coupled by shared interface DoFs. Coordinates are
/// [A DoFs, B retained non-interface DoFs, B modal coordinates].
ReducedModel build_sub_model(const fe::BeamProblem& problem, const SubstructureSplit& split,
                             const ReducedSubstructure& b, const std::optional<fe::CrackSpec>& crack);

}  // namespace hotr::rom
