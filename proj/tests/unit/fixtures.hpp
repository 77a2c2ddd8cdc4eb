#pragma once

#include <cstdlib>
#include <filesystem>
#include <memory>
#include <random>

#include "hotr/fe.hpp"
#include "hotr/rom.hpp"
#include "hotr/system.hpp"

namespace hotr::testing {

/// The default 120 x 20 beam, built once per test binary.
inline const fe::BeamProblem& beam() {
  static const fe::BeamProblem problem{fe::BeamConfig{}};
  return problem;
}

/// Directory for substructure caches shared by the test binaries.
inline std::filesystem::path cache_dir() {
  if (const char* d = std::getenv("HOTR_TEST_CACHE"); d && *d) return d;
  return std::filesystem::temp_directory_path() / "hotr-test-cache";
}

inline std::shared_ptr<const rom::ReducedSubstructure> substructure(const rom::SubstructureSplit& split) {
  return std::make_shared<rom::ReducedSubstructure>(
      rom::ReducedSubstructure::load_or_build(beam(), split, 6, cache_dir()));
}

/// Relative 2-norm difference with a zero-safe denominator.
template <class A, class B>
double rel(const A& a, const B& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}


/// Random damped chain of `n` DoFs with `pairs` contact pairs and three
/// sensors; natural frequencies spread around 1 rad/s.
inline SystemModel random_model(int n, int pairs, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  std::normal_distribution<double> g;
  std::vector<Triplet> kt, mt;
  // springs between neighbours plus a grounding spring at every DoF
  for (int i = 0; i < n; ++i) {
    kt.emplace_back(i, i, 0.1 * u(rng));
    mt.emplace_back(i, i, u(rng));
    if (i + 1 < n) {
      const double ks = u(rng);
      kt.emplace_back(i, i, ks);
      kt.emplace_back(i + 1, i + 1, ks);
      kt.emplace_back(i, i + 1, -ks);
      kt.emplace_back(i + 1, i, -ks);
    }
  }
  SystemModel s;
  s.stiffness.resize(n, n);
  s.stiffness.setFromTriplets(kt.begin(), kt.end());
  s.mass.resize(n, n);
  s.mass.setFromTriplets(mt.begin(), mt.end());
  s.rayleigh = true;
  s.rayleigh_alpha = 0.01;
  s.rayleigh_beta = 0.01;
  s.damping = s.rayleigh_alpha * s.mass + s.rayleigh_beta * s.stiffness;
  for (int c = 0; c < pairs; ++c) s.contact_pairs.push_back({3 * c + 2, 3 * c + 3, 0.5 + u(rng), 0.0});
  s.force_pattern = CVec::Zero(n);
  s.force_pattern[0] = Complex(1.0, 0.0);
  s.force_pattern[n - 1] = Complex(-0.5, 0.0);
  s.force_amplitude = 1.0;
  s.sensor_rows = Mat::Zero(3, n);
  for (int r = 0; r < 3; ++r)
    for (int j = 0; j < n; ++j) s.sensor_rows(r, j) = g(rng);
  s.validate();
  return s;
}

}  // namespace hotr::testing
