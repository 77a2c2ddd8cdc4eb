#include <gtest/gtest.h>

#include <fstream>
#include <iterator>
#include <numeric>
#include <set>

#include "fixtures.hpp"
#include "hotr/dynamics.hpp"
#include "hotr/rom.hpp"

using namespace hotr;
using hotr::testing::beam;
using hotr::testing::rel;

namespace {

const fe::CrackSpec kCrack{50, 15};

std::vector<double> first_frequencies(const SystemModel& s) {
  std::vector<double> f;
  for (const auto& m : fe::eigenmodes(s, 3)) f.push_back(m.frequency_hz);
  return f;
}

Vec static_strains(const SystemModel& s) { return s.sensor_rows * solve_static(s, s.force_pattern.real()); }

std::string file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(Rubin, RetainingEverythingIsIdentity) {
  const auto s = hotr::testing::random_model(12, 2, 21);
  std::vector<int> all(12);
  std::iota(all.begin(), all.end(), 0);
  const auto r = rom::reduce_rubin(s, all, 3);
  EXPECT_EQ(r.system.size(), 12);
  EXPECT_EQ((Mat(r.system.stiffness) - Mat(s.stiffness)).norm(), 0.0);
  EXPECT_EQ((Mat(r.system.mass) - Mat(s.mass)).norm(), 0.0);
}

TEST(Rubin, RejectsBadRetainedSets) {
  const auto s = hotr::testing::random_model(12, 1, 22);
  EXPECT_THROW(rom::reduce_rubin(s, {2, 3, 3}, 2), InvalidInput);
  EXPECT_THROW(rom::reduce_rubin(s, {2, 40}, 2), InvalidInput);
  EXPECT_THROW(rom::reduce_rubin(s, {0, 1}, 2), InvalidInput);  // contact DoFs 2, 3 missing
  EXPECT_THROW(rom::reduce_rubin(s, {2, 3}, 0), InvalidInput);
}

TEST(Rubin, StaticExactnessAtRetainedDofs) {
  const auto s = hotr::testing::random_model(30, 2, 23);
  const std::vector<int> kept{0, 2, 3, 5, 6, 29};
  const auto r = rom::reduce_rubin(s, kept, 4);
  Vec load = Vec::Zero(30);
  load[0] = 1.0;
  load[6] = -0.4;
  load[29] = 2.0;
  const Vec full = solve_static(s, load);
  Vec reduced_load = Vec::Zero(r.system.size());
  for (std::size_t k = 0; k < kept.size(); ++k) reduced_load[k] = load[kept[k]];
  const Vec xr = solve_static(r.system, reduced_load);
  for (std::size_t k = 0; k < kept.size(); ++k) EXPECT_NEAR(xr[k], full[kept[k]], 1e-8 * full.cwiseAbs().maxCoeff());
  // basis recovery is exact everywhere for loads on retained DoFs
  EXPECT_LT(rel(Vec(r.basis * xr), full), 1e-8);
  EXPECT_LT((Mat(r.system.stiffness) - Mat(r.system.stiffness).transpose()).norm(), 1e-10 * Mat(r.system.stiffness).norm());
  Eigen::LLT<Mat> llt{Mat(r.system.mass)};
  EXPECT_EQ(llt.info(), Eigen::Success);
}

TEST(RbModel, SizeAndFidelity) {
  const auto rb = rom::build_rb_model(beam(), kCrack);
  EXPECT_EQ(rb.system.size(), 52);
  EXPECT_EQ(rb.modal_count, 6);
  EXPECT_EQ(rb.system.pair_count(), 3);
  const auto full = beam().assemble(kCrack);
  const auto fr = first_frequencies(rb.system), ff = first_frequencies(full.system);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(fr[k], ff[k], 0.005 * ff[k]);
  EXPECT_LT(rel(static_strains(rb.system), static_strains(full.system)), 1e-3);
  // retained coordinates keep the physical contact DoFs
  for (const auto& c : rb.system.contact_pairs) {
    EXPECT_LT(c.dof_plus, static_cast<int>(rb.retained.size()));
    EXPECT_LT(c.dof_minus, static_cast<int>(rb.retained.size()));
  }
}

TEST(RbModel, FrequencyResponseAtCrackFace) {
  const auto rb = rom::build_rb_model(beam(), kCrack);
  const auto full = beam().assemble(kCrack);
  const FrequencyOperator fop(full.system), rop(rb.system);
  const int face_full = full.system.contact_pairs[0].dof_plus;
  const int face_rb = rb.system.contact_pairs[0].dof_plus;
  ASSERT_EQ(rb.retained[face_rb], face_full);
  for (double f = 25.0; f <= 600.0; f += 25.0) {
    const double w = hz_to_rad(f);
    const CVec xf = fop.at(w).solve(CVec(full.system.force_pattern));
    const CVec xr = rop.at(w).solve(CVec(rb.system.force_pattern));
    EXPECT_LT(std::abs(xr[face_rb] - xf[face_full]), 0.01 * std::abs(xf[face_full])) << f << " Hz";
  }
}

TEST(SubModel, CompositionAndFidelity) {
  const auto split = rom::SubstructureSplit::top_band(beam().mesh(), 4);
  const auto b = hotr::testing::substructure(split);
  const auto sub = rom::build_sub_model(beam(), split, *b, kCrack);
  const auto full = beam().assemble(kCrack);
  EXPECT_EQ(sub.modal_count, 6);
  // A DoFs (crack duplicates included) + B retained off the interface + B modes
  std::set<int> a_nodes;
  for (int e : split.region_a)
    for (int n : beam().mesh().elements[e]) a_nodes.insert(n);
  const std::set<int> iface(split.interface_nodes.begin(), split.interface_nodes.end());
  int b_only = 0;
  for (auto [node, dir] : b->retained) b_only += iface.count(node) ? 0 : 1;
  const int a_dofs = 2 * static_cast<int>(a_nodes.size()) + full.system.pair_count();
  EXPECT_EQ(sub.system.size(), a_dofs + b_only + b->modal_count);
  const auto fs = first_frequencies(sub.system), ff = first_frequencies(full.system);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(fs[k], ff[k], 0.005 * ff[k]);
  EXPECT_LT(rel(static_strains(sub.system), static_strains(full.system)), 1e-3);
  const auto healthy = rom::build_sub_model(beam(), split, *b, std::nullopt);
  EXPECT_LT(rel(static_strains(healthy.system), static_strains(beam().assemble().system)), 1e-3);
}

TEST(SubModel, RegionsAndRejections) {
  const auto& mesh = beam().mesh();
  const auto split = rom::SubstructureSplit::top_band(mesh, 4);
  EXPECT_EQ(split.region_a.size() + split.region_b.size(), mesh.elements.size());
  EXPECT_EQ(split.interface_nodes.size(), 121u);
  EXPECT_TRUE(split.contains(mesh, {1, 15}));
  EXPECT_TRUE(split.contains(mesh, {119, 15}));
  EXPECT_FALSE(split.contains(mesh, {50, 20}));
  const auto b = hotr::testing::substructure(split);
  EXPECT_THROW(rom::build_sub_model(beam(), split, *b, fe::CrackSpec{50, 20}), InvalidInput);
  EXPECT_THROW(rom::SubstructureSplit::top_band(mesh, 20), InvalidInput);
}

TEST(SubModel, CacheIsReusedAcrossCracks) {
  const auto split = rom::SubstructureSplit::top_band(beam().mesh(), 4);
  const auto dir = std::filesystem::temp_directory_path() / "hotr-rom-cache-test";
  std::filesystem::remove_all(dir);
  bool hit = true;
  const auto first = rom::ReducedSubstructure::load_or_build(beam(), split, 6, dir, &hit);
  EXPECT_FALSE(hit);
  const auto path = dir / ("subB-" + to_hex(first.key) + ".bin");
  const std::string bytes = file_bytes(path);
  const auto second = rom::ReducedSubstructure::load_or_build(beam(), split, 6, dir, &hit);
  EXPECT_TRUE(hit);
  EXPECT_EQ(file_bytes(path), bytes);
  EXPECT_EQ((second.stiffness - first.stiffness).norm(), 0.0);
  EXPECT_EQ((second.mass - first.mass).norm(), 0.0);
  // two cracks, one B
  const auto s1 = rom::build_sub_model(beam(), split, second, fe::CrackSpec{30, 10});
  const auto s2 = rom::build_sub_model(beam(), split, second, fe::CrackSpec{90, 5});
  EXPECT_GT(s1.system.size(), s2.system.size());
  EXPECT_EQ(s1.offline_seconds, s2.offline_seconds);
  // key changes with the material
  fe::BeamConfig other;
  other.material.youngs_modulus *= 1.01;
  EXPECT_NE(rom::ReducedSubstructure::cache_key(fe::BeamProblem(other), split, 6), first.key);
  // a corrupt file is rejected
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << bytes.substr(0, bytes.size() / 2);
  }
  EXPECT_THROW(rom::ReducedSubstructure::load(path, first.key), InvalidInput);
  std::filesystem::remove_all(dir);
}
