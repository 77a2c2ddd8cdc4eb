#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "hotr/dynamics.hpp"
#include "hotr/fe.hpp"

using namespace hotr;
using hotr::testing::beam;

namespace {

// Displacement vector of the field (u, v) sampled at every free DoF.
template <class U, class V>
Vec sample_field(const fe::Mesh2D& mesh, const fe::DofMap& dofs, U u, V v) {
  Vec x = Vec::Zero(dofs.free_count);
  for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
    const auto& p = mesh.nodes[n];
    if (int d = dofs.dof(static_cast<int>(n), 0); d >= 0) x[d] = u(p.x, p.y);
    if (int d = dofs.dof(static_cast<int>(n), 1); d >= 0) x[d] = v(p.x, p.y);
  }
  return x;
}

double centroid_y(const fe::Mesh2D& mesh, int element) {
  double y = 0.0;
  for (int n : mesh.elements[element]) y += mesh.nodes[n].y;
  return y / 4.0;
}

}  // namespace

TEST(Mesh, GridCounts) {
  auto m = fe::build_mesh(1200, 200, 120, 20);
  EXPECT_EQ(m.elements.size(), 2400u);
  EXPECT_EQ(m.nodes.size(), 2541u);
  m = fe::build_mesh(10, 10, 1, 1);
  EXPECT_EQ(m.elements.size(), 1u);
  EXPECT_EQ(m.nodes.size(), 4u);
  m = fe::build_mesh(100, 50, 4, 2);
  EXPECT_EQ(m.elements.size(), 8u);
  EXPECT_EQ(m.nodes.size(), 15u);
  EXPECT_GT(fe::min_jacobian(m), 0.0);
}

TEST(Mesh, RejectsBadInput) {
  EXPECT_THROW(fe::build_mesh(0, 200, 120, 20), InvalidInput);
  EXPECT_THROW(fe::build_mesh(1200, -1, 120, 20), InvalidInput);
  EXPECT_THROW(fe::build_mesh(1200, 200, 0, 20), InvalidInput);
}

TEST(Crack, PairCountsFollowDepth) {
  const auto c = fe::CrackSpec::from_normalized(-0.1667, 15, 120);
  EXPECT_EQ(c.location_index, 50);
  EXPECT_EQ(c.depth_elements(20), 3);
  const auto bm = beam().assemble(c);
  EXPECT_EQ(bm.system.pair_count(), 3);
  const auto part = bm.system.partition();
  EXPECT_EQ(part.crack_plus.size() + part.crack_minus.size(), 6u);
  EXPECT_EQ(bm.mesh.crack_node_pairs.size(), 3u);
  for (const auto& p : bm.system.contact_pairs) EXPECT_EQ(p.penalty, beam().penalty());
  // duplicates share the y DoF of their partner
  for (auto [plus, minus] : bm.mesh.crack_node_pairs) {
    EXPECT_EQ(bm.dofs.dof(plus, 1), bm.dofs.dof(minus, 1));
    EXPECT_NE(bm.dofs.dof(plus, 0), bm.dofs.dof(minus, 0));
  }
}

TEST(Crack, RejectsThroughCrack) {
  const auto mesh = fe::build_mesh(1200, 200, 120, 20);
  EXPECT_THROW(fe::insert_crack(mesh, {50, 100}), InvalidInput);
  EXPECT_THROW(fe::insert_crack(mesh, {0, 15}), InvalidInput);
  EXPECT_THROW(fe::insert_crack(mesh, {120, 15}), InvalidInput);
}

TEST(Assembly, SymmetricAndRigidFree) {
  const auto mesh = fe::build_mesh(100, 50, 4, 2);
  const fe::Material mat;
  const auto dofs = fe::number_dofs(mesh, {});
  const SpMat k = fe::assemble_stiffness(mesh, mat, dofs);
  const SpMat m = fe::assemble_mass(mesh, mat, dofs);
  EXPECT_LT((Mat(k) - Mat(k).transpose()).norm(), 1e-12 * Mat(k).norm());
  EXPECT_LT((Mat(m) - Mat(m).transpose()).norm(), 1e-12 * Mat(m).norm());
  const Vec tx = sample_field(mesh, dofs, [](double, double) { return 1.0; }, [](double, double) { return 0.0; });
  const Vec ty = sample_field(mesh, dofs, [](double, double) { return 0.0; }, [](double, double) { return 1.0; });
  const Vec rot = sample_field(mesh, dofs, [](double, double y) { return -y; }, [](double x, double) { return x; });
  EXPECT_LT((k * tx).norm(), 1e-9 * Mat(k).norm());
  EXPECT_LT((k * ty).norm(), 1e-9 * Mat(k).norm());
  EXPECT_LT((k * rot).norm(), 1e-9 * Mat(k).norm() * 100.0);
  // total mass: rho * volume in tonnes
  EXPECT_NEAR(tx.dot(m * tx), 7.3e-9 * 100 * 50 * 1.0, 1e-15);
}

TEST(Strain, PatchTests) {
  const auto mesh = fe::build_mesh(100, 50, 4, 2);
  const auto dofs = fe::number_dofs(mesh, {});
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 5; ++trial) {
    const double a = u(rng), b = u(rng), c = u(rng), d = u(rng), e = u(rng), f = u(rng);
    const Vec x = sample_field(
        mesh, dofs, [&](double px, double py) { return a * px + b * py + c; },
        [&](double px, double py) { return d * px + e * py + f; });
    for (int el = 0; el < static_cast<int>(mesh.elements.size()); ++el)
      EXPECT_NEAR(fe::strain_row(mesh, dofs, {el}).dot(x), a, 1e-12);
  }
  const Vec rigid = sample_field(mesh, dofs, [](double, double) { return 3.0; }, [](double, double) { return 0.0; });
  EXPECT_NEAR(fe::strain_row(mesh, dofs, {5}).dot(rigid), 0.0, 1e-14);
}

TEST(Strain, PureBendingIsLinearInDepth) {
  const auto mesh = fe::build_mesh(100, 50, 4, 4);
  const auto dofs = fe::number_dofs(mesh, {});
  const double kappa = 1e-3, y0 = 25.0;
  const Vec x = sample_field(
      mesh, dofs, [&](double px, double py) { return -kappa * px * (py - y0); },
      [&](double px, double) { return 0.5 * kappa * px * px; });
  for (int j = 0; j < 4; ++j) {
    const int el = mesh.element_at(2, j);
    EXPECT_NEAR(fe::strain_row(mesh, dofs, {el}).dot(x), -kappa * (centroid_y(mesh, el) - y0), 1e-12);
  }
}

TEST(Modes, FirstFrequencyNearBeamTheory) {
  // Euler-Bernoulli, simply supported: w1 = (pi/L)^2 sqrt(E I / (rho A)), SI units.
  const double e = 2.1e11, rho = 7300, h = 0.2, len = 1.2;
  const double w1 = std::pow(kPi / len, 2) * std::sqrt(e * h * h / (12 * rho));
  const double f1 = w1 / (2 * kPi);
  EXPECT_NEAR(f1, 337.8, 0.1);
  const auto bm = beam().assemble();
  const auto modes = fe::eigenmodes(bm.system, 3);
  EXPECT_NEAR(modes[0].frequency_hz, f1, 0.1 * f1);
  EXPECT_GT(modes[0].frequency_hz, 1.0);
  EXPECT_GT(fe::transverse_fraction(bm.mesh, bm.dofs, bm.system, modes[0].shape), 0.9);
  EXPECT_NEAR(beam().bending_frequencies_hz()[0], modes[0].frequency_hz, 1e-6 * f1);
}

TEST(Modes, RejectsTooMany) {
  fe::BeamConfig cfg;
  cfg.length = 20;
  cfg.height = 10;
  cfg.nx = 2;
  cfg.ny = 2;
  cfg.sensor_columns = {0};
  const fe::BeamProblem small(cfg);
  const auto bm = small.assemble();
  EXPECT_THROW(fe::eigenmodes(bm.system, bm.system.size() + 1), InvalidInput);
}

TEST(Modes, MeshRefinementChangesF1Little) {
  fe::BeamConfig fine;
  fine.nx = 240;
  fine.ny = 40;
  fine.sensor_columns = {48, 96, 144, 192};
  const fe::BeamProblem refined(fine);
  const double f1 = beam().bending_frequencies_hz()[0];
  const double f1_fine = refined.bending_frequencies_hz()[0];
  EXPECT_LT(std::abs(f1_fine - f1) / f1, 0.02);
}

TEST(Damping, RayleighFitGivesTargetRatio) {
  const auto& p = beam();
  for (double f : p.bending_frequencies_hz()) {
    const double w = 2 * kPi * f;
    EXPECT_NEAR(p.rayleigh_alpha() / (2 * w) + p.rayleigh_beta() * w / 2, 0.002, 1e-12);
  }
}

TEST(Loading, CalibratedMidspanDeflection) {
  const auto bm = beam().assemble();
  const Vec u = solve_static(bm.system, 2.0 * beam().force_amplitude() * bm.system.force_pattern.real());
  const int mid = bm.dofs.dof(bm.mesh.grid_node(60, 10), 1);
  EXPECT_NEAR(std::abs(u[mid]), 2.0, 1e-9);
  // end moments: horizontal forces only, zero resultant
  EXPECT_NEAR(bm.system.force_pattern.real().sum(), 0.0, 1e-12);
}

TEST(Crack, ClosedCrackRestoresHealthyStatics) {
  const auto healthy = beam().assemble();
  const auto cracked = beam().assemble(fe::CrackSpec{50, 15});
  std::mt19937 rng(11);
  std::normal_distribution<double> g;
  // random load on grid-node DoFs, applied to the plus node in the cracked model
  Vec lh = Vec::Zero(healthy.system.size()), lc = Vec::Zero(cracked.system.size());
  for (int n = 0; n < healthy.mesh.grid_node_count(); ++n)
    for (int dir = 0; dir < 2; ++dir) {
      const int dh = healthy.dofs.dof(n, dir), dc = cracked.dofs.dof(n, dir);
      if (dh < 0) continue;
      const double v = g(rng);
      lh[dh] = v;
      lc[dc] += v;
    }
  const Vec xh = solve_static(healthy.system, lh);
  const SpMat t = fe::closed_crack_basis(cracked.system);
  const SpMat kr = t.transpose() * cracked.system.stiffness * t;
  Eigen::SimplicialLDLT<SpMat> ldlt(kr);
  const Vec xc = t * ldlt.solve(t.transpose() * lc);
  Vec xc_on_h(xh.size());
  for (int n = 0; n < healthy.mesh.grid_node_count(); ++n)
    for (int dir = 0; dir < 2; ++dir)
      if (int dh = healthy.dofs.dof(n, dir); dh >= 0) xc_on_h[dh] = xc[cracked.dofs.dof(n, dir)];
  EXPECT_LT(hotr::testing::rel(xc_on_h, xh), 1e-10);
  EXPECT_LT((Mat(kr) - Mat(kr).transpose()).norm(), 1e-9 * Mat(kr).norm());
}

TEST(Crack, ClosedCrackModesMatchHealthy) {
  const auto fh = fe::eigenmodes(beam().assemble().system, 3);
  const auto fc = fe::eigenmodes(beam().assemble(fe::CrackSpec{50, 15}).system, 3);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(fc[k].frequency_hz, fh[k].frequency_hz, 1e-8 * fh[k].frequency_hz);
}

TEST(Penalty, ClosedPenetrationIsSmall) {
  // Static end-moment load with every pair forced closed: the face gap stays
  // far below the response amplitude, and tenfold stiffer springs move the
  // sensor strains by a negligible amount.
  auto strains = [](double factor, double* penetration) {
    fe::BeamConfig cfg;
    const double kp = fe::BeamProblem(cfg).penalty();
    cfg.penalty = kp * factor;
    const fe::BeamProblem p(cfg);
    auto bm = p.assemble(fe::CrackSpec{50, 15});
    SystemModel closed = bm.system;
    closed.stiffness = closed_contact_stiffness(bm.system);
    // compressive side: reverse the load so the top faces are pressed together
    const Vec x = solve_static(closed, -bm.system.force_pattern.real());
    double gap = 0.0;
    for (const auto& c : bm.system.contact_pairs) gap = std::max(gap, std::abs(x[c.dof_plus] - x[c.dof_minus]));
    *penetration = gap / x.cwiseAbs().maxCoeff();
    return Vec(bm.system.sensor_rows * x);
  };
  double pen1 = 0, pen10 = 0;
  const Vec s1 = strains(1.0, &pen1);
  const Vec s10 = strains(10.0, &pen10);
  EXPECT_LT(pen1, 1e-4);
  EXPECT_LT(pen10, pen1);
  EXPECT_LT(hotr::testing::rel(s1, s10), 1e-3);
}

TEST(Problem, FingerprintTracksConfig) {
  fe::BeamConfig a, b;
  b.damping_ratio = 0.003;
  EXPECT_EQ(fe::BeamProblem(a).fingerprint(), beam().fingerprint());
  EXPECT_NE(fe::BeamProblem(b).fingerprint(), beam().fingerprint());
  EXPECT_EQ(beam().sensors().size(), 4u);
  EXPECT_EQ(beam().sensors()[1].element, beam().mesh().element_at(48, 19));
}
