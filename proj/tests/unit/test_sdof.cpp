#include <gtest/gtest.h>

#include <cmath>

#include "hotr/sdof.hpp"

using namespace hotr;
using namespace hotr::sdof;

TEST(Sdof, HealthyAmplitudeMatchesLinearFrf) {
  const SdofParams p = SdofParams::healthy();
  const double w = p.omega;
  const double expected = 1.0 / std::sqrt(std::pow(p.k - p.m * w * w, 2) + std::pow(p.c * w, 2));
  EXPECT_NEAR(expected, 1.5622, 1e-4);
  const auto r = steady_response(p);
  EXPECT_NEAR(2.0 * r.magnitudes[1], expected, 0.005 * expected);
  // steady peak of the recorded window
  EXPECT_NEAR(r.history.dofs.col(0).cwiseAbs().maxCoeff(), expected, 0.005 * expected);
  EXPECT_LT(r.magnitudes[2] / r.magnitudes[1], 1e-6);
}

TEST(Sdof, CrackedShowsHigherHarmonics) {
  const SdofParams p = SdofParams::cracked();
  EXPECT_DOUBLE_EQ(p.k + p.k0, SdofParams::healthy().k);
  const auto r = steady_response(p);
  EXPECT_GT(r.magnitudes[2] / r.magnitudes[1], 1e-3);
  EXPECT_GT(r.magnitudes[3], 1e-10 * r.magnitudes[1]);
  // periodic with the forcing period: the recorded periods repeat
  const auto& x = r.history.dofs.col(0);
  const int n = r.history.samples_per_period;
  EXPECT_LT((x.segment(0, n) - x.segment(n, n)).norm(), 1e-4 * x.segment(0, n).norm());
}

TEST(Sdof, ZeroForcingStaysAtRest) {
  SdofParams p = SdofParams::cracked();
  p.amplitude = 0.0;
  const auto s = simulate_sdof(p, 50.0, 2 * kPi / p.omega / 128);
  EXPECT_EQ(s.displacement.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Sdof, HomogeneousInForcing) {
  SdofParams p = SdofParams::cracked();
  const auto a = steady_response(p);
  p.amplitude = 7.0;
  const auto b = steady_response(p);
  for (int q = 1; q <= 4; ++q)
    EXPECT_NEAR(b.magnitudes[q] / b.magnitudes[1], a.magnitudes[q] / a.magnitudes[1],
                1e-6 * a.magnitudes[q] / a.magnitudes[1] + 1e-12);
  EXPECT_NEAR(b.magnitudes[1], 7.0 * a.magnitudes[1], 1e-5 * b.magnitudes[1]);
}

TEST(Sdof, OpenGapBehavesLinearly) {
  // the response never reaches the gap, so the spring never engages
  SdofParams cracked = SdofParams::cracked();
  cracked.gap = 10.0;
  SdofParams linear = cracked;
  linear.k0 = 0.0;
  const auto a = simulate_sdof(cracked, 200.0, 2 * kPi / cracked.omega / 128);
  const auto b = simulate_sdof(linear, 200.0, 2 * kPi / linear.omega / 128);
  EXPECT_LT(a.displacement.cwiseAbs().maxCoeff(), 10.0);
  EXPECT_LE((a.displacement - b.displacement).cwiseAbs().maxCoeff(), 1e-12 * b.displacement.cwiseAbs().maxCoeff());
}

TEST(Spectrum, PureToneAndLeakageGuard) {
  const double w = 0.6, dt = 2 * kPi / w / 256;
  Vec x(256 * 10);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = std::sin(w * i * dt);
  const Vec mag = spectrum(x, dt, w, 6, 4);
  EXPECT_NEAR(mag[1], 0.5, 1e-12);
  for (int q : {0, 2, 3, 4, 5, 6}) EXPECT_LT(mag[q], 1e-12);
  EXPECT_THROW(spectrum(x, dt * 1.001, w, 6, 3), InvalidInput);
  EXPECT_THROW(spectrum(x, dt, w, 6, 20), InvalidInput);
  EXPECT_THROW(spectrum(x, dt, w, 6, 0), InvalidInput);
}

TEST(Sdof, RejectsBadParameters) {
  SdofParams p;
  p.m = 0.0;
  EXPECT_THROW(p.validate(), InvalidInput);
  p = SdofParams{};
  p.k0 = -1.0;
  EXPECT_THROW(p.validate(), InvalidInput);
  // coarse step
  EXPECT_THROW(simulate_sdof(SdofParams{}, 10.0, 2 * kPi / 0.6 / 10), InvalidInput);
}
