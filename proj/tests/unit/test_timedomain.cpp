#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "hotr/hbm.hpp"
#include "hotr/rom.hpp"
#include "hotr/timedomain.hpp"

using namespace hotr;
using namespace hotr::td;
using hotr::testing::rel;

namespace {

Vec sampled(int periods, int per_period, double omega, const std::function<double(double)>& f, double* dt) {
  *dt = 2 * kPi / omega / per_period;
  Vec x(periods * per_period);
  for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = f(k * *dt);
  return x;
}

}  // namespace

TEST(GeneralizedAlpha, ChungHulbertParameters) {
  const auto p = AlphaParameters::from_rho(0.7);
  EXPECT_NEAR(p.alpha_m, 0.23529, 1e-5);
  EXPECT_NEAR(p.alpha_f, 0.41176, 1e-5);
  EXPECT_NEAR(p.beta, 0.34602, 1e-5);
  EXPECT_NEAR(p.gamma, 0.67647, 1e-5);
  const auto t = AlphaParameters::from_rho(1.0);
  EXPECT_DOUBLE_EQ(t.beta, 0.25);
  EXPECT_DOUBLE_EQ(t.gamma, 0.5);
  EXPECT_THROW(AlphaParameters::from_rho(1.5), InvalidInput);
}

TEST(GeneralizedAlpha, UndampedFreeVibrationKeepsEnergy) {
  auto s = hotr::testing::random_model(1, 0, 1);
  s.mass.coeffRef(0, 0) = 1.0;
  s.stiffness.coeffRef(0, 0) = 1.0;
  s.damping.coeffRef(0, 0) = 0.0;
  s.rayleigh = false;
  const double dt = 2 * kPi / 100;
  Stepper st(s, 1.0, 0.0, dt, 1.0);
  st.set_state(Vec::Ones(1), Vec::Zero(1));
  auto energy = [&] { return 0.5 * st.velocity().squaredNorm() + 0.5 * st.displacement().squaredNorm(); };
  const double e0 = energy();
  double worst = 0.0;
  for (int k = 0; k < 100 * 100; ++k) {
    st.step();
    worst = std::max(worst, std::abs(energy() - e0) / e0);
  }
  EXPECT_LT(worst, dt * dt);
}

TEST(Extraction, SingleToneAndRectifiedCosine) {
  const double w = 3.0;
  double dt = 0;
  const Vec tone = sampled(4, 256, w, [&](double t) { return 2.5 * std::cos(w * t); }, &dt);
  const CVec c = extract_harmonics(tone, 0.0, dt, w, 4);
  EXPECT_NEAR(std::abs(c[1] - 1.25), 0.0, 1e-12);
  EXPECT_LT(std::abs(c[2]), 1e-12);

  const Vec rect = sampled(2, 4096, w, [&](double t) { return std::max(0.0, std::cos(w * t)); }, &dt);
  const CVec r = extract_harmonics(rect, 0.0, dt, w, 3);
  EXPECT_NEAR(r[0].real(), 1.0 / kPi, 1e-6);
  EXPECT_NEAR(std::abs(r[1] - 0.25), 0.0, 1e-6);
  EXPECT_NEAR(std::abs(r[2] - 1.0 / (3 * kPi)), 0.0, 1e-6);
}

TEST(Extraction, RoundTripOfHarmonicSolution) {
  const auto s = hotr::testing::random_model(8, 1, 3);
  const double w = 0.8;
  const auto sol = hbm::solve_mhb(s, w, hbm::AftConfig{});
  const int per = 512;
  const double dt = 2 * kPi / w / per;
  Vec times(3 * per);
  for (Eigen::Index k = 0; k < times.size(); ++k) times[k] = 0.4 + k * dt;
  const Mat x = sol.reconstruct(times);
  for (int dof : {0, 2, 5}) {
    const CVec c = extract_harmonics(x.row(dof).transpose(), 0.4, dt, w, sol.h);
    for (int p = 0; p <= sol.h; ++p)
      EXPECT_LT(std::abs(c[p] - sol.coeffs(dof, p)), 1e-10 * sol.coeffs.row(dof).norm());
  }
}

TEST(Extraction, RejectsBadWindows) {
  const double w = 1.0;
  double dt = 0;
  const Vec x = sampled(1, 64, w, [](double t) { return std::sin(t); }, &dt);
  EXPECT_THROW(extract_harmonics(x.head(40), 0.0, dt, w, 2), InvalidInput);
  EXPECT_THROW(extract_harmonics(x, 0.0, dt * 1.01, w, 2), InvalidInput);
}

TEST(Noise, LevelsAndDeterminism) {
  const double w = 2.0;
  double dt = 0;
  const Vec clean = sampled(100, 128, w, [&](double t) { return std::sin(w * t) + 0.3 * std::cos(2 * w * t); }, &dt);
  const auto zero = add_noise(clean, 0.0, 9);
  EXPECT_EQ((zero.measured - clean).norm(), 0.0);
  const auto ten = add_noise(clean, 10.0, 9);
  const double ratio = 100.0 * ten.noise.norm() / clean.norm();
  EXPECT_NEAR(ratio, 10.0, 0.2);
  EXPECT_NEAR(ten.noise.mean(), 0.0, 0.05 * ten.noise.norm() / std::sqrt(double(clean.size())));
  EXPECT_LT((ten.measured - clean - ten.noise).norm(), 1e-14 * clean.norm());
  const auto again = add_noise(clean, 10.0, 9);
  EXPECT_EQ((again.noise - ten.noise).norm(), 0.0);
  const auto other = add_noise(clean, 10.0, 10);
  EXPECT_GT((other.noise - ten.noise).norm(), 0.0);
  EXPECT_NEAR(100.0 * other.noise.norm() / clean.norm(), 10.0, 0.2);
  EXPECT_THROW(add_noise(Vec::Zero(100), 1.0, 1), InvalidInput);
  EXPECT_THROW(add_noise(clean, -1.0, 1), InvalidInput);
}

TEST(Noise, IndependentChannels) {
  Mat clean(2000, 2);
  for (int k = 0; k < 2000; ++k) clean.row(k) << std::sin(0.1 * k), std::sin(0.1 * k);
  const Mat m = add_noise_channels(clean, 5.0, 4);
  const Vec e0 = m.col(0) - clean.col(0), e1 = m.col(1) - clean.col(1);
  EXPECT_LT(std::abs(e0.dot(e1)) / (e0.norm() * e1.norm()), 0.1);
}

TEST(Integrate, HealthyIsSingleTone) {
  const auto s = hotr::testing::random_model(10, 0, 12);
  IntegratorConfig cfg;
  cfg.max_periods = 20000;
  const auto h = integrate(s, 0.9, 1.0, cfg);
  ASSERT_TRUE(h.steady);
  for (int c = 0; c < h.sensors.cols(); ++c) {
    const CVec e = extract_harmonics(h.sensors.col(c), h.time_origin, h.dt, h.omega, 3);
    EXPECT_LT(std::abs(e[2]) / std::abs(e[1]), 1e-6);
  }
}

TEST(Integrate, AgreesWithHarmonicBalance) {
  const auto s = hotr::testing::random_model(20, 2, 13);
  const double w = 0.7;
  const auto sol = hbm::solve_mhb(s, w, hbm::AftConfig{});
  IntegratorConfig cfg;
  cfg.steps_per_period = 1024;
  cfg.max_periods = 20000;
  const auto h = integrate(s, w, s.force_amplitude, cfg);
  ASSERT_TRUE(h.steady);
  for (int p : {1, 2}) {
    CVec td(h.sensors.cols());
    for (int c = 0; c < h.sensors.cols(); ++c)
      td[c] = extract_harmonics(h.sensors.col(c), h.time_origin, h.dt, w, p)[p];
    const CVec hb = sol.output(s.sensor_rows, p);
    EXPECT_LT(rel(Vec(td.cwiseAbs()), Vec(hb.cwiseAbs())), 0.02) << "order " << p;
  }
}

TEST(Integrate, TimeStepRefinement) {
  const auto model = rom::build_rb_model(hotr::testing::beam(), {50, 10});
  const double w = hz_to_rad(128.0);
  auto second = [&](int spp) {
    IntegratorConfig cfg;
    cfg.steps_per_period = spp;
    const auto h = integrate(model.system, w, model.system.force_amplitude, cfg);
    Vec mag(h.sensors.cols());
    for (int c = 0; c < h.sensors.cols(); ++c)
      mag[c] = std::abs(extract_harmonics(h.sensors.col(c), h.time_origin, h.dt, w, 2)[2]);
    return mag;
  };
  const Vec coarse = second(256), fine = second(512);
  EXPECT_LT(rel(coarse, fine), 0.005);
}

TEST(Integrate, UnsteadyRunIsReported) {
  const auto s = hotr::testing::random_model(6, 1, 14);
  IntegratorConfig cfg;
  cfg.max_periods = 3;
  EXPECT_THROW(integrate(s, 0.7, 1.0, cfg), ConvergenceError);
  cfg.require_steady = false;
  const auto h = integrate(s, 0.7, 1.0, cfg);
  EXPECT_FALSE(h.steady);
}
