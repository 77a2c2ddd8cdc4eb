// Acceptance runner: `acceptance [N ...]` checks the numbered criteria (all
// when none are given) and prints one PASS/FAIL line for each.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "hotr/hbm.hpp"
#include "hotr/identify.hpp"
#include "hotr/sdof.hpp"
#include "hotr/timedomain.hpp"
#include "hotr/transmissibility.hpp"

using namespace hotr;
using hotr::testing::beam;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double timed(const std::function<void()>& fn) {
  const auto t0 = Clock::now();
  fn();
  return since(t0);
}

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// seconds per call, repeating until 20 ms have elapsed
double per_call(const std::function<void()>& fn) {
  int reps = 0;
  const auto t0 = Clock::now();
  double el = 0.0;
  do {
    fn();
    ++reps;
    el = since(t0);
  } while (el < 0.02);
  return el / reps;
}

std::vector<double> sweep_omegas(double start_hz, double stop_hz, int points) {
  std::vector<double> w;
  for (int k = 0; k < points; ++k) w.push_back(hz_to_rad(start_hz + (stop_hz - start_hz) * k / (points - 1)));
  return w;
}

const fe::CrackSpec kSweepCrack = fe::CrackSpec::from_normalized(-0.1667, 15, 120);

// ---------------------------------------------------------------------------

void criterion_1(Verdict& v) {
  sdof::SteadyResponse cracked, healthy;
  const double tc = timed([&] { cracked = sdof::steady_response(sdof::SdofParams::cracked()); });
  const double th = timed([&] { healthy = sdof::steady_response(sdof::SdofParams::healthy()); });
  const double rc = cracked.magnitudes[2] / cracked.magnitudes[1];
  const double rh = healthy.magnitudes[2] / healthy.magnitudes[1];
  const double r3 = cracked.magnitudes[3] / cracked.magnitudes[1];
  v.detail << "cracked |x2|/|x1| = " << rc << ", |x3|/|x1| = " << r3 << ", healthy |x2|/|x1| = " << rh
           << ", runtime " << tc + th << " s";
  v.check(rc > 1e-3, "cracked ratio > 1e-3");
  v.check(r3 > 1e-10, "|x3| above floor");
  v.check(rh < 1e-6, "healthy ratio < 1e-6");
  v.check(tc + th < 5.0, "runtime < 5 s");
}

void criterion_2(Verdict& v) {
  hbm::AftConfig cfg;
  cfg.harmonics = 3;
  cfg.samples = 1024;
  CMat rel = CMat::Zero(1, cfg.harmonics + 1);
  rel(0, 1) = 0.5;  // x(t) = cos t
  CMat f;
  const double t = timed([&] { f = hbm::aft_coefficients(rel, {{0, -1, 1.0, 0.0}}, cfg); });
  const double e0 = std::abs(f(0, 0) - 1.0 / kPi);
  const double e1 = std::abs(f(0, 1) - 0.25);
  const double e2 = std::abs(f(0, 2) - 1.0 / (3.0 * kPi));
  const double worst = std::max({e0, e1, e2});
  v.detail << "max coefficient error " << worst << ", runtime " << t << " s";
  v.check(worst < 1e-8, "coefficients to 1e-8");
  v.check(t < 1.0, "runtime < 1 s");
}

void criterion_3(Verdict& v) {
  const auto t0 = Clock::now();
  const auto model = rom::build_rb_model(beam(), {50, 10});
  const double w = hz_to_rad(128.0);
  const auto sol = hbm::solve_mhb(model.system, w, hbm::AftConfig{});
  td::IntegratorConfig cfg;
  const auto h = td::integrate(model.system, w, model.system.force_amplitude, cfg);
  for (int p : {1, 2}) {
    const CVec hb = sol.output(model.system.sensor_rows, p);
    CVec ta(hb.size());
    for (int c = 0; c < hb.size(); ++c)
      ta[c] = td::extract_harmonics(h.sensors.col(c), h.time_origin, h.dt, w, p)[p];
    const double e = (ta - hb).norm() / hb.norm();
    v.detail << "eps_" << p << " rel diff " << e << ", ";
    v.check(e < 0.02, "eps_" + std::to_string(p) + " within 2%");
  }
  const double t = since(t0);
  v.detail << "steady after " << h.periods_run << " periods, runtime " << t << " s";
  v.check(h.steady, "time integration reached steady state");
  v.check(t < 600.0, "runtime < 10 min");
}

void criterion_4(Verdict& v) {
  const auto model = rom::build_rb_model(beam(), kSweepCrack);
  const FrequencyOperator op(model.system);
  const auto omegas = sweep_omegas(50.0, 650.0, 241);
  const auto pairs = tr::ordered_pairs(model.system.sensor_count());
  std::vector<hbm::HarmonicSolution> sols;
  const double t_nl = timed([&] { sols = hbm::sweep(op, omegas, hbm::AftConfig{}); });
  std::vector<std::vector<tr::TransmissibilityRecord>> surr(omegas.size());
  const double t_su = timed([&] {
    for (std::size_t k = 0; k < omegas.size(); ++k) surr[k] = tr::tr_surrogate(op, omegas[k], 2, pairs);
  });
  std::vector<std::vector<Complex>> a(pairs.size()), b(pairs.size());
  int failed = 0;
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    if (!sols[k].converged) {
      ++failed;
      continue;
    }
    const auto nl = tr::tr_nonlinear(sols[k], model.system.sensor_rows, 2, pairs);
    for (std::size_t q = 0; q < pairs.size(); ++q) {
      a[q].push_back(nl[q].value);
      b[q].push_back(surr[k][q].value);
    }
  }
  double sum = 0.0, worst = 0.0;
  std::string worst_pair;
  for (std::size_t q = 0; q < pairs.size(); ++q) {
    const double e = tr::rmse(a[q], b[q]);
    sum += e;
    if (e > worst) {
      worst = e;
      worst_pair = std::to_string(pairs[q].m) + "/" + std::to_string(pairs[q].n);
    }
  }
  const double avg = sum / pairs.size();
  const std::size_t compared = a.front().size();
  // informational: the m < n half of the set
  double half_sum = 0.0, half_worst = 0.0;
  for (std::size_t q = 0; q < pairs.size(); ++q)
    if (pairs[q].m < pairs[q].n) {
      const double e = tr::rmse(a[q], b[q]);
      half_sum += e;
      half_worst = std::max(half_worst, e);
    }
  v.detail << "crack line " << kSweepCrack.location_index << " D" << kSweepCrack.depth_percent << ", "
           << compared << " of " << omegas.size() << " frequencies compared (" << failed
           << " nonconverged), " << pairs.size() << " ordered pairs, avg RMSE " << avg << ", max RMSE " << worst
           << " (pair " << worst_pair << "); m < n pairs: avg " << half_sum / (pairs.size() / 2) << ", max "
           << half_worst << "; nonlinear " << t_nl << " s, surrogate " << t_su << " s";
  v.check(compared >= 200, ">= 200 compared frequencies");
  v.check(avg < 1e-3, "average RMSE < 1e-3");
  v.check(worst < 1e-2, "max RMSE < 1e-2");
  v.check(t_nl < 1800.0, "nonlinear < 30 min");
  v.check(t_su < 10.0, "surrogate < 10 s");
}

void criterion_5(Verdict& v) {
  const fe::CrackSpec crack{50, 15};
  const double w = hz_to_rad(128.0);
  const auto split = rom::SubstructureSplit::top_band(beam().mesh(), 4);
  const auto b = hotr::testing::substructure(split);
  std::map<std::string, double> total, nl, su;
  for (const std::string kind : {"RB", "SUB"}) {
    std::vector<double> tb, tn, ts;
    for (int r = 0; r < 3; ++r) {
      rom::ReducedModel m;
      std::unique_ptr<FrequencyOperator> op;
      tb.push_back(timed([&] {
        m = kind == "RB" ? rom::build_rb_model(beam(), crack) : rom::build_sub_model(beam(), split, *b, crack);
        op = std::make_unique<FrequencyOperator>(m.system);
      }));
      tn.push_back(per_call([&] { (void)hbm::solve_mhb(*op, w, hbm::AftConfig{}); }));
      ts.push_back(per_call([&] { (void)tr::tr_surrogate(*op, w, 2, tr::ordered_pairs(4)); }));
    }
    nl[kind] = median(tn);
    su[kind] = median(ts);
    total[kind] = median(tb) + su[kind];
  }
  const double speedup = nl["RB"] / su["RB"];
  v.detail << "RB nonlinear " << nl["RB"] << " s, surrogate " << su["RB"] << " s, speedup " << speedup
           << "x; online totals SUB " << total["SUB"] << " s vs RB " << total["RB"] << " s";
  v.check(speedup >= 100.0, "surrogate speedup >= 100x");
  v.check(total["SUB"] < total["RB"], "SUB online total < RB online total");
}

void criterion_6(Verdict& v) {
  fe::BeamConfig loud_cfg;
  loud_cfg.midspan_deflection *= 10.0;
  const fe::BeamProblem loud(loud_cfg);
  const fe::CrackSpec crack{50, 15};
  const auto quiet_rb = rom::build_rb_model(beam(), crack);
  const auto loud_rb = rom::build_rb_model(loud, crack);
  v.detail << "amplitude ratio " << loud_rb.system.force_amplitude / quiet_rb.system.force_amplitude << "; ";
  const FrequencyOperator qop(quiet_rb.system), lop(loud_rb.system);
  const auto pairs = tr::ordered_pairs(4);
  bool identical = true;
  double nl_worst = 0.0;
  for (double f : {100.0, 128.0, 200.0, 450.0, 600.0}) {
    const double w = hz_to_rad(f);
    const auto sq = tr::tr_surrogate(qop, w, 2, pairs), sl = tr::tr_surrogate(lop, w, 2, pairs);
    for (std::size_t k = 0; k < pairs.size(); ++k) identical = identical && sq[k].value == sl[k].value;
    const auto nq = tr::tr_nonlinear(hbm::solve_mhb(qop, w, hbm::AftConfig{}), quiet_rb.system.sensor_rows, 2, pairs);
    const auto nl = tr::tr_nonlinear(hbm::solve_mhb(lop, w, hbm::AftConfig{}), loud_rb.system.sensor_rows, 2, pairs);
    for (std::size_t k = 0; k < pairs.size(); ++k)
      nl_worst = std::max(nl_worst, std::abs(nl[k].value - nq[k].value) / std::abs(nq[k].value));
  }
  // objective on 10 candidates, each problem scoring its own measurement
  const double w = hz_to_rad(128.0);
  const auto split = rom::SubstructureSplit::top_band(beam().mesh(), 4);
  const auto space = id::ParameterSpace::for_problem(beam());
  id::ForwardModel fq(beam(), space, split, hotr::testing::substructure(split), w, 2, pairs);
  id::ForwardModel fl(loud, space, split,
                      std::make_shared<rom::ReducedSubstructure>(
                          rom::ReducedSubstructure::load_or_build(loud, split, 6, hotr::testing::cache_dir())),
                      w, 2, pairs);
  const auto mq = id::measure(hbm::solve_mhb(qop, w, hbm::AftConfig{}), quiet_rb.system.sensor_rows, 2, pairs);
  const auto ml = id::measure(hbm::solve_mhb(lop, w, hbm::AftConfig{}), loud_rb.system.sensor_rows, 2, pairs);
  std::mt19937 rng(6);
  std::uniform_int_distribution<int> pick(0, space.size() - 1);
  double j_worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const id::Theta t = space.at(pick(rng));
    const double jq = fq.objective(t, mq), jl = fl.objective(t, ml);
    j_worst = std::max(j_worst, std::abs(jq - jl) / std::max(jq, 1e-300));
  }
  v.detail << "surrogate bit-identical " << (identical ? "yes" : "no") << ", nonlinear max rel diff " << nl_worst
           << ", J max rel diff " << j_worst << " over 10 candidates";
  v.check(identical, "surrogate bit-identical");
  v.check(nl_worst < 1e-10, "nonlinear within 1e-10");
  v.check(j_worst < 1e-10, "J unchanged");
}

void criterion_7(Verdict& v) {
  const fe::CrackSpec crack{50, 15};
  const auto full = beam().assemble(crack);
  const auto split = rom::SubstructureSplit::top_band(beam().mesh(), 4);
  const auto b = hotr::testing::substructure(split);
  const rom::ReducedModel models[] = {rom::build_rb_model(beam(), crack), rom::build_sub_model(beam(), split, *b, crack)};
  const char* names[] = {"RB", "SUB"};
  const auto ff = fe::eigenmodes(full.system, 3);
  const Vec sf = full.system.sensor_rows * solve_static(full.system, full.system.force().real());
  for (int m = 0; m < 2; ++m) {
    const auto& s = models[m].system;
    const auto fr = fe::eigenmodes(s, 3);
    double fe_worst = 0.0;
    for (int k = 0; k < 3; ++k)
      fe_worst = std::max(fe_worst, std::abs(fr[k].frequency_hz - ff[k].frequency_hz) / ff[k].frequency_hz);
    const Vec sr = s.sensor_rows * solve_static(s, s.force().real());
    const double st_worst = ((sr - sf).array() / sf.array()).abs().maxCoeff();
    v.detail << names[m] << " (" << s.size() << " DoFs): frequency error " << fe_worst << ", strain error "
             << st_worst << "; ";
    v.check(fe_worst < 0.005, std::string(names[m]) + " frequencies within 0.5%");
    v.check(st_worst < 0.001, std::string(names[m]) + " static strains within 0.1%");
  }
}

void criterion_8(Verdict& v) {
  const auto model = rom::build_rb_model(beam(), kSweepCrack);
  const FrequencyOperator op(model.system);
  const auto omegas = sweep_omegas(50.0, 650.0, 241);
  const auto sols = hbm::sweep(op, omegas, hbm::AftConfig{});
  std::vector<double> hz, mag;
  for (const auto& s : sols)
    if (s.converged) {
      hz.push_back(rad_to_hz(s.omega));
      mag.push_back(s.output(model.system.sensor_rows, 2).norm());
    }
  std::vector<double> peaks;
  for (std::size_t k = 1; k + 1 < mag.size(); ++k)
    if (mag[k] > mag[k - 1] && mag[k] >= mag[k + 1]) peaks.push_back(hz[k]);
  const auto f = beam().bending_frequencies_hz();
  v.detail << "own f1 " << f[0] << " Hz, f2 " << f[1] << " Hz; eps_2 peaks:";
  for (double p : peaks) v.detail << " " << p;
  v.detail << " Hz;";
  const std::pair<const char*, double> targets[] = {{"f1/2", f[0] / 2}, {"f2/2", f[1] / 2}, {"f1", f[0]}};
  for (const auto& [name, target] : targets) {
    double nearest = 0.0;
    for (double p : peaks)
      if (nearest == 0.0 || std::abs(p - target) < std::abs(nearest - target)) nearest = p;
    const double e = nearest > 0.0 ? std::abs(nearest - target) / target : 1.0;
    v.detail << " " << name << " " << target << " -> " << nearest << " (" << 100.0 * e << "%)";
    v.check(e <= 0.02, std::string("peak near ") + name + " within 2%");
  }
}

void criterion_9(Verdict& v) {
  const auto t0 = Clock::now();
  const double w = hz_to_rad(128.0);
  const auto split = rom::SubstructureSplit::top_band(beam().mesh(), 4);
  const auto space = id::ParameterSpace::for_problem(beam());
  id::ForwardModel fwd(beam(), space, split, hotr::testing::substructure(split), w, 2, tr::ordered_pairs(4));

  struct Case {
    fe::CrackSpec crack;
    double noise;
  };
  std::vector<id::MonteCarloSummary> sums;
  for (const Case c : {Case{{50, 15}, 1.0}, Case{{90, 5}, 10.0}}) {
    const auto clean = id::record_response(beam(), c.crack, w, 100);
    id::Scenario sc{c.crack, c.noise, 50, 1};
    id::GaConfig ga;
    ga.exhaustive_fallback = true;
    const auto mc = id::monte_carlo(sc, ga, fwd, clean);
    sums.push_back(mc.summary);
    v.detail << "line " << c.crack.location_index << " D" << c.crack.depth_percent << " " << c.noise
             << "% noise: exact location " << mc.summary.exact_location_probability << ", exact hit "
             << mc.summary.exact_probability << ", median error " << mc.summary.median_location_error
             << ", failures " << mc.summary.failures << "; ";
  }
  v.check(sums[0].exact_location_probability >= 0.9, "D15 1% exact localization >= 0.9");
  v.check(sums[1].median_location_error <= 5.0, "D5 10% median error <= 5");

  const fe::CrackSpec truth = fe::CrackSpec::from_normalized(0.5, 10, 120);
  const auto m = id::measure(id::record_response(beam(), truth, w, 100), 2, tr::ordered_pairs(4), 0.1, 77);
  int within = 0;
  const int seeds = 50;
  for (int s = 1; s <= seeds; ++s) {
    id::GaConfig ga;
    ga.seed = s;
    ga.threshold = id::stopping_threshold(0.1);
    const auto r = id::run_ga(space, ga, fwd, m);
    for (const auto& g : r.trace)
      if (space.crack(g.best_theta) == truth) {
        within += g.generation <= 15 ? 1 : 0;
        break;
      }
  }
  const double t = since(t0);
  v.detail << "GA 0.1% noise at line " << truth.location_index << " D" << truth.depth_percent << ": " << within
           << "/" << seeds << " seeds within 15 generations; runtime " << t << " s";
  v.check(within >= 0.8 * seeds, "GA within 15 generations in >= 80% of seeds");
  v.check(t < 7200.0, "runtime < 2 h");
}

void criterion_10(Verdict& v) {
  const auto t0 = Clock::now();
  const auto s = hotr::testing::random_model(20, 2, 8);
  hbm::AftConfig cfg;
  cfg.harmonics = 3;
  cfg.samples = 256;
  const double w = 0.7;
  const auto sol = hbm::solve_mhb(s, w, cfg);
  const Vec z = hbm::pack(sol.coeffs);
  const Mat jac = hbm::full_jacobian(s, w, cfg, z);
  Mat fd(jac.rows(), jac.cols());
  const double h = 1e-7 * z.cwiseAbs().maxCoeff();
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    Vec zp = z, zm = z;
    zp[j] += h;
    zm[j] -= h;
    fd.col(j) = (hbm::full_residual(s, w, cfg, zp) - hbm::full_residual(s, w, cfg, zm)) / (2 * h);
  }
  const double e = (jac - fd).norm() / fd.norm();
  const double t = since(t0);
  v.detail << "relative Jacobian error " << e << " (" << z.size() << " unknowns), runtime " << t << " s";
  v.check(e < 1e-5, "Jacobian error < 1e-5");
  v.check(t < 10.0, "runtime < 10 s");
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, void (*)(Verdict&)> criteria{
      {1, criterion_1}, {2, criterion_2}, {3, criterion_3}, {4, criterion_4},  {5, criterion_5},
      {6, criterion_6}, {7, criterion_7}, {8, criterion_8}, {9, criterion_9}, {10, criterion_10}};
  std::vector<int> selected;
  for (int a = 1; a < argc; ++a) selected.push_back(std::atoi(argv[a]));
  if (selected.empty())
    for (const auto& [n, fn] : criteria) selected.push_back(n);

  int failures = 0;
  for (int n : selected) {
    const auto it = criteria.find(n);
    if (it == criteria.end()) {
      std::printf("FAIL criterion %d: no such criterion\n", n);
      ++failures;
      continue;
    }
    Verdict v;
    try {
      it->second(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << " [error: " << e.what() << "]";
    }
    std::printf("%s criterion %d: %s\n", v.pass ? "PASS" : "FAIL", n, v.detail.str().c_str());
    std::fflush(stdout);
    failures += v.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
