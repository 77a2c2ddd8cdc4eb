#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <thread>

#include "hotr/dynamics.hpp"
#include "hotr/fe.hpp"
#include "hotr/hbm.hpp"
#include "hotr/identify.hpp"
#include "hotr/rom.hpp"
#include "hotr/sdof.hpp"
#include "hotr/timedomain.hpp"
#include "hotr/transmissibility.hpp"
#include "output.hpp"

namespace hotr::cli {

namespace fs = std::filesystem;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class F>
double time_it(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return seconds_since(t0);
}

rom::Kind parse_kind(const std::string& s) {
  if (s == "full") return rom::Kind::Full;
  if (s == "rb") return rom::Kind::RB;
  if (s == "sub") return rom::Kind::SUB;
  throw InvalidInput("model kind must be full, rb or sub, got '" + s + "'");
}

std::string kind_key(rom::Kind k) { return k == rom::Kind::Full ? "full" : k == rom::Kind::RB ? "rb" : "sub"; }

json crack_json(const std::optional<fe::CrackSpec>& c, int nx) {
  if (!c) return nullptr;
  return {{"location_index", c->location_index},
          {"depth_percent", c->depth_percent},
          {"normalized_location", c->normalized_location(nx)}};
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

const fe::CrackSpec& require_crack(const Context& ctx) {
  if (!ctx.cfg.crack) throw InvalidInput("this command needs a crack; set \"crack\" in the config");
  return *ctx.cfg.crack;
}

std::shared_ptr<const rom::ReducedSubstructure> substructure(const Context& ctx, const fe::BeamProblem& problem,
                                                             const rom::SubstructureSplit& split,
                                                             bool* from_cache = nullptr) {
  return std::make_shared<rom::ReducedSubstructure>(rom::ReducedSubstructure::load_or_build(
      problem, split, ctx.cfg.rom_modes, ctx.cache_dir, from_cache));
}

rom::ReducedModel make_model(const Context& ctx, const fe::BeamProblem& problem, rom::Kind kind,
                             const std::optional<fe::CrackSpec>& crack) {
  switch (kind) {
    case rom::Kind::Full: {
      rom::ReducedModel m;
      m.kind = rom::Kind::Full;
      m.online_seconds = time_it([&] { m.system = problem.assemble(crack).system; });
      return m;
    }
    case rom::Kind::RB:
      if (!crack) throw InvalidInput("the RB model retains crack faces; use kind full or sub for a healthy beam");
      return rom::build_rb_model(problem, *crack, ctx.cfg.rom_modes);
    case rom::Kind::SUB: {
      const auto split = rom::SubstructureSplit::top_band(problem.mesh(), ctx.cfg.band_rows);
      const auto b = substructure(ctx, problem, split);
      return rom::build_sub_model(problem, split, *b, crack);
    }
  }
  throw InvalidInput("unknown model kind");
}

json units_common() {
  return {{"length", "mm"}, {"force", "N"}, {"mass", "tonne"}, {"time", "s"}, {"frequency", "Hz"},
          {"strain", "1"}};
}

void write_json(const Context& ctx, const std::string& name, const json& doc) {
  write_atomic(ctx.out / name, doc.dump(2) + "\n");
}

void write_csv(const Context& ctx, const std::string& name, const CsvWriter& csv) {
  write_atomic(ctx.out / name, csv.str());
}

void note(const std::string& msg) { std::cerr << msg << "\n"; }

}  // namespace

// ---------------------------------------------------------------------------

void run_mesh(const Context& ctx, const MeshOptions& o) {
  const fe::BeamProblem problem(ctx.cfg.beam);
  const std::optional<fe::CrackSpec> crack = o.healthy ? std::nullopt : ctx.cfg.crack;
  const fe::BeamModel bm = problem.assemble(crack);
  const std::string hash = ctx.cfg.hash();

  CsvWriter nodes("mesh", hash, "x,y: mm", {"node", "x", "y"});
  for (std::size_t k = 0; k < bm.mesh.nodes.size(); ++k)
    nodes.row(static_cast<int>(k), bm.mesh.nodes[k].x, bm.mesh.nodes[k].y);
  CsvWriter elems("mesh", hash, "node indices", {"element", "n0", "n1", "n2", "n3"});
  for (std::size_t k = 0; k < bm.mesh.elements.size(); ++k) {
    const auto& e = bm.mesh.elements[k];
    elems.row(static_cast<int>(k), e[0], e[1], e[2], e[3]);
  }
  json sensors = json::array();
  for (const auto& s : problem.sensors()) sensors.push_back(s.element);
  json pairs = json::array();
  for (auto [p, m] : bm.mesh.crack_node_pairs) pairs.push_back({p, m});
  write_csv(ctx, "mesh_nodes.csv", nodes);
  write_csv(ctx, "mesh_elements.csv", elems);
  write_json(ctx, "mesh.json",
             envelope("mesh", ctx.cfg, units_common(),
                      {{"nodes", bm.mesh.nodes.size()},
                       {"elements", bm.mesh.elements.size()},
                       {"dofs", bm.system.size()},
                       {"contact_pairs", bm.system.pair_count()},
                       {"crack", crack_json(crack, ctx.cfg.beam.nx)},
                       {"crack_node_pairs", pairs},
                       {"sensor_elements", sensors},
                       {"min_jacobian", fe::min_jacobian(bm.mesh)}}));
}

void run_modes(const Context& ctx, const ModesOptions& o) {
  if (o.count < 1) throw InvalidInput("--count must be at least 1");
  const fe::BeamProblem problem(ctx.cfg.beam);
  const fe::BeamModel bm = problem.assemble(ctx.cfg.crack);
  const auto modes = fe::eigenmodes(bm.system, o.count);
  CsvWriter csv("modes", ctx.cfg.hash(), "frequency: Hz", {"mode", "frequency_hz", "transverse_fraction"});
  json list = json::array();
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const double tf = fe::transverse_fraction(bm.mesh, bm.dofs, bm.system, modes[k].shape);
    csv.row(static_cast<int>(k + 1), modes[k].frequency_hz, tf);
    list.push_back({{"mode", k + 1}, {"frequency_hz", modes[k].frequency_hz}, {"transverse_fraction", tf}});
  }
  const auto bend = problem.bending_frequencies_hz();
  write_csv(ctx, "modes.csv", csv);
  write_json(ctx, "modes.json",
             envelope("modes", ctx.cfg, units_common(),
                      {{"crack", crack_json(ctx.cfg.crack, ctx.cfg.beam.nx)},
                       {"crack_closed", true},
                       {"modes", list},
                       {"bending_frequencies_hz", {bend[0], bend[1]}},
                       {"rayleigh_alpha", problem.rayleigh_alpha()},
                       {"rayleigh_beta", problem.rayleigh_beta()},
                       {"penalty", problem.penalty()},
                       {"force_amplitude", problem.force_amplitude()}}));
}

void run_simulate_hbm(const Context& ctx, const HbmOptions& o) {
  hbm::AftConfig aft = ctx.cfg.aft;
  if (o.harmonics) aft.harmonics = *o.harmonics;
  if (o.samples) aft.samples = *o.samples;
  aft.validate();
  const rom::Kind kind = o.kind ? parse_kind(*o.kind) : ctx.cfg.rom_kind;
  std::vector<double> hz = o.freq_hz.empty() ? ctx.cfg.sweep.hz() : o.freq_hz;
  std::sort(hz.begin(), hz.end());
  for (double f : hz)
    if (!(f > 0.0)) throw InvalidInput("frequencies must be positive");

  const fe::BeamProblem problem(ctx.cfg.beam);
  const rom::ReducedModel model = make_model(ctx, problem, kind, ctx.cfg.crack);
  const FrequencyOperator op(model.system);
  std::vector<double> omegas;
  for (double f : hz) omegas.push_back(hz_to_rad(f));
  std::vector<hbm::HarmonicSolution> sols;
  const double solve_s = time_it([&] { sols = hbm::sweep(op, omegas, aft); });

  CsvWriter csv("simulate-hbm", ctx.cfg.hash(), "frequency: Hz, strain: 1, phase: rad",
                {"frequency_hz", "sensor", "order", "magnitude", "phase_rad"});
  json points = json::array();
  int failures = 0;
  for (const auto& s : sols) {
    json p = {{"frequency_hz", rad_to_hz(s.omega)},
              {"converged", s.converged},
              {"residual_norm", s.residual_norm},
              {"iterations", s.iterations}};
    if (!s.converged) {
      ++failures;
      p["message"] = s.message;
      points.push_back(p);
      continue;
    }
    json sensors = json::array();
    for (int c = 0; c < model.system.sensor_count(); ++c) {
      json coeffs = json::array();
      for (int q = 0; q <= s.h; ++q) {
        const Complex v = s.output(model.system.sensor_rows, q)[c];
        coeffs.push_back(complex_json(v));
        csv.row(rad_to_hz(s.omega), c, q, std::abs(v), std::arg(v));
      }
      sensors.push_back(coeffs);
    }
    p["sensor_coefficients"] = sensors;
    points.push_back(p);
  }
  write_csv(ctx, "hbm_spectra.csv", csv);
  write_json(ctx, "hbm.json",
             envelope("simulate-hbm", ctx.cfg, units_common(),
                      {{"model", kind_key(kind)},
                       {"dofs", model.system.size()},
                       {"crack", crack_json(ctx.cfg.crack, ctx.cfg.beam.nx)},
                       {"harmonics", aft.harmonics},
                       {"samples", aft.samples},
                       {"failures", failures},
                       {"points", points},
                       {"timing", {{"solve_seconds", solve_s}}}}));
  if (failures > 0) note(std::to_string(failures) + " frequencies did not converge; see hbm.json");
}

void run_simulate_time(const Context& ctx, const TimeOptions& o) {
  td::IntegratorConfig icfg = ctx.cfg.integrator;
  if (o.periods) icfg.record_periods = *o.periods;
  if (o.rho_inf) icfg.rho_inf = *o.rho_inf;
  if (o.steps_per_period) icfg.steps_per_period = *o.steps_per_period;
  icfg.validate();
  const double noise = o.noise.value_or(ctx.cfg.noise_percent);
  if (noise < 0.0) throw InvalidInput("--noise must be non-negative");
  const double f = o.freq_hz.value_or(ctx.cfg.measurement_hz);
  if (!(f > 0.0)) throw InvalidInput("--freq must be positive");
  const rom::Kind kind = o.kind ? parse_kind(*o.kind) : ctx.cfg.rom_kind;

  const fe::BeamProblem problem(ctx.cfg.beam);
  const rom::ReducedModel model = make_model(ctx, problem, kind, ctx.cfg.crack);
  td::TimeHistory h;
  const double run_s = time_it([&] {
    h = td::integrate(model.system, hz_to_rad(f), model.system.force_amplitude, icfg);
  });
  const Mat measured = noise > 0.0 ? td::add_noise_channels(h.sensors, noise, ctx.cfg.seed) : h.sensors;
  const int ns = static_cast<int>(h.sensors.cols());

  std::vector<std::string> cols{"time_s"};
  for (int c = 0; c < ns; ++c) cols.push_back("clean_" + std::to_string(c));
  for (int c = 0; c < ns; ++c) cols.push_back("measured_" + std::to_string(c));
  CsvWriter csv("simulate-time", ctx.cfg.hash(), "time: s, strain: 1", cols);
  const Vec t = h.time();
  for (Eigen::Index k = 0; k < t.size(); ++k) {
    std::string line = fmt_double(t[k]);
    for (int c = 0; c < ns; ++c) line += "," + fmt_double(h.sensors(k, c));
    for (int c = 0; c < ns; ++c) line += "," + fmt_double(measured(k, c));
    csv.row(line);
  }
  json harmonics = json::array();
  for (int c = 0; c < ns; ++c) {
    const CVec clean = td::extract_harmonics(h.sensors.col(c), h.time_origin, h.dt, h.omega, icfg.harmonics);
    const CVec meas = td::extract_harmonics(measured.col(c), h.time_origin, h.dt, h.omega, icfg.harmonics);
    json cl = json::array(), me = json::array();
    for (Eigen::Index q = 0; q < clean.size(); ++q) {
      cl.push_back(complex_json(clean[q]));
      me.push_back(complex_json(meas[q]));
    }
    harmonics.push_back({{"sensor", c}, {"clean", cl}, {"measured", me}});
  }
  write_csv(ctx, "time_series.csv", csv);
  write_json(ctx, "time_harmonics.json",
             envelope("simulate-time", ctx.cfg, units_common(),
                      {{"model", kind_key(kind)},
                       {"frequency_hz", f},
                       {"dt", h.dt},
                       {"samples_per_period", h.samples_per_period},
                       {"recorded_periods", h.periods},
                       {"periods_to_steady", h.periods_run},
                       {"steady", h.steady},
                       {"noise_percent", noise},
                       {"seed", ctx.cfg.seed},
                       {"harmonics", harmonics},
                       {"timing", {{"integrate_seconds", run_s}}}}));
}

void run_reduce(const Context& ctx, const ReduceOptions& o) {
  if (o.kind != "rb" && o.kind != "sub" && o.kind != "both") throw InvalidInput("--kind must be rb, sub or both");
  ExperimentConfig cfg = ctx.cfg;
  if (o.modes) cfg.rom_modes = *o.modes;
  if (cfg.rom_modes < 0) throw InvalidInput("--modes must be non-negative");
  Context c2 = ctx;
  c2.cfg = cfg;
  const fe::BeamProblem problem(cfg.beam);
  const fe::BeamModel full = problem.assemble(cfg.crack);
  const auto ref = fe::eigenmodes(full.system, 3);

  json models = json::array();
  auto report = [&](const std::string& name, const rom::ReducedModel& m, json extra) {
    const auto modes = fe::eigenmodes(m.system, 3);
    json freqs = json::array();
    for (std::size_t k = 0; k < modes.size(); ++k)
      freqs.push_back({{"mode", k + 1},
                       {"frequency_hz", modes[k].frequency_hz},
                       {"full_hz", ref[k].frequency_hz},
                       {"relative_error", std::abs(modes[k].frequency_hz / ref[k].frequency_hz - 1.0)}});
    json r = {{"kind", name},
              {"dofs", m.system.size()},
              {"retained", m.system.size() - m.modal_count},
              {"modal_coordinates", m.modal_count},
              {"contact_pairs", m.system.pair_count()},
              {"frequencies", freqs},
              {"timing", {{"online_seconds", m.online_seconds}, {"offline_seconds", m.offline_seconds}}}};
    r.update(extra);
    models.push_back(r);
  };
  if (o.kind != "sub") report("rb", make_model(c2, problem, rom::Kind::RB, cfg.crack), json::object());
  if (o.kind != "rb") {
    const auto split = rom::SubstructureSplit::top_band(problem.mesh(), cfg.band_rows);
    bool cached = false;
    const auto b = substructure(c2, problem, split, &cached);
    const rom::ReducedModel sub = rom::build_sub_model(problem, split, *b, cfg.crack);
    report("sub", sub,
           {{"band_rows", cfg.band_rows},
            {"substructure_b",
             {{"retained", b->retained.size()},
              {"modal_coordinates", b->modal_count},
              {"cache_key", to_hex(b->key)},
              {"cache_file", (c2.cache_dir / ("subB-" + to_hex(b->key) + ".bin")).string()}}},
            {"timing", {{"online_seconds", sub.online_seconds},
                        {"offline_seconds", sub.offline_seconds},
                        {"substructure_from_cache", cached},
                        {"substructure_build_seconds", b->build_seconds}}}});
  }
  write_json(ctx, "reduce.json",
             envelope("reduce", cfg, units_common(),
                      {{"crack", crack_json(cfg.crack, cfg.beam.nx)}, {"full_dofs", full.system.size()}, {"models", models}}));
}

void run_hotr(const Context& ctx, const HotrOptions& o) {
  const bool nl = o.method == "nonlinear" || o.method == "both";
  const bool su = o.method == "surrogate" || o.method == "both";
  if (!nl && !su) throw InvalidInput("--method must be nonlinear, surrogate or both");
  const rom::Kind kind = o.kind ? parse_kind(*o.kind) : ctx.cfg.rom_kind;
  const int p = ctx.cfg.order;
  const fe::BeamProblem problem(ctx.cfg.beam);
  const rom::ReducedModel model = make_model(ctx, problem, kind, require_crack(ctx));
  const FrequencyOperator op(model.system);
  const auto pairs = tr::ordered_pairs(model.system.sensor_count());
  std::vector<double> omegas;
  for (double f : ctx.cfg.sweep.hz()) omegas.push_back(hz_to_rad(f));
  std::sort(omegas.begin(), omegas.end());

  CsvWriter csv("hotr", ctx.cfg.hash(), "frequency: Hz, phase: rad",
                {"frequency_hz", "method", "m", "n", "magnitude", "phase_rad"});
  std::vector<hbm::HarmonicSolution> sols;
  double nl_s = 0.0, su_s = 0.0;
  if (nl) nl_s = time_it([&] { sols = hbm::sweep(op, omegas, ctx.cfg.aft); });
  std::vector<std::vector<tr::TransmissibilityRecord>> surr(omegas.size());
  json undefined = json::array();
  if (su)
    su_s = time_it([&] {
      for (std::size_t k = 0; k < omegas.size(); ++k) {
        try {
          surr[k] = tr::tr_surrogate(op, omegas[k], p, pairs);
        } catch (const tr::UndefinedTransmissibility& e) {
          undefined.push_back({{"frequency_hz", rad_to_hz(omegas[k])}, {"method", "surrogate"}, {"message", e.what()}});
        }
      }
    });

  std::vector<std::vector<Complex>> a(pairs.size()), b(pairs.size());
  json failed = json::array();
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    const double f = rad_to_hz(omegas[k]);
    std::vector<tr::TransmissibilityRecord> nrec;
    if (nl) {
      if (!sols[k].converged) {
        failed.push_back({{"frequency_hz", f}, {"message", sols[k].message}});
      } else {
        try {
          nrec = tr::tr_nonlinear(sols[k], model.system.sensor_rows, p, pairs);
        } catch (const tr::UndefinedTransmissibility& e) {
          undefined.push_back({{"frequency_hz", f}, {"method", "nonlinear"}, {"message", e.what()}});
        }
      }
    }
    for (const auto& r : nrec) csv.row(f, "nonlinear", r.pair.m, r.pair.n, std::abs(r.value), std::arg(r.value));
    for (const auto& r : surr[k]) csv.row(f, "surrogate", r.pair.m, r.pair.n, std::abs(r.value), std::arg(r.value));
    if (!nrec.empty() && !surr[k].empty())
      for (std::size_t q = 0; q < pairs.size(); ++q) {
        a[q].push_back(nrec[q].value);
        b[q].push_back(surr[k][q].value);
      }
  }
  json result = {{"model", kind_key(kind)},
                 {"dofs", model.system.size()},
                 {"crack", crack_json(ctx.cfg.crack, ctx.cfg.beam.nx)},
                 {"order", p},
                 {"method", o.method},
                 {"frequencies", omegas.size()},
                 {"nonconverged", failed},
                 {"undefined", undefined}};
  if (nl && su && !a.front().empty()) {
    json per = json::array();
    double sum = 0.0, worst = 0.0;
    for (std::size_t q = 0; q < pairs.size(); ++q) {
      const double e = tr::rmse(a[q], b[q]);
      sum += e;
      worst = std::max(worst, e);
      per.push_back({{"m", pairs[q].m}, {"n", pairs[q].n}, {"rmse", e}});
    }
    result["rmse"] = {{"compared_frequencies", a.front().size()},
                      {"pairs", per},
                      {"average", sum / pairs.size()},
                      {"max", worst}};
  }
  result["timing"] = {{"nonlinear_seconds", nl_s}, {"surrogate_seconds", su_s}};
  write_csv(ctx, "hotr.csv", csv);
  write_json(ctx, "hotr_report.json", envelope("hotr", ctx.cfg, units_common(), result));
}

namespace {

struct IdentifySetup {
  fe::BeamProblem problem;
  id::ParameterSpace space;
  rom::SubstructureSplit split;
  std::shared_ptr<const rom::ReducedSubstructure> b;
  std::unique_ptr<id::ForwardModel> forward;
  double offline_seconds = 0.0;
};

std::unique_ptr<IdentifySetup> identify_setup(const Context& ctx) {
  auto t0 = std::chrono::steady_clock::now();
  fe::BeamProblem problem(ctx.cfg.beam);
  id::ParameterSpace space = id::ParameterSpace::for_problem(problem, ctx.cfg.depths_percent);
  auto split = rom::SubstructureSplit::top_band(problem.mesh(), ctx.cfg.band_rows);
  auto s = std::unique_ptr<IdentifySetup>(new IdentifySetup{std::move(problem), space, split, nullptr, nullptr, 0.0});
  s->b = substructure(ctx, s->problem, s->split);
  s->forward = std::make_unique<id::ForwardModel>(s->problem, s->space, s->split, s->b, hz_to_rad(ctx.cfg.measurement_hz),
                                                  ctx.cfg.order, tr::ordered_pairs(static_cast<int>(ctx.cfg.beam.sensor_columns.size())));
  s->offline_seconds = seconds_since(t0);
  return s;
}

json measurement_json(const id::Measurement& m) {
  json pairs = json::array(), values = json::array();
  for (const auto& p : m.pairs) pairs.push_back({p.m, p.n});
  for (const auto& v : m.values) values.push_back(complex_json(v));
  return {{"frequency_hz", rad_to_hz(m.omega)}, {"order", m.order}, {"pairs", pairs}, {"values", values},
          {"noise_percent", m.noise_percent}, {"seed", m.seed}};
}

id::Measurement read_measurement(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open measurement file " + path.string());
  json j;
  try {
    j = json::parse(in);
    if (j.contains("result") && j["result"].contains("measurement")) j = j["result"]["measurement"];
    id::Measurement m;
    m.omega = hz_to_rad(j.at("frequency_hz").get<double>());
    m.order = j.at("order").get<int>();
    for (const auto& p : j.at("pairs")) m.pairs.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
    for (const auto& v : j.at("values")) m.values.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
    m.noise_percent = j.value("noise_percent", 0.0);
    m.seed = j.value("seed", std::uint64_t{0});
    if (m.values.size() != m.pairs.size() || m.values.empty())
      throw InvalidInput("measurement needs one value per pair");
    return m;
  } catch (const json::exception& e) {
    throw InvalidInput("malformed measurement file " + path.string() + ": " + e.what());
  }
}

json result_json(const id::IdentificationResult& r, const id::ParameterSpace& space, int nx) {
  json trace = json::array();
  for (const auto& s : r.trace) {
    const fe::CrackSpec c = space.crack(s.best_theta);
    trace.push_back({{"generation", s.generation},
                     {"best_objective", std::isfinite(s.best) ? json(s.best) : json(nullptr)},
                     {"mean_objective", std::isfinite(s.mean) ? json(s.mean) : json(nullptr)},
                     {"best_location_index", c.location_index},
                     {"best_depth_percent", c.depth_percent}});
  }
  return {{"best", crack_json(space.crack(r.best), nx)},
          {"objective_percent", std::isfinite(r.objective) ? json(r.objective) : json(nullptr)},
          {"generations", r.generations},
          {"evaluations", r.evaluations},
          {"reached_threshold", r.reached_threshold},
          {"exhaustive", r.exhaustive},
          {"trace", trace}};
}

}  // namespace

void run_identify(const Context& ctx, const IdentifyOptions& o) {
  auto s = identify_setup(ctx);
  id::Measurement m;
  json truth = nullptr;
  double synth_s = 0.0;
  const double noise = o.noise.value_or(ctx.cfg.noise_percent);
  if (noise < 0.0) throw InvalidInput("--noise must be non-negative");
  if (o.measurement) {
    m = read_measurement(*o.measurement);
  } else {
    const fe::CrackSpec& crack = require_crack(ctx);
    (void)s->space.theta(crack);
    synth_s = time_it([&] {
      const td::TimeHistory h = id::record_response(s->problem, crack, hz_to_rad(ctx.cfg.measurement_hz),
                                                    ctx.cfg.noise_periods, ctx.cfg.integrator);
      m = id::measure(h, ctx.cfg.order, s->forward->pairs(), noise, ctx.cfg.seed);
    });
    truth = crack_json(crack, ctx.cfg.beam.nx);
  }
  id::GaConfig ga = ctx.cfg.ga;
  ga.seed = ctx.cfg.seed;
  ga.threads = ctx.threads;
  ga.threshold = id::stopping_threshold(m.noise_percent);
  if (o.fallback) ga.exhaustive_fallback = true;
  id::IdentificationResult r;
  const double ga_s = time_it([&] { r = id::run_ga(s->space, ga, *s->forward, m); });
  json result = result_json(r, s->space, ctx.cfg.beam.nx);
  result["truth"] = truth;
  result["measurement"] = measurement_json(m);
  result["threshold_percent"] = ga.threshold;
  result["timing"] = {{"setup_seconds", s->offline_seconds},
                      {"synthesis_seconds", synth_s},
                      {"ga_seconds", ga_s},
                      {"models_built", s->forward->model_builds()}};
  write_json(ctx, "identify.json", envelope("identify", ctx.cfg, units_common(), result));
}

void run_montecarlo(const Context& ctx, const MonteCarloOptions& o) {
  const int replicates = o.replicates.value_or(ctx.cfg.replicates);
  if (replicates < 1) throw InvalidInput("--replicates must be at least 1");
  auto s = identify_setup(ctx);
  id::GaConfig ga = ctx.cfg.ga;
  if (o.fallback) ga.exhaustive_fallback = true;

  CsvWriter csv("montecarlo", ctx.cfg.hash(), "location: node line and normalized [-1, 1]",
                {"scenario", "location_index", "normalized_location", "count", "probability"});
  json scenarios = json::array();
  json timing = json::array();
  for (std::size_t k = 0; k < ctx.cfg.scenarios.size(); ++k) {
    const auto& sc = ctx.cfg.scenarios[k];
    id::Scenario scenario{sc.crack, sc.noise_percent, replicates, ctx.cfg.seed + k};
    td::TimeHistory clean;
    const double rec_s = time_it([&] {
      clean = id::record_response(s->problem, sc.crack, hz_to_rad(ctx.cfg.measurement_hz), ctx.cfg.noise_periods,
                                  ctx.cfg.integrator);
    });
    id::MonteCarloResult mc;
    const double mc_s = time_it([&] { mc = id::monte_carlo(scenario, ga, *s->forward, clean, ctx.threads); });
    for (auto [loc, count] : mc.summary.location_histogram)
      csv.row(static_cast<int>(k), loc, fe::CrackSpec{loc, 0}.normalized_location(ctx.cfg.beam.nx), count,
              double(count) / replicates);
    json outcomes = json::array();
    for (const auto& r : mc.outcomes) {
      json e = {{"replicate", r.replicate}, {"noise_seed", r.noise_seed}, {"ga_seed", r.ga_seed}, {"ok", r.ok}};
      if (r.ok) {
        e["found"] = crack_json(r.found, ctx.cfg.beam.nx);
        e["objective_percent"] = std::isfinite(r.objective) ? json(r.objective) : json(nullptr);
        e["generations"] = r.generations;
        e["location_error"] = r.location_error;
      } else {
        e["error"] = r.error;
      }
      outcomes.push_back(e);
    }
    const auto& sm = mc.summary;
    scenarios.push_back({{"truth", crack_json(sc.crack, ctx.cfg.beam.nx)},
                         {"noise_percent", sc.noise_percent},
                         {"replicates", replicates},
                         {"seed", scenario.seed},
                         {"summary",
                          {{"failures", sm.failures},
                           {"exact_location_probability", sm.exact_location_probability},
                           {"exact_probability", sm.exact_probability},
                           {"median_location_error", sm.median_location_error},
                           {"mean_location_error", sm.mean_location_error},
                           {"max_location_error", sm.max_location_error}}},
                         {"outcomes", outcomes}});
    timing.push_back({{"scenario", k}, {"record_seconds", rec_s}, {"monte_carlo_seconds", mc_s}});
    note("scenario " + std::to_string(k) + ": exact localization " +
         std::to_string(sm.exact_location_probability));
  }
  write_csv(ctx, "montecarlo_histogram.csv", csv);
  write_json(ctx, "montecarlo.json",
             envelope("montecarlo", ctx.cfg, units_common(),
                      {{"scenarios", scenarios},
                       {"exhaustive_fallback", ga.exhaustive_fallback},
                       {"timing", {{"setup_seconds", s->offline_seconds}, {"scenarios", timing}}}}));
}

void run_sdof_demo(const Context& ctx) {
  const int h = ctx.cfg.sdof_harmonics;
  CsvWriter spec("sdof-demo", ctx.cfg.hash(), "frequency: rad/s, displacement: model units",
                 {"case", "order", "frequency_rad_s", "magnitude"});
  CsvWriter series("sdof-demo", ctx.cfg.hash(), "time: s, displacement: model units", {"case", "time_s", "x"});
  json cases = json::object();
  for (auto [name, params] : {std::pair{"healthy", ctx.cfg.sdof_healthy}, std::pair{"cracked", ctx.cfg.sdof_cracked}}) {
    const sdof::SteadyResponse r = sdof::steady_response(params, h);
    for (int q = 0; q <= h; ++q) spec.row(name, q, q * params.omega, r.magnitudes[q]);
    const Vec t = r.history.time();
    for (Eigen::Index k = 0; k < t.size(); ++k) series.row(name, t[k], r.history.dofs(k, 0));
    json mags = json::array();
    for (int q = 0; q <= h; ++q) mags.push_back(r.magnitudes[q]);
    cases[name] = {{"magnitudes", mags},
                   {"ratio_2_1", r.magnitudes[2] / r.magnitudes[1]},
                   {"periods_to_steady", r.history.periods_run}};
  }
  write_csv(ctx, "sdof_spectrum.csv", spec);
  write_csv(ctx, "sdof_time.csv", series);
  write_json(ctx, "sdof.json", envelope("sdof-demo", ctx.cfg, {{"frequency", "rad/s"}, {"time", "s"}}, cases));
}

void run_bench(const Context& ctx, const BenchOptions& o) {
  if (o.runs < 1) throw InvalidInput("--runs must be at least 1");
  const double f = o.freq_hz.value_or(ctx.cfg.measurement_hz);
  const double w = hz_to_rad(f);
  const fe::BeamProblem problem(ctx.cfg.beam);
  const fe::CrackSpec crack = require_crack(ctx);
  const int p = ctx.cfg.order;
  const auto split = rom::SubstructureSplit::top_band(problem.mesh(), ctx.cfg.band_rows);
  bool cached = false;
  const auto b = substructure(ctx, problem, split, &cached);

  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  // Repeats f until at least 20 ms have elapsed; returns seconds per call.
  auto per_call = [](const std::function<void()>& fn) {
    int reps = 0;
    const auto t0 = std::chrono::steady_clock::now();
    double el = 0.0;
    do {
      fn();
      ++reps;
      el = seconds_since(t0);
    } while (el < 0.02);
    return el / reps;
  };

  json rows = json::array();
  for (rom::Kind kind : {rom::Kind::RB, rom::Kind::SUB}) {
    std::vector<double> build, nl, sur;
    int n = 0;
    for (int r = 0; r < o.runs; ++r) {
      rom::ReducedModel m;
      std::unique_ptr<FrequencyOperator> op;
      build.push_back(time_it([&] {
        m = kind == rom::Kind::RB ? rom::build_rb_model(problem, crack, ctx.cfg.rom_modes)
                                  : rom::build_sub_model(problem, split, *b, crack);
        op = std::make_unique<FrequencyOperator>(m.system);
      }));
      n = m.system.size();
      nl.push_back(per_call([&] { (void)hbm::solve_mhb(*op, w, ctx.cfg.aft); }));
      sur.push_back(per_call([&] { (void)tr::surrogate_outputs(*op, w, {p}); }));
    }
    const double tb = median(build), tn = median(nl), ts = median(sur);
    rows.push_back({{"model", kind_key(kind)},
                    {"dofs", n},
                    {"timing",
                     {{"construction_seconds", tb},
                      {"nonlinear_solution_seconds", tn},
                      {"surrogate_solution_seconds", ts},
                      {"nonlinear_total_seconds", tb + tn},
                      {"surrogate_total_seconds", tb + ts},
                      {"solution_speedup", tn / ts},
                      {"total_speedup", (tb + tn) / (tb + ts)}}}});
  }
  json machine = {{"hardware_threads", std::thread::hardware_concurrency()},
#if defined(__VERSION__)
                  {"compiler", __VERSION__},
#endif
                  {"threads_used", 1}};
  write_json(ctx, "bench.json",
             envelope("bench", ctx.cfg, {{"time", "s"}},
                      {{"frequency_hz", f},
                       {"crack", crack_json(crack, ctx.cfg.beam.nx)},
                       {"runs", o.runs},
                       {"statistic", "median"},
                       {"rows", rows},
                       {"timing", {{"machine", machine},
                                   {"substructure_from_cache", cached},
                                   {"substructure_offline_seconds", b->build_seconds}}}}));
  for (const auto& r : rows)
    std::cout << r["model"].get<std::string>() << ": construction " << r["timing"]["construction_seconds"]
              << " s, nonlinear " << r["timing"]["nonlinear_solution_seconds"] << " s, surrogate "
              << r["timing"]["surrogate_solution_seconds"] << " s, speedup " << r["timing"]["solution_speedup"]
              << "\n";
}

}  // namespace hotr::cli
