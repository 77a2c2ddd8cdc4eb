#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace hotr::cli {

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error([&] {
        std::string msg = "invalid configuration";
        for (const auto& p : problems) msg += "\n  " + p;
        return msg;
      }()),
      problems_(std::move(problems)) {}

std::vector<double> FrequencyPlan::hz() const {
  if (!list_hz.empty()) return list_hz;
  std::vector<double> out;
  out.reserve(points);
  for (int i = 0; i < points; ++i)
    out.push_back(points == 1 ? start_hz : start_hz + (stop_hz - start_hz) * i / (points - 1));
  return out;
}

namespace {

// Walks one JSON object, recording type errors and unknown keys by path.
class Reader {
 public:
  Reader(const json* node, std::string path, std::vector<std::string>& errors)
      : node_(node), path_(std::move(path)), errors_(errors) {
    if (node_ && !node_->is_object()) {
      fail("", "must be an object");
      node_ = nullptr;
    }
  }

  ~Reader() {
    if (!node_) return;
    for (auto it = node_->begin(); it != node_->end(); ++it)
      if (!seen_.count(it.key())) errors_.push_back(path_ + "/" + it.key() + ": unknown key");
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    if (!node_) return nullptr;
    auto it = node_->find(key);
    return it == node_->end() ? nullptr : &*it;
  }

  Reader child(const std::string& key) { return Reader(find(key), path_ + "/" + key, errors_); }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (v->is_number()) out = v->get<double>();
      else fail(key, "must be a number");
    }
  }
  void integer(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (v->is_number_integer()) out = v->get<int>();
      else fail(key, "must be an integer");
    }
  }
  void unsigned64(const std::string& key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (v->is_number_unsigned()) out = v->get<std::uint64_t>();
      else fail(key, "must be a non-negative integer");
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (v->is_boolean()) out = v->get<bool>();
      else fail(key, "must be a boolean");
    }
  }
  void string(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (v->is_string()) out = v->get<std::string>();
      else fail(key, "must be a string");
    }
  }
  template <class T>
  void list(const std::string& key, std::vector<T>& out) {
    if (const json* v = find(key)) {
      bool ok = v->is_array();
      if (ok)
        for (const auto& e : *v) ok = ok && (std::is_integral_v<T> ? e.is_number_integer() : e.is_number());
      if (ok) out = v->get<std::vector<T>>();
      else fail(key, std::is_integral_v<T> ? "must be an array of integers" : "must be an array of numbers");
    }
  }

  void fail(const std::string& key, const std::string& what) {
    errors_.push_back(path_ + (key.empty() ? "" : "/" + key) + ": " + what);
  }
  const std::string& path() const { return path_; }
  bool present() const { return node_ != nullptr; }

 private:
  const json* node_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

template <class F>
void check(std::vector<std::string>& errors, const std::string& path, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    errors.push_back(path + ": " + e.what());
  }
}

void read_crack(const json* node, const std::string& path, int nx, std::optional<fe::CrackSpec>& out,
                std::vector<std::string>& errors) {
  if (!node) return;
  if (node->is_null()) {
    out.reset();
    return;
  }
  Reader r(node, path, errors);
  if (!r.present()) return;
  int loc = -1;
  double normalized = 2.0;
  int depth = -1;
  r.integer("location_index", loc);
  r.number("normalized_location", normalized);
  r.integer("depth_percent", depth);
  if (depth < 0) r.fail("depth_percent", "is required");
  if ((loc >= 0) == (normalized != 2.0)) {
    r.fail("", "needs exactly one of location_index and normalized_location");
    return;
  }
  if (loc >= 0) {
    out = fe::CrackSpec{loc, depth};
  } else {
    check(errors, path + "/normalized_location",
          [&] { out = fe::CrackSpec::from_normalized(normalized, depth, nx); });
  }
}

sdof::SdofParams read_sdof(Reader r, sdof::SdofParams p) {
  r.number("m", p.m);
  r.number("c", p.c);
  r.number("k", p.k);
  r.number("k0", p.k0);
  r.number("gap", p.gap);
  r.number("omega", p.omega);
  r.number("amplitude", p.amplitude);
  return p;
}

json sdof_json(const sdof::SdofParams& p) {
  return {{"m", p.m}, {"c", p.c}, {"k", p.k}, {"k0", p.k0}, {"gap", p.gap}, {"omega", p.omega},
          {"amplitude", p.amplitude}};
}

std::string kind_key(rom::Kind k) {
  return k == rom::Kind::Full ? "full" : k == rom::Kind::RB ? "rb" : "sub";
}

json crack_json(const std::optional<fe::CrackSpec>& c) {
  if (!c) return nullptr;
  return {{"location_index", c->location_index}, {"depth_percent", c->depth_percent}};
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  ExperimentConfig cfg;
  std::vector<std::string> errors;
  {
    Reader root(&doc, "", errors);
    {
      Reader b = root.child("beam");
      b.number("length", cfg.beam.length);
      b.number("height", cfg.beam.height);
      b.integer("nx", cfg.beam.nx);
      b.integer("ny", cfg.beam.ny);
      {
        Reader m = b.child("material");
        m.number("youngs_modulus", cfg.beam.material.youngs_modulus);
        m.number("density", cfg.beam.material.density);
        m.number("poisson", cfg.beam.material.poisson);
        m.number("thickness", cfg.beam.material.thickness);
      }
      if (const json* p = b.find("penalty")) {
        if (p->is_null()) cfg.beam.penalty.reset();
        else if (p->is_number()) cfg.beam.penalty = p->get<double>();
        else b.fail("penalty", "must be a number or null");
      }
      b.number("damping_ratio", cfg.beam.damping_ratio);
      b.number("midspan_deflection", cfg.beam.midspan_deflection);
      b.list("sensor_columns", cfg.beam.sensor_columns);
    }
    check(errors, "/beam", [&] { cfg.beam.validate(); });
    read_crack(root.find("crack"), "/crack", cfg.beam.nx, cfg.crack, errors);
    {
      Reader f = root.child("sweep");
      f.number("start_hz", cfg.sweep.start_hz);
      f.number("stop_hz", cfg.sweep.stop_hz);
      f.integer("points", cfg.sweep.points);
      f.list("list_hz", cfg.sweep.list_hz);
      if (cfg.sweep.points < 1) f.fail("points", "must be at least 1");
      if (!(cfg.sweep.start_hz > 0.0) || cfg.sweep.stop_hz < cfg.sweep.start_hz)
        f.fail("", "needs 0 < start_hz <= stop_hz");
      for (double v : cfg.sweep.list_hz)
        if (!(v > 0.0)) f.fail("list_hz", "frequencies must be positive");
    }
    root.number("measurement_hz", cfg.measurement_hz);
    if (!(cfg.measurement_hz > 0.0)) root.fail("measurement_hz", "must be positive");
    {
      Reader a = root.child("aft");
      a.integer("harmonics", cfg.aft.harmonics);
      a.integer("samples", cfg.aft.samples);
    }
    check(errors, "/aft", [&] { cfg.aft.validate(); });
    {
      Reader t = root.child("integrator");
      t.number("rho_inf", cfg.integrator.rho_inf);
      t.integer("steps_per_period", cfg.integrator.steps_per_period);
      t.integer("max_periods", cfg.integrator.max_periods);
      t.number("steady_tol", cfg.integrator.steady_tol);
      t.integer("steady_periods", cfg.integrator.steady_periods);
      t.integer("harmonics", cfg.integrator.harmonics);
      t.integer("record_periods", cfg.integrator.record_periods);
    }
    check(errors, "/integrator", [&] { cfg.integrator.validate(); });
    {
      Reader r = root.child("rom");
      std::string kind = kind_key(cfg.rom_kind);
      r.string("kind", kind);
      if (kind == "full") cfg.rom_kind = rom::Kind::Full;
      else if (kind == "rb") cfg.rom_kind = rom::Kind::RB;
      else if (kind == "sub") cfg.rom_kind = rom::Kind::SUB;
      else r.fail("kind", "must be one of full, rb, sub");
      r.integer("modes", cfg.rom_modes);
      r.integer("band_rows", cfg.band_rows);
      if (cfg.rom_modes < 0) r.fail("modes", "must be non-negative");
      if (cfg.band_rows < 1 || cfg.band_rows >= cfg.beam.ny) r.fail("band_rows", "must lie in [1, ny)");
    }
    {
      Reader g = root.child("ga");
      g.integer("population", cfg.ga.population);
      g.integer("max_generations", cfg.ga.max_generations);
      g.integer("elite", cfg.ga.elite);
      g.number("crossover_fraction", cfg.ga.crossover_fraction);
      g.number("mutation_scale", cfg.ga.mutation_scale);
      g.number("mutation_shrink", cfg.ga.mutation_shrink);
      std::string units = cfg.ga.mutation_units == id::GaConfig::MutationUnits::Grid ? "grid" : "range";
      g.string("mutation_units", units);
      if (units == "grid") cfg.ga.mutation_units = id::GaConfig::MutationUnits::Grid;
      else if (units == "range") cfg.ga.mutation_units = id::GaConfig::MutationUnits::Range;
      else g.fail("mutation_units", "must be grid or range");
      g.boolean("exhaustive_fallback", cfg.ga.exhaustive_fallback);
    }
    check(errors, "/ga", [&] { cfg.ga.validate(); });
    {
      Reader i = root.child("identification");
      i.list("depths_percent", cfg.depths_percent);
      i.integer("order", cfg.order);
      if (cfg.order < 1 || cfg.order > cfg.aft.harmonics) i.fail("order", "must lie in [1, aft.harmonics]");
      check(errors, "/identification/depths_percent", [&] {
        for (int d : cfg.depths_percent) (void)fe::CrackSpec{1, d}.depth_elements(cfg.beam.ny);
        id::ParameterSpace(1, 1, cfg.depths_percent);
      });
    }
    {
      Reader n = root.child("noise");
      n.number("level_percent", cfg.noise_percent);
      n.integer("record_periods", cfg.noise_periods);
      if (cfg.noise_percent < 0.0) n.fail("level_percent", "must be non-negative");
      if (cfg.noise_periods < 1) n.fail("record_periods", "must be at least 1");
    }
    {
      Reader m = root.child("montecarlo");
      m.integer("replicates", cfg.replicates);
      if (cfg.replicates < 1) m.fail("replicates", "must be at least 1");
      if (const json* s = m.find("scenarios")) {
        if (!s->is_array()) {
          m.fail("scenarios", "must be an array");
        } else {
          cfg.scenarios.clear();
          for (std::size_t k = 0; k < s->size(); ++k) {
            const std::string path = m.path() + "/scenarios/" + std::to_string(k);
            Reader sc(&(*s)[k], path, errors);
            MonteCarloCase c;
            std::optional<fe::CrackSpec> crack;
            json crack_part = json::object();
            if (sc.present())
              for (const char* key : {"location_index", "normalized_location", "depth_percent"})
                if (const json* v = sc.find(key)) crack_part[key] = *v;
            read_crack(&crack_part, path, cfg.beam.nx, crack, errors);
            sc.number("noise_percent", c.noise_percent);
            if (c.noise_percent < 0.0) sc.fail("noise_percent", "must be non-negative");
            if (crack) c.crack = *crack;
            cfg.scenarios.push_back(c);
          }
        }
      }
    }
    {
      Reader s = root.child("sdof");
      cfg.sdof_healthy = read_sdof(s.child("healthy"), cfg.sdof_healthy);
      cfg.sdof_cracked = read_sdof(s.child("cracked"), cfg.sdof_cracked);
      s.integer("harmonics", cfg.sdof_harmonics);
      if (cfg.sdof_harmonics < 1) s.fail("harmonics", "must be at least 1");
    }
    check(errors, "/sdof/healthy", [&] { cfg.sdof_healthy.validate(); });
    check(errors, "/sdof/cracked", [&] { cfg.sdof_cracked.validate(); });
    root.unsigned64("seed", cfg.seed);
    root.integer("threads", cfg.threads);
    if (cfg.threads < 1) root.fail("threads", "must be at least 1");
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

ExperimentConfig load_config(const std::optional<std::filesystem::path>& path) {
  if (!path) return parse_config(json::object());
  std::ifstream in(*path);
  if (!in) throw ConfigError({path->string() + ": cannot open"});
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError({path->string() + ": " + e.what()});
  }
  return parse_config(doc);
}

json ExperimentConfig::resolved() const {
  const auto& m = beam.material;
  json scen = json::array();
  for (const auto& s : scenarios)
    scen.push_back({{"location_index", s.crack.location_index},
                    {"depth_percent", s.crack.depth_percent},
                    {"noise_percent", s.noise_percent}});
  return {
      {"beam",
       {{"length", beam.length},
        {"height", beam.height},
        {"nx", beam.nx},
        {"ny", beam.ny},
        {"material",
         {{"youngs_modulus", m.youngs_modulus}, {"density", m.density}, {"poisson", m.poisson},
          {"thickness", m.thickness}}},
        {"penalty", beam.penalty ? json(*beam.penalty) : json(nullptr)},
        {"damping_ratio", beam.damping_ratio},
        {"midspan_deflection", beam.midspan_deflection},
        {"sensor_columns", beam.sensor_columns}}},
      {"crack", crack_json(crack)},
      {"sweep",
       {{"start_hz", sweep.start_hz}, {"stop_hz", sweep.stop_hz}, {"points", sweep.points},
        {"list_hz", sweep.list_hz}}},
      {"measurement_hz", measurement_hz},
      {"aft", {{"harmonics", aft.harmonics}, {"samples", aft.samples}}},
      {"integrator",
       {{"rho_inf", integrator.rho_inf},
        {"steps_per_period", integrator.steps_per_period},
        {"max_periods", integrator.max_periods},
        {"steady_tol", integrator.steady_tol},
        {"steady_periods", integrator.steady_periods},
        {"harmonics", integrator.harmonics},
        {"record_periods", integrator.record_periods}}},
      {"rom", {{"kind", kind_key(rom_kind)}, {"modes", rom_modes}, {"band_rows", band_rows}}},
      {"ga",
       {{"population", ga.population},
        {"max_generations", ga.max_generations},
        {"elite", ga.elite},
        {"crossover_fraction", ga.crossover_fraction},
        {"mutation_scale", ga.mutation_scale},
        {"mutation_shrink", ga.mutation_shrink},
        {"mutation_units", ga.mutation_units == id::GaConfig::MutationUnits::Grid ? "grid" : "range"},
        {"exhaustive_fallback", ga.exhaustive_fallback}}},
      {"identification", {{"depths_percent", depths_percent}, {"order", order}}},
      {"noise", {{"level_percent", noise_percent}, {"record_periods", noise_periods}}},
      {"montecarlo", {{"replicates", replicates}, {"scenarios", scen}}},
      {"sdof",
       {{"healthy", sdof_json(sdof_healthy)}, {"cracked", sdof_json(sdof_cracked)}, {"harmonics", sdof_harmonics}}},
      {"seed", seed},
  };
}

std::string ExperimentConfig::hash() const { return to_hex(fnv1a64(resolved().dump())); }

}  // namespace hotr::cli
