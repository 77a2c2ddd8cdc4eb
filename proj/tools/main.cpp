#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"

#include "commands.hpp"
#include "config.hpp"

using namespace hotr;
using namespace hotr::cli;

namespace {

int report(const std::string& kind, const std::string& message, const std::vector<std::string>& paths, int code) {
  json err = {{"kind", kind}, {"message", message}};
  if (!paths.empty()) err["paths"] = paths;
  std::cerr << json{{"error", err}}.dump() << "\n";
  return code;
}

bool config_sets_threads(const std::optional<std::filesystem::path>& path) {
  if (!path) return false;
  std::ifstream in(*path);
  const json doc = json::parse(in, nullptr, false);
  return doc.is_object() && doc.contains("threads");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Higher-order transmissibility toolkit for breathing-crack beams"};
  app.require_subcommand(1);

  std::optional<std::filesystem::path> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out = "hotr-out";
  app.add_option("--config", config_path, "JSON experiment configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_option("--threads", threads, "Worker threads (default: hardware concurrency)")->check(CLI::PositiveNumber);
  app.add_option("--out", out, "Output directory")->capture_default_str();

  MeshOptions mesh;
  auto* c_mesh = app.add_subcommand("mesh", "Write the mesh, crack pairs and sensor elements");
  c_mesh->add_flag("--healthy", mesh.healthy, "Ignore the configured crack");

  ModesOptions modes;
  auto* c_modes = app.add_subcommand("modes", "Closed-crack modes and Rayleigh coefficients");
  c_modes->add_option("--count", modes.count, "Number of modes")->capture_default_str();

  HbmOptions hbmo;
  auto* c_hbm = app.add_subcommand("simulate-hbm", "Harmonic balance steady states over a frequency list");
  c_hbm->add_option("--freq", hbmo.freq_hz, "Frequencies in Hz (default: configured sweep)");
  c_hbm->add_option("--harmonics", hbmo.harmonics, "Retained harmonics");
  c_hbm->add_option("--samples", hbmo.samples, "AFT samples per period");
  c_hbm->add_option("--model", hbmo.kind, "full, rb or sub");

  TimeOptions timeo;
  auto* c_time = app.add_subcommand("simulate-time", "Time integration to steady state with optional noise");
  c_time->add_option("--freq", timeo.freq_hz, "Forcing frequency in Hz");
  c_time->add_option("--periods", timeo.periods, "Recorded periods");
  c_time->add_option("--rho-inf", timeo.rho_inf, "Spectral radius at infinity");
  c_time->add_option("--steps-per-period", timeo.steps_per_period, "Time steps per period");
  c_time->add_option("--noise", timeo.noise, "Noise level in percent of each channel's RMS");
  c_time->add_option("--model", timeo.kind, "full, rb or sub");

  ReduceOptions reduce;
  auto* c_reduce = app.add_subcommand("reduce", "Build RB and SUB models and report sizes and timings");
  c_reduce->add_option("--kind", reduce.kind, "rb, sub or both")->capture_default_str();
  c_reduce->add_option("--modes", reduce.modes, "Modal coordinates");

  HotrOptions hotro;
  auto* c_hotr = app.add_subcommand("hotr", "Transmissibility sweep, nonlinear and surrogate");
  c_hotr->add_option("--method", hotro.method, "nonlinear, surrogate or both")->capture_default_str();
  c_hotr->add_option("--model", hotro.kind, "full, rb or sub");

  IdentifyOptions ido;
  auto* c_id = app.add_subcommand("identify", "Genetic-algorithm crack identification");
  c_id->add_option("--measurement", ido.measurement, "Measurement JSON (default: synthesized)")
      ->check(CLI::ExistingFile);
  c_id->add_option("--noise", ido.noise, "Noise level in percent for a synthesized measurement");
  c_id->add_flag("--exhaustive-fallback", ido.fallback, "Scan the whole grid if the threshold is missed");

  MonteCarloOptions mco;
  auto* c_mc = app.add_subcommand("montecarlo", "Repeated noisy identification per scenario");
  c_mc->add_option("--replicates", mco.replicates, "Replicates per scenario");
  c_mc->add_flag("--exhaustive-fallback", mco.fallback, "Scan the whole grid if the threshold is missed");

  auto* c_sdof = app.add_subcommand("sdof-demo", "Healthy and breathing single-DoF spectra");

  BenchOptions bench;
  auto* c_bench = app.add_subcommand("bench", "Construction and solution timings for RB and SUB");
  c_bench->add_option("--runs", bench.runs, "Repetitions; medians are reported")->capture_default_str();
  c_bench->add_option("--freq", bench.freq_hz, "Frequency in Hz");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("usage", e.what(), {}, 1);
  }

  try {
    Context ctx;
    ctx.cfg = load_config(config_path);
    if (seed) ctx.cfg.seed = *seed;
    if (threads)
      ctx.threads = *threads;
    else if (config_sets_threads(config_path))
      ctx.threads = ctx.cfg.threads;
    else
      ctx.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    ctx.cfg.threads = ctx.threads;
    ctx.out = out;
    const char* cache = std::getenv("HOTR_CACHE_DIR");
    ctx.cache_dir = cache && *cache ? std::filesystem::path(cache) : ctx.out / "cache";
    std::filesystem::create_directories(ctx.out);

    if (*c_mesh) run_mesh(ctx, mesh);
    else if (*c_modes) run_modes(ctx, modes);
    else if (*c_hbm) run_simulate_hbm(ctx, hbmo);
    else if (*c_time) run_simulate_time(ctx, timeo);
    else if (*c_reduce) run_reduce(ctx, reduce);
    else if (*c_hotr) run_hotr(ctx, hotro);
    else if (*c_id) run_identify(ctx, ido);
    else if (*c_mc) run_montecarlo(ctx, mco);
    else if (*c_sdof) run_sdof_demo(ctx);
    else if (*c_bench) run_bench(ctx, bench);
    return 0;
  } catch (const ConfigError& e) {
    return report("config", e.what(), e.problems(), 1);
  } catch (const InvalidInput& e) {
    return report("invalid_input", e.what(), {}, 1);
  } catch (const std::filesystem::filesystem_error& e) {
    return report("io", e.what(), {e.path1().string()}, 2);
  } catch (const std::exception& e) {
    return report("internal", e.what(), {}, 2);
  }
}
