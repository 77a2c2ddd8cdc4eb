#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace hotr::cli {

struct Context {
  ExperimentConfig cfg;
  std::filesystem::path out = "hotr-out";
  std::filesystem::path cache_dir;
  int threads = 1;
};

struct MeshOptions {
  bool healthy = false;
};
struct ModesOptions {
  int count = 10;
};
struct HbmOptions {
  std::vector<double> freq_hz;
  std::optional<int> harmonics;
  std::optional<int> samples;
  std::optional<std::string> kind;
};
struct TimeOptions {
  std::optional<double> freq_hz;
  std::optional<int> periods;
  std::optional<double> rho_inf;
  std::optional<int> steps_per_period;
  std::optional<double> noise;
  std::optional<std::string> kind;
};
struct ReduceOptions {
  std::string kind = "both";
  std::optional<int> modes;
};
struct HotrOptions {
  std::string method = "both";
  std::optional<std::string> kind;
};
struct IdentifyOptions {
  std::optional<std::filesystem::path> measurement;
  std::optional<double> noise;
  bool fallback = false;
};
struct MonteCarloOptions {
  std::optional<int> replicates;
  bool fallback = false;
};
struct BenchOptions {
  int runs = 5;
  std::optional<double> freq_hz;
};

void run_mesh(const Context& ctx, const MeshOptions& o);
void run_modes(const Context& ctx, const ModesOptions& o);
void run_simulate_hbm(const Context& ctx, const HbmOptions& o);
void run_simulate_time(const Context& ctx, const TimeOptions& o);
void run_reduce(const Context& ctx, const ReduceOptions& o);
void run_hotr(const Context& ctx, const HotrOptions& o);
void run_identify(const Context& ctx, const IdentifyOptions& o);
void run_montecarlo(const Context& ctx, const MonteCarloOptions& o);
void run_sdof_demo(const Context& ctx);
void run_bench(const Context& ctx, const BenchOptions& o);

}  // namespace hotr::cli
