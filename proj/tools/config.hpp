#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "hotr/fe.hpp"
#include "hotr/hbm.hpp"
#include "hotr/identify.hpp"
#include "hotr/rom.hpp"
#include "hotr/sdof.hpp"
#include "hotr/timedomain.hpp"

namespace hotr::cli {

using nlohmann::json;

/// Schema violations; one entry per offending JSON path.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct FrequencyPlan {
  double start_hz = 50.0;
  double stop_hz = 650.0;
  int points = 241;
  std::vector<double> list_hz;  // overrides the range when non-empty

  std::vector<double> hz() const;
};

struct MonteCarloCase {
  fe::CrackSpec crack;
  double noise_percent = 1.0;
};

struct ExperimentConfig {
  fe::BeamConfig beam;
  std::optional<fe::CrackSpec> crack = fe::CrackSpec{50, 15};
  FrequencyPlan sweep;
  double measurement_hz = 128.0;
  hbm::AftConfig aft;
  td::IntegratorConfig integrator;
  rom::Kind rom_kind = rom::Kind::RB;
  int rom_modes = 6;
  int band_rows = 4;
  id::GaConfig ga;
  std::vector<int> depths_percent{5, 10, 15};
  int order = 2;
  double noise_percent = 0.0;
  int noise_periods = 100;  // recording window for measurements
  int replicates = 50;
  std::vector<MonteCarloCase> scenarios{{{50, 15}, 1.0}, {{90, 5}, 10.0}};
  sdof::SdofParams sdof_healthy = sdof::SdofParams::healthy();
  sdof::SdofParams sdof_cracked = sdof::SdofParams::cracked();
  int sdof_harmonics = 8;
  std::uint64_t seed = 1;
  int threads = 1;

  /// Every setting with defaults filled in.
  json resolved() const;
  /// FNV-1a of the compact resolved JSON, in hex.
  std::string hash() const;
};

/// Defaults overlaid with `doc`; throws ConfigError listing every bad path.
ExperimentConfig parse_config(const json& doc);
ExperimentConfig load_config(const std::optional<std::filesystem::path>& path);

}  // namespace hotr::cli
