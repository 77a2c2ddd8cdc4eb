#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "hotr/fe.hpp"
#include "hotr/rom.hpp"
#include "hotr/timedomain.hpp"
#include "hotr/transmissibility.hpp"

/// Crack identification: a discrete search over (location, depth) that
/// matches surrogate transmissibilities of candidate models to a measurement.
namespace hotr::id {

/// Grid coordinates of a candidate: location offset and depth index.
struct Theta {
  int location = 0;  // 0 .. location_count - 1
  int depth = 0;     // 0 .. depth_count - 1
  auto operator<=>(const Theta&) const = default;
};

class ParameterSpace {
 public:
  /// Node lines first_location .. last_location, crossed with the depths (percent).
  ParameterSpace(int first_location, int last_location, std::vector<int> depths_percent);
  /// Every interior node line of the beam with depths 5, 10 and 15 percent.
  static ParameterSpace for_problem(const fe::BeamProblem& problem, std::vector<int> depths_percent = {5, 10, 15});

  int location_count() const { return last_ - first_ + 1; }
  int depth_count() const { return static_cast<int>(depths_.size()); }
  int size() const { return location_count() * depth_count(); }
  const std::vector<int>& depths() const { return depths_; }

  bool contains(const Theta& t) const;
  Theta clamp(int location, int depth) const;
  Theta at(int flat) const;
  int index(const Theta& t) const;

  fe::CrackSpec crack(const Theta& t) const;
  /// Throws InvalidInput when the crack is not on the grid.
  Theta theta(const fe::CrackSpec& crack) const;

 private:
  int first_;
  int last_;
  std::vector<int> depths_;
};

/// Transmissibilities of one order at one frequency over a fixed pair list.
struct Measurement {
  double omega = 0.0;
  int order = 2;
  std::vector<tr::SensorPair> pairs;
  std::vector<Complex> values;
  double noise_percent = 0.0;
  std::uint64_t seed = 0;
};

/// Measurement from sampled sensor signals: optional noise per channel, then
/// harmonic extraction over the whole window and sensor ratios.
Measurement measure(const td::TimeHistory& history, int order, const std::vector<tr::SensorPair>& pairs,
                    double noise_percent = 0.0, std::uint64_t seed = 0);
/// Noise-free measurement taken from a harmonic-balance solution.
Measurement measure(const hbm::HarmonicSolution& sol, const Mat& sensor_rows, int order,
                    const std::vector<tr::SensorPair>& pairs);

/// Steady sensor response of the RB model of `crack`, recorded over `periods` periods.
td::TimeHistory record_response(const fe::BeamProblem& problem, const fe::CrackSpec& crack, double omega,
                                int periods, td::IntegratorConfig cfg = {});

inline constexpr double kUnscored = std::numeric_limits<double>::infinity();

/// 100 * ||sim - meas|| / ||meas|| over complex values.
double objective(const std::vector<Complex>& simulated, const std::vector<Complex>& measured);

/// Candidate models: SUB reduction sharing one substructure B, scored by the
/// closed-crack surrogate. Results are cached per theta and the cache may be
/// shared between threads.
class ForwardModel {
 public:
  ForwardModel(const fe::BeamProblem& problem, const ParameterSpace& space, rom::SubstructureSplit split,
               std::shared_ptr<const rom::ReducedSubstructure> b, double omega, int order,
               std::vector<tr::SensorPair> pairs);

  /// Surrogate values over pairs(); empty when the transmissibility is undefined.
  std::vector<Complex> transmissibility(const Theta& t);
  double objective(const Theta& t, const Measurement& measured);
  /// Scores a batch, filling missing cache entries on up to `threads` workers.
  std::vector<double> objective(const std::vector<Theta>& thetas, const Measurement& measured, int threads = 1);

  double omega() const { return omega_; }
  int order() const { return order_; }
  const std::vector<tr::SensorPair>& pairs() const { return pairs_; }
  const ParameterSpace& space() const { return space_; }
  /// Candidate models built so far (cache misses).
  long model_builds() const;

 private:
  std::vector<Complex> compute(const Theta& t) const;

  const fe::BeamProblem& problem_;
  ParameterSpace space_;
  rom::SubstructureSplit split_;
  std::shared_ptr<const rom::ReducedSubstructure> b_;
  double omega_;
  int order_;
  std::vector<tr::SensorPair> pairs_;
  mutable std::mutex mutex_;
  std::map<Theta, std::vector<Complex>> cache_;
  long builds_ = 0;
};

struct GaConfig {
  int population = 7;
  int max_generations = 40;
  int elite = 2;
  double crossover_fraction = 0.8;
  double mutation_scale = 1.0;   // sigma at the first generation
  enum class MutationUnits { Grid, Range };
  /// Grid: sigma = scale grid cells. Range: sigma = scale * (cells - 1) per coordinate.
  MutationUnits mutation_units = MutationUnits::Grid;
  double mutation_shrink = 1.0;  // sigma falls linearly by this fraction over max_generations
  double threshold = 0.5;        // stop once the best J is below this
  bool exhaustive_fallback = false;  // scan the whole space if the threshold is never reached
  std::uint64_t seed = 1;
  int threads = 1;

  void validate() const;
};

/// J < max(2 * noise percent, 0.5).
double stopping_threshold(double noise_percent);

struct GenerationStats {
  int generation = 0;
  double best = 0.0;
  double mean = 0.0;  // over finite scores
  Theta best_theta;
};

struct IdentificationResult {
  Theta best;
  double objective = kUnscored;
  std::vector<GenerationStats> trace;  // generation 0 is the initial population
  long evaluations = 0;                // fitness calls, cached or not
  int generations = 0;
  bool reached_threshold = false;
  bool exhaustive = false;
};

/// Scores a batch of candidates.
using BatchFitness = std::function<std::vector<double>(const std::vector<Theta>&)>;

IdentificationResult run_ga(const ParameterSpace& space, const GaConfig& cfg, const BatchFitness& fitness);
IdentificationResult run_ga(const ParameterSpace& space, const GaConfig& cfg, ForwardModel& model,
                            const Measurement& measured);

/// Exhaustive argmin; ties go to the lowest flat index.
IdentificationResult brute_force(const ParameterSpace& space, const BatchFitness& fitness);

struct Scenario {
  fe::CrackSpec crack;
  double noise_percent = 1.0;
  int replicates = 50;
  std::uint64_t seed = 1;

  void validate() const;
};

struct ReplicateOutcome {
  int replicate = 0;
  std::uint64_t noise_seed = 0;
  std::uint64_t ga_seed = 0;
  bool ok = false;
  std::string error;
  fe::CrackSpec found;
  double objective = kUnscored;
  int generations = 0;
  int location_error = 0;  // node lines
};

struct MonteCarloSummary {
  int replicates = 0;
  int failures = 0;
  double exact_location_probability = 0.0;
  double exact_probability = 0.0;  // location and depth
  double median_location_error = 0.0;
  double mean_location_error = 0.0;
  int max_location_error = 0;
  std::map<int, int> location_histogram;  // node line -> count
};

struct MonteCarloResult {
  Scenario scenario;
  std::vector<ReplicateOutcome> outcomes;
  MonteCarloSummary summary;
};

/// Noise seed and GA seed of replicate r.
std::pair<std::uint64_t, std::uint64_t> replicate_seeds(std::uint64_t seed, int replicate);

/// Replicates share the clean recording `clean` of the true crack; each adds
/// fresh noise, extracts a measurement and runs the GA with the scenario's
/// stopping threshold. Failed replicates are kept with ok = false.
MonteCarloResult monte_carlo(const Scenario& scenario, const GaConfig& ga, ForwardModel& model,
                             const td::TimeHistory& clean, int threads = 1);

/// Probabilities are over all replicates, failures counting as misses.
MonteCarloSummary summarize(const std::vector<ReplicateOutcome>& outcomes, const fe::CrackSpec& truth);

}  // namespace hotr::id
