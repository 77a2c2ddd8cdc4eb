#include "hotr/identify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

namespace hotr::id {

// ---------------------------------------------------------------------------
// Parameter space

ParameterSpace::ParameterSpace(int first_location, int last_location, std::vector<int> depths_percent)
    : first_(first_location), last_(last_location), depths_(std::move(depths_percent)) {
  if (first_ < 1 || last_ < first_) throw InvalidInput("parameter space needs a non-empty location range");
  if (depths_.empty()) throw InvalidInput("parameter space needs at least one depth");
  for (std::size_t k = 0; k < depths_.size(); ++k) {
    if (depths_[k] <= 0 || depths_[k] >= 100) throw InvalidInput("crack depths must lie in (0, 100) percent");
    if (k > 0 && depths_[k] <= depths_[k - 1]) throw InvalidInput("crack depths must be ascending");
  }
}

ParameterSpace ParameterSpace::for_problem(const fe::BeamProblem& problem, std::vector<int> depths_percent) {
  for (int d : depths_percent) (void)fe::CrackSpec{1, d}.depth_elements(problem.config().ny);
  return ParameterSpace(problem.min_location(), problem.max_location(), std::move(depths_percent));
}

bool ParameterSpace::contains(const Theta& t) const {
  return t.location >= 0 && t.location < location_count() && t.depth >= 0 && t.depth < depth_count();
}

Theta ParameterSpace::clamp(int location, int depth) const {
  return {std::clamp(location, 0, location_count() - 1), std::clamp(depth, 0, depth_count() - 1)};
}

Theta ParameterSpace::at(int flat) const {
  if (flat < 0 || flat >= size()) throw InvalidInput("parameter index out of range");
  return {flat / depth_count(), flat % depth_count()};
}

int ParameterSpace::index(const Theta& t) const {
  if (!contains(t)) throw InvalidInput("theta outside the parameter space");
  return t.location * depth_count() + t.depth;
}

fe::CrackSpec ParameterSpace::crack(const Theta& t) const {
  if (!contains(t)) throw InvalidInput("theta outside the parameter space");
  return {first_ + t.location, depths_[t.depth]};
}

Theta ParameterSpace::theta(const fe::CrackSpec& crack) const {
  const auto it = std::find(depths_.begin(), depths_.end(), crack.depth_percent);
  const Theta t{crack.location_index - first_, static_cast<int>(it - depths_.begin())};
  if (it == depths_.end() || !contains(t)) throw InvalidInput("crack is not on the parameter grid");
  return t;
}

// ---------------------------------------------------------------------------
// Measurements

namespace {

Measurement from_outputs(const CVec& values, double reference, double omega, int order,
                         const std::vector<tr::SensorPair>& pairs) {
  Measurement m;
  m.omega = omega;
  m.order = order;
  m.pairs = pairs;
  for (const auto& rec : tr::ratios(values, reference, order, omega, pairs, tr::Method::Nonlinear))
    m.values.push_back(rec.value);
  return m;
}

}  // namespace

Measurement measure(const td::TimeHistory& history, int order, const std::vector<tr::SensorPair>& pairs,
                    double noise_percent, std::uint64_t seed) {
  if (order < 1) throw InvalidInput("measurement order must be at least 1");
  if (history.sensors.cols() == 0 || history.sensors.rows() == 0) throw InvalidInput("empty sensor history");
  if (noise_percent < 0.0) throw InvalidInput("noise level must be non-negative");
  const Mat signals = noise_percent > 0.0 ? td::add_noise_channels(history.sensors, noise_percent, seed)
                                          : history.sensors;
  const int sensors = static_cast<int>(signals.cols());
  CMat coeffs(sensors, order + 1);
  for (int c = 0; c < sensors; ++c)
    coeffs.row(c) = td::extract_harmonics(signals.col(c), history.time_origin, history.dt, history.omega, order)
                        .transpose();
  double reference = 0.0;
  for (int p = 1; p <= order; ++p) reference = std::max(reference, coeffs.col(p).cwiseAbs().maxCoeff());
  Measurement m = from_outputs(coeffs.col(order), reference, history.omega, order, pairs);
  m.noise_percent = noise_percent;
  m.seed = seed;
  return m;
}

Measurement measure(const hbm::HarmonicSolution& sol, const Mat& sensor_rows, int order,
                    const std::vector<tr::SensorPair>& pairs) {
  Measurement m;
  m.omega = sol.omega;
  m.order = order;
  m.pairs = pairs;
  for (const auto& rec : tr::tr_nonlinear(sol, sensor_rows, order, pairs)) m.values.push_back(rec.value);
  return m;
}

td::TimeHistory record_response(const fe::BeamProblem& problem, const fe::CrackSpec& crack, double omega,
                                int periods, td::IntegratorConfig cfg) {
  if (periods < 1) throw InvalidInput("recording needs at least one period");
  const rom::ReducedModel rb = rom::build_rb_model(problem, crack);
  cfg.record_periods = periods;
  return td::integrate(rb.system, omega, rb.system.force_amplitude, cfg);
}

double objective(const std::vector<Complex>& simulated, const std::vector<Complex>& measured) {
  if (measured.empty()) throw InvalidInput("objective needs a non-empty measurement");
  if (simulated.empty()) return kUnscored;
  if (simulated.size() != measured.size()) throw InvalidInput("simulated and measured pair sets differ");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < measured.size(); ++k) {
    num += std::norm(simulated[k] - measured[k]);
    den += std::norm(measured[k]);
  }
  if (!(den > 0.0)) throw InvalidInput("measured transmissibilities are all zero");
  const double j = 100.0 * std::sqrt(num / den);
  return std::isfinite(j) ? j : kUnscored;
}

// ---------------------------------------------------------------------------
// Forward model

ForwardModel::ForwardModel(const fe::BeamProblem& problem, const ParameterSpace& space,
                           rom::SubstructureSplit split, std::shared_ptr<const rom::ReducedSubstructure> b,
                           double omega, int order, std::vector<tr::SensorPair> pairs)
    : problem_(problem),
      space_(space),
      split_(std::move(split)),
      b_(std::move(b)),
      omega_(omega),
      order_(order),
      pairs_(std::move(pairs)) {
  if (!b_) throw InvalidInput("forward model needs a reduced substructure");
  if (!(omega_ > 0.0)) throw InvalidInput("measurement frequency must be positive");
  if (order_ < 1) throw InvalidInput("transmissibility order must be at least 1");
  if (pairs_.empty()) throw InvalidInput("forward model needs at least one sensor pair");
  const fe::CrackSpec deepest = space_.crack({0, space_.depth_count() - 1});
  if (!split_.contains(problem_.mesh(), deepest))
    throw InvalidInput("deepest crack of the parameter space reaches into substructure B");
}

std::vector<Complex> ForwardModel::compute(const Theta& t) const {
  const rom::ReducedModel sub = rom::build_sub_model(problem_, split_, *b_, space_.crack(t));
  const FrequencyOperator op(sub.system);
  try {
    const CVec v = tr::surrogate_outputs(op, omega_, {order_}).col(0);
    std::vector<Complex> out;
    for (const auto& rec : tr::ratios(v, v.cwiseAbs().maxCoeff(), order_, omega_, pairs_, tr::Method::Surrogate))
      out.push_back(rec.value);
    return out;
  } catch (const tr::UndefinedTransmissibility&) {
    return {};
  }
}

std::vector<Complex> ForwardModel::transmissibility(const Theta& t) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(t); it != cache_.end()) return it->second;
  }
  std::vector<Complex> v = compute(t);
  std::lock_guard lock(mutex_);
  auto [it, inserted] = cache_.emplace(t, std::move(v));
  if (inserted) ++builds_;
  return it->second;
}

double ForwardModel::objective(const Theta& t, const Measurement& measured) {
  if (measured.pairs != pairs_ || measured.order != order_)
    throw InvalidInput("measurement pair set or order differs from the forward model");
  if (std::abs(measured.omega - omega_) > 1e-9 * omega_)
    throw InvalidInput("measurement frequency differs from the forward model");
  return id::objective(transmissibility(t), measured.values);
}

std::vector<double> ForwardModel::objective(const std::vector<Theta>& thetas, const Measurement& measured,
                                            int threads) {
  if (threads > 1) {
    std::vector<Theta> missing;
    {
      std::lock_guard lock(mutex_);
      for (const auto& t : thetas)
        if (!cache_.count(t) && std::find(missing.begin(), missing.end(), t) == missing.end())
          missing.push_back(t);
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int workers = std::min<int>(threads, static_cast<int>(missing.size()));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < missing.size(); k = next++) transmissibility(missing[k]);
      });
    for (auto& th : pool) th.join();
  }
  std::vector<double> out;
  out.reserve(thetas.size());
  for (const auto& t : thetas) out.push_back(objective(t, measured));
  return out;
}

long ForwardModel::model_builds() const {
  std::lock_guard lock(mutex_);
  return builds_;
}

// ---------------------------------------------------------------------------
// Genetic algorithm

void GaConfig::validate() const {
  if (population < 2) throw InvalidInput("GA population must be at least 2");
  if (max_generations < 1) throw InvalidInput("GA needs at least one generation");
  if (elite < 0 || elite >= population) throw InvalidInput("GA elite count must lie in [0, population)");
  if (!(crossover_fraction >= 0.0 && crossover_fraction <= 1.0))
    throw InvalidInput("GA crossover fraction must lie in [0, 1]");
  if (!(mutation_scale >= 0.0) || !(mutation_shrink >= 0.0 && mutation_shrink <= 1.0))
    throw InvalidInput("GA mutation scale must be non-negative and shrink in [0, 1]");
  if (!(threshold >= 0.0)) throw InvalidInput("GA threshold must be non-negative");
  if (threads < 1) throw InvalidInput("GA needs at least one thread");
}

double stopping_threshold(double noise_percent) { return std::max(2.0 * noise_percent, 0.5); }

namespace {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

GenerationStats stats(int generation, const std::vector<Theta>& pop, const std::vector<double>& score) {
  GenerationStats s;
  s.generation = generation;
  s.best = kUnscored;
  double sum = 0.0;
  int finite = 0;
  for (std::size_t k = 0; k < pop.size(); ++k) {
    if (score[k] < s.best || (score[k] == s.best && pop[k] < s.best_theta)) {
      s.best = score[k];
      s.best_theta = pop[k];
    }
    if (std::isfinite(score[k])) {
      sum += score[k];
      ++finite;
    }
  }
  if (!std::isfinite(s.best)) s.best_theta = pop.front();
  s.mean = finite > 0 ? sum / finite : kUnscored;
  return s;
}

}  // namespace

IdentificationResult run_ga(const ParameterSpace& space, const GaConfig& cfg, const BatchFitness& fitness) {
  cfg.validate();
  std::mt19937_64 rng = make_rng(cfg.seed, 0);
  std::uniform_int_distribution<int> loc(0, space.location_count() - 1);
  std::uniform_int_distribution<int> dep(0, space.depth_count() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  IdentificationResult res;
  std::vector<Theta> pop(cfg.population);
  for (auto& t : pop) {
    t.location = loc(rng);
    t.depth = dep(rng);
  }
  std::vector<double> score = fitness(pop);
  if (score.size() != pop.size()) throw InvalidInput("fitness returned the wrong number of scores");
  res.evaluations += static_cast<long>(pop.size());
  res.trace.push_back(stats(0, pop, score));

  auto tournament = [&](const std::vector<int>& order) {
    // order is sorted best first, so the better of two ranks wins
    std::uniform_int_distribution<int> pick(0, static_cast<int>(order.size()) - 1);
    return order[std::min(pick(rng), pick(rng))];
  };

  const int n_cross =
      static_cast<int>(std::lround(cfg.crossover_fraction * double(cfg.population - cfg.elite)));
  for (int g = 1; g <= cfg.max_generations && !(res.trace.back().best < cfg.threshold); ++g) {
    std::vector<int> order(pop.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      if (score[a] != score[b]) return score[a] < score[b];
      return pop[a] < pop[b];
    });
    const double sigma =
        cfg.mutation_scale * std::max(0.0, 1.0 - cfg.mutation_shrink * double(g) / cfg.max_generations);

    std::vector<Theta> next;
    next.reserve(pop.size());
    for (int e = 0; e < cfg.elite; ++e) next.push_back(pop[order[e]]);
    for (int c = 0; c < n_cross; ++c) {
      const Theta& a = pop[tournament(order)];
      const Theta& b = pop[tournament(order)];
      Theta child;
      child.location = unit(rng) < 0.5 ? a.location : b.location;
      child.depth = unit(rng) < 0.5 ? a.depth : b.depth;
      next.push_back(child);
    }
    while (static_cast<int>(next.size()) < cfg.population) {
      const Theta& parent = pop[tournament(order)];
      const bool range = cfg.mutation_units == GaConfig::MutationUnits::Range;
      const double sl = range ? sigma * (space.location_count() - 1) : sigma;
      const double sd = range ? sigma * (space.depth_count() - 1) : sigma;
      const int dl = static_cast<int>(std::lround(sl * normal(rng)));
      const int dd = static_cast<int>(std::lround(sd * normal(rng)));
      next.push_back(space.clamp(parent.location + dl, parent.depth + dd));
    }
    std::vector<double> next_score(next.size());
    for (int e = 0; e < cfg.elite; ++e) next_score[e] = score[order[e]];
    const std::vector<Theta> fresh(next.begin() + cfg.elite, next.end());
    const std::vector<double> fs = fitness(fresh);
    if (fs.size() != fresh.size()) throw InvalidInput("fitness returned the wrong number of scores");
    std::copy(fs.begin(), fs.end(), next_score.begin() + cfg.elite);
    res.evaluations += static_cast<long>(fresh.size());
    pop = std::move(next);
    score = std::move(next_score);
    res.trace.push_back(stats(g, pop, score));
    res.generations = g;
  }

  res.best = res.trace.back().best_theta;
  res.objective = res.trace.back().best;
  // Without elitism the last generation need not hold the best seen so far.
  for (const auto& s : res.trace)
    if (s.best < res.objective) {
      res.objective = s.best;
      res.best = s.best_theta;
    }
  res.reached_threshold = res.objective < cfg.threshold;
  if (!res.reached_threshold && cfg.exhaustive_fallback) {
    const IdentificationResult all = brute_force(space, fitness);
    res.evaluations += all.evaluations;
    res.exhaustive = true;
    if (all.objective < res.objective) {
      res.objective = all.objective;
      res.best = all.best;
    }
    res.reached_threshold = res.objective < cfg.threshold;
  }
  return res;
}

IdentificationResult run_ga(const ParameterSpace& space, const GaConfig& cfg, ForwardModel& model,
                            const Measurement& measured) {
  return run_ga(space, cfg, [&](const std::vector<Theta>& ts) { return model.objective(ts, measured, cfg.threads); });
}

IdentificationResult brute_force(const ParameterSpace& space, const BatchFitness& fitness) {
  std::vector<Theta> all(space.size());
  for (int k = 0; k < space.size(); ++k) all[k] = space.at(k);
  const std::vector<double> score = fitness(all);
  if (score.size() != all.size()) throw InvalidInput("fitness returned the wrong number of scores");
  IdentificationResult res;
  res.evaluations = static_cast<long>(all.size());
  res.exhaustive = true;
  res.best = all.front();
  for (std::size_t k = 0; k < all.size(); ++k)
    if (score[k] < res.objective) {
      res.objective = score[k];
      res.best = all[k];
    }
  return res;
}

// ---------------------------------------------------------------------------
// Monte Carlo

void Scenario::validate() const {
  if (replicates < 1) throw InvalidInput("Monte Carlo needs at least one replicate");
  if (!(noise_percent >= 0.0)) throw InvalidInput("noise level must be non-negative");
}

std::pair<std::uint64_t, std::uint64_t> replicate_seeds(std::uint64_t seed, int replicate) {
  std::mt19937_64 rng = make_rng(seed, 1000003ULL + static_cast<std::uint64_t>(replicate));
  const std::uint64_t noise = rng();
  return {noise, rng()};
}

MonteCarloSummary summarize(const std::vector<ReplicateOutcome>& outcomes, const fe::CrackSpec& truth) {
  MonteCarloSummary s;
  s.replicates = static_cast<int>(outcomes.size());
  std::vector<int> errors;
  int exact_loc = 0;
  int exact = 0;
  for (const auto& o : outcomes) {
    if (!o.ok) {
      ++s.failures;
      continue;
    }
    errors.push_back(o.location_error);
    ++s.location_histogram[o.found.location_index];
    if (o.found.location_index == truth.location_index) ++exact_loc;
    if (o.found == truth) ++exact;
  }
  if (s.replicates > 0) {
    s.exact_location_probability = double(exact_loc) / s.replicates;
    s.exact_probability = double(exact) / s.replicates;
  }
  if (!errors.empty()) {
    std::sort(errors.begin(), errors.end());
    const std::size_t m = errors.size();
    s.median_location_error = m % 2 ? errors[m / 2] : 0.5 * (errors[m / 2 - 1] + errors[m / 2]);
    s.mean_location_error = std::accumulate(errors.begin(), errors.end(), 0.0) / double(m);
    s.max_location_error = errors.back();
  }
  return s;
}

MonteCarloResult monte_carlo(const Scenario& scenario, const GaConfig& ga, ForwardModel& model,
                             const td::TimeHistory& clean, int threads) {
  scenario.validate();
  ga.validate();
  if (threads < 1) throw InvalidInput("Monte Carlo needs at least one thread");
  (void)model.space().theta(scenario.crack);  // throws when the truth is off the grid

  MonteCarloResult out;
  out.scenario = scenario;
  out.outcomes.resize(scenario.replicates);
  auto run = [&](int r) {
    ReplicateOutcome& o = out.outcomes[r];
    o.replicate = r;
    std::tie(o.noise_seed, o.ga_seed) = replicate_seeds(scenario.seed, r);
    try {
      const Measurement m = measure(clean, model.order(), model.pairs(), scenario.noise_percent, o.noise_seed);
      GaConfig cfg = ga;
      cfg.seed = o.ga_seed;
      cfg.threshold = stopping_threshold(scenario.noise_percent);
      cfg.threads = 1;
      const IdentificationResult res = run_ga(model.space(), cfg, model, m);
      o.found = model.space().crack(res.best);
      o.objective = res.objective;
      o.generations = res.generations;
      o.location_error = std::abs(o.found.location_index - scenario.crack.location_index);
      o.ok = true;
    } catch (const Error& e) {
      o.error = e.what();
    }
  };
  if (threads == 1) {
    for (int r = 0; r < scenario.replicates; ++r) run(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min(threads, scenario.replicates); ++w)
      pool.emplace_back([&] {
        for (int r = next++; r < scenario.replicates; r = next++) run(r);
      });
    for (auto& th : pool) th.join();
  }
  out.summary = summarize(out.outcomes, scenario.crack);
  return out;
}

}  // namespace hotr::id
