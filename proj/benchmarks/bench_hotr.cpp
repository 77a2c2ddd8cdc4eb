#include <benchmark/benchmark.h>

#include <cstdlib>
#include <filesystem>

#include "hotr/hbm.hpp"
#include "hotr/rom.hpp"
#include "hotr/transmissibility.hpp"

using namespace hotr;

namespace {

const fe::BeamProblem& problem() {
  static const fe::BeamProblem p{fe::BeamConfig{}};
  return p;
}

const fe::CrackSpec kCrack{50, 15};
const double kOmega = hz_to_rad(128.0);

const rom::ReducedModel& rb() {
  static const rom::ReducedModel m = rom::build_rb_model(problem(), kCrack);
  return m;
}

const rom::SubstructureSplit& split() {
  static const auto s = rom::SubstructureSplit::top_band(problem().mesh(), 4);
  return s;
}

const rom::ReducedSubstructure& substructure() {
  static const rom::ReducedSubstructure b = [] {
    const char* env = std::getenv("HOTR_CACHE_DIR");
    const std::filesystem::path dir =
        env && *env ? std::filesystem::path(env) : std::filesystem::temp_directory_path() / "hotr-bench-cache";
    return rom::ReducedSubstructure::load_or_build(problem(), split(), 6, dir);
  }();
  return b;
}

void BM_AftThreePairs(benchmark::State& state) {
  hbm::AftConfig cfg;
  cfg.samples = static_cast<int>(state.range(0));
  const auto& pairs = rb().system.contact_pairs;
  CMat rel = CMat::Zero(static_cast<Eigen::Index>(pairs.size()), cfg.harmonics + 1);
  for (Eigen::Index r = 0; r < rel.rows(); ++r) {
    rel(r, 0) = 0.1 * double(r);
    rel(r, 1) = Complex(0.5, 0.2);
    rel(r, 2) = Complex(0.05, -0.1);
  }
  for (auto _ : state) benchmark::DoNotOptimize(hbm::aft_coefficients(rel, pairs, cfg));
}
BENCHMARK(BM_AftThreePairs)->Arg(256)->Arg(1024);

void BM_MhbRb(benchmark::State& state) {
  const FrequencyOperator op(rb().system);
  for (auto _ : state) benchmark::DoNotOptimize(hbm::solve_mhb(op, kOmega, hbm::AftConfig{}));
}
BENCHMARK(BM_MhbRb)->Unit(benchmark::kMillisecond);

void BM_SurrogateRb(benchmark::State& state) {
  const FrequencyOperator op(rb().system);
  const auto pairs = tr::ordered_pairs(rb().system.sensor_count());
  for (auto _ : state) benchmark::DoNotOptimize(tr::tr_surrogate(op, kOmega, 2, pairs));
}
BENCHMARK(BM_SurrogateRb)->Unit(benchmark::kMicrosecond);

void BM_BuildRb(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(rom::build_rb_model(problem(), kCrack));
}
BENCHMARK(BM_BuildRb)->Unit(benchmark::kMillisecond);

void BM_BuildSub(benchmark::State& state) {
  const auto& b = substructure();
  for (auto _ : state) benchmark::DoNotOptimize(rom::build_sub_model(problem(), split(), b, kCrack));
}
BENCHMARK(BM_BuildSub)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
