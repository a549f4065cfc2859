#include <benchmark/benchmark.h>

#include <vector>

#include "spga/experiment.hpp"
#include "spga/gradient_loss.hpp"
#include "spga/rng.hpp"
#include "spga/sample_gen.hpp"
#include "spga/student_t.hpp"

namespace {

void BM_TCritical(benchmark::State& state) {
  const int df = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(spga::t_two_sided_critical({0.05, df}));
  }
}
BENCHMARK(BM_TCritical)->Arg(1)->Arg(31)->Arg(1000);

void BM_GradientDensity(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  spga::Rng rng(7);
  std::vector<double> grads(n);
  for (auto& g : grads) g = rng.uniform(-1.0, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(spga::gradient_density(grads, 0.1));
  }
  state.SetComplexityN(static_cast<benchmark::IterationCount>(n));
}
BENCHMARK(BM_GradientDensity)->Range(64, 16384)->Complexity();

void BM_AugmentFullScale(benchmark::State& state) {
  spga::Rng rng(3);
  spga::Matrix features(32, 4608);
  for (std::size_t i = 0; i < features.rows(); ++i) {
    for (std::size_t j = 0; j < features.cols(); ++j) {
      features(i, j) = rng.normal();
    }
  }
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(spga::augment(features, 0.05, 64, ++seed));
  }
}
BENCHMARK(BM_AugmentFullScale);

void BM_TrackerRun(benchmark::State& state) {
  spga::WorldConfig world;
  world.dim = 16;
  world.candidates = 256;
  world.frames = 20;
  world.drift = 0.04;
  spga::TrackerConfig tracker;
  tracker.loss_mode = spga::LossMode::kGradientSensitive;
  tracker.augment = spga::AugmentSettings{};
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(spga::run_seeded(world, tracker, ++seed));
  }
}
BENCHMARK(BM_TrackerRun)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
