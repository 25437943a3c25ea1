#include <benchmark/benchmark.h>

#include <random>

#include "isip4d/detector.hpp"
#include "isip4d/scalespace.hpp"
#include "isip4d/synth.hpp"

using namespace isip4d;

namespace {

Field4 noise_field(int n, int nt) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Field4 f({n, n, n, nt});
  for (double& v : f.data()) v = u(rng);
  return f;
}

VolumeSequence oscillating_sphere(int n, int frames) {
  Scene scene;
  scene.primitives.push_back({Sphere{0.0625}, {}});
  scene.motion.trajectories.push_back(Trajectory{{{0, Pose{{-0.125, 0, 0}, {}}},
                                                  {frames / 3, Pose{{0.125, 0, 0}, {}}},
                                                  {2 * frames / 3, Pose{{-0.125, 0, 0}, {}}}}});
  GridSpec g = centered_grid(n, 1.0 / n);
  return generate_sequence(scene, g, frames).sequence;
}

}  // namespace

static void BM_Smooth4d(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Field4 f = noise_field(n, 10);
  const SmoothingParams p;
  for (auto _ : state) benchmark::DoNotOptimize(smooth_4d(f, p));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.data().size()));
}
BENCHMARK(BM_Smooth4d)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_HarrisResponse(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<SymMat4> ms(4096);
  for (auto& m : ms)
    for (double& c : m.c) c = u(rng);
  for (auto _ : state)
    for (const auto& m : ms) benchmark::DoNotOptimize(harris_response_4d(m, 0.0005));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ms.size()));
}
BENCHMARK(BM_HarrisResponse);

static void BM_Detect(benchmark::State& state) {
  const VolumeSequence seq = oscillating_sphere(static_cast<int>(state.range(0)), 12);
  const DetectorParams p;
  for (auto _ : state) benchmark::DoNotOptimize(detect(seq, p));
}
BENCHMARK(BM_Detect)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
