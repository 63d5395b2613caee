#include <random>

#include <benchmark/benchmark.h>

#include "backheat/diagnostics.hpp"
#include "backheat/inversion.hpp"
#include "backheat/random.hpp"
#include "backheat/spectral.hpp"

using namespace backheat;

namespace {

Grid make_grid(bool disk, int n) {
  return disk ? Grid(PolarGrid::build(n, n)) : Grid(Grid1D::build(1.0, n));
}

// range(0): 0 interval, 1 disk; range(1): nx or nr = ntheta
void BM_StepperFactorization(benchmark::State& state) {
  const Grid g = make_grid(state.range(0) == 1, static_cast<int>(state.range(1)));
  const Generator gen = assemble(g);
  for (auto _ : state) {
    TimeStepper st(gen, 0.01, 100);
    benchmark::DoNotOptimize(st.dt());
  }
}
BENCHMARK(BM_StepperFactorization)->Args({0, 25})->Args({0, 100})->Args({1, 12})->Args({1, 25});

void BM_ForwardSolve(benchmark::State& state) {
  const Grid g = make_grid(state.range(0) == 1, static_cast<int>(state.range(1)));
  const TimeStepper st(assemble(g), 0.01, 100);
  std::mt19937_64 rng(1);
  const StateField u = random_field(g, rng);
  for (auto _ : state) benchmark::DoNotOptimize(solve_forward(st, u));
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_ForwardSolve)->Args({0, 25})->Args({0, 100})->Args({1, 12})->Args({1, 25});

void BM_Gradient(benchmark::State& state) {
  const Grid g = make_grid(state.range(0) == 1, static_cast<int>(state.range(1)));
  const TimeStepper st(assemble(g), 0.01, 100);
  std::mt19937_64 rng(2);
  const StateField u = random_field(g, rng);
  const StateField y = random_field(g, rng);
  for (auto _ : state) benchmark::DoNotOptimize(gradient(u, y, 1e-8, st));
}
BENCHMARK(BM_Gradient)->Args({0, 25})->Args({1, 25});

void BM_Eigensystem(benchmark::State& state) {
  const Grid g = make_grid(state.range(0) == 1, static_cast<int>(state.range(1)));
  const Generator gen = assemble(g);
  for (auto _ : state) benchmark::DoNotOptimize(eigensystem(gen));
}
BENCHMARK(BM_Eigensystem)->Args({0, 25})->Args({0, 100})->Args({1, 12});

void BM_Reconstruction(benchmark::State& state) {
  ProblemConfig cfg;
  cfg.geometry = state.range(0) == 1 ? Geometry::kDisk : Geometry::kInterval;
  cfg.final_time = state.range(0) == 1 ? 0.01 : 0.03;
  cfg.threshold = 1e-300;
  cfg.max_iter = static_cast<int>(state.range(1));
  cfg.noise_level = 0.01;
  cfg.exact = {"bump", [](const NodePosition& p) { return std::sin(3.0 * (p.x + p.r)); }};
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(cfg));
}
BENCHMARK(BM_Reconstruction)->Args({0, 20})->Args({1, 5})->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
