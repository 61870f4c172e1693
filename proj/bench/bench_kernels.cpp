#include <benchmark/benchmark.h>

#include <vector>

#include "socialplan/mpc_kernels.hpp"
#include "socialplan/rng.hpp"
#include "socialplan/scene.hpp"

using namespace socialplan;

namespace {

struct Fixture {
  Scene scene = default_scene();
  MpcConfig cfg;
  RobotState q0{{4.0, 4.0}, 0.7};
  std::vector<Point2> window;
  std::vector<ControlInput> candidates;
  std::vector<double> costs;

  explicit Fixture(std::size_t count) {
    for (int j = 0; j <= cfg.horizon; ++j) window.push_back({4.0 + 1.4 * j, 4.0 + 1.4 * j});
    Rng rng(7);
    candidates.reserve(count * static_cast<std::size_t>(cfg.horizon));
    for (std::size_t i = 0; i < count * static_cast<std::size_t>(cfg.horizon); ++i) {
      candidates.push_back({uniform(rng, cfg.bounds.v_min, cfg.bounds.v_max), uniform(rng, -3.1, 3.1)});
    }
    costs.resize(count);
  }
};

void BM_ScoreSerial(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    kernels::score_candidates_serial(f.q0, f.candidates, f.window, f.cfg, f.scene.workspace, f.costs);
    benchmark::DoNotOptimize(f.costs.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ScoreParallel(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    kernels::score_candidates_parallel(f.q0, f.candidates, f.window, f.cfg, f.scene.workspace, f.costs);
    benchmark::DoNotOptimize(f.costs.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_ScoreSerial)->Arg(256)->Arg(1024)->Arg(4096);
BENCHMARK(BM_ScoreParallel)->Arg(256)->Arg(1024)->Arg(4096);

BENCHMARK_MAIN();
