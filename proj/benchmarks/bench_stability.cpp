#include "sa_lab/experiments.hpp"
#include "sa_lab/stability.hpp"

#include <benchmark/benchmark.h>

namespace {

void BM_BairdDeltaPi(benchmark::State& state) {
  const auto model = salab::build_baird({});
  for (auto _ : state) benchmark::DoNotOptimize(salab::delta_pi(model.features, model.mdp, model.behavior).value);
}
BENCHMARK(BM_BairdDeltaPi);

void BM_BairdKappa(benchmark::State& state) {
  const auto model = salab::build_baird({});
  const auto restarts = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(salab::kappa_estimate(model.features, model.mdp, model.behavior, 0.7, restarts));
  }
}
BENCHMARK(BM_BairdKappa)->Arg(8)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
