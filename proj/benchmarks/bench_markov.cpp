#include "sa_lab/markov.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

salab::FiniteMarkovChain random_chain(std::size_t n) {
  std::mt19937_64 gen(n);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  salab::Matrix p(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.cols(); ++j) p(i, j) = u(gen);
    p.row(i) /= p.row(i).sum();
  }
  return salab::FiniteMarkovChain(p);
}

void BM_Stationary(benchmark::State& state) {
  const auto chain = random_chain(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(salab::stationary_distribution(chain));
}
BENCHMARK(BM_Stationary)->Arg(8)->Arg(64)->Arg(256);

void BM_MixingTime(benchmark::State& state) {
  const auto chain = random_chain(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    salab::MixingProfile profile(chain);
    benchmark::DoNotOptimize(profile.mixing_time(1e-6));
  }
}
BENCHMARK(BM_MixingTime)->Arg(8)->Arg(64);

void BM_SampleTrajectory(benchmark::State& state) {
  const auto chain = random_chain(16);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(salab::sample_trajectory(chain, 0, 10'000, seed++));
  state.SetItemsProcessed(state.iterations() * 10'000);
}
BENCHMARK(BM_SampleTrajectory);

}  // namespace

BENCHMARK_MAIN();
