#include "sa_lab/experiments.hpp"
#include "sa_lab/rl.hpp"
#include "sa_lab/sa.hpp"

#include <benchmark/benchmark.h>

namespace {

// Steps of Q-learning on the zero-reward Baird model.
void BM_BairdSteps(benchmark::State& state) {
  const auto model = salab::build_baird({});
  const auto problem = salab::to_sa_problem(salab::QProblem::build(model.mdp, model.behavior, model.features));
  salab::RunConfig config;
  config.theta0 = salab::Vector::Ones(14);
  config.n_steps = static_cast<std::size_t>(state.range(0));
  const auto schedule = salab::StepSchedule::constant(0.01);
  for (auto _ : state) {
    auto r = salab::run_sa(problem, schedule, config);
    benchmark::DoNotOptimize(r.final_theta.data());
    ++config.seed;
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BairdSteps)->Arg(20'000);

void BM_QMeanUpdate(benchmark::State& state) {
  const auto model = salab::build_baird({salab::RewardMode::UniformRandom, 7, 0.7, false});
  const auto qp = salab::QProblem::build(model.mdp, model.behavior, model.features);
  const salab::Vector theta = salab::Vector::LinSpaced(14, -1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(salab::q_mean_update(qp, theta));
}
BENCHMARK(BM_QMeanUpdate);

}  // namespace

BENCHMARK_MAIN();
