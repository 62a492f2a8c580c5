#include <benchmark/benchmark.h>

#include "sfmnav/experiment.hpp"
#include "sfmnav/orca.hpp"
#include "sfmnav/trainer.hpp"
#include "sfmnav/world.hpp"

using namespace sfmnav;

namespace {

const ExperimentConfig& sarl_config() {
  static const ExperimentConfig config = preset("SARL");
  return config;
}

void BM_OrcaVelocity(benchmark::State& state) {
  const World world = generate_scenario(2, 7, sarl_config().scenario);
  OrcaPolicy policy;
  for (auto _ : state) benchmark::DoNotOptimize(policy.act(world));
}
BENCHMARK(BM_OrcaVelocity);

void BM_WorldStep(benchmark::State& state) {
  const World world = generate_scenario(1, 7, sarl_config().scenario);
  for (auto _ : state) benchmark::DoNotOptimize(step(world, Vec2{0.0, 1.0}));
}
BENCHMARK(BM_WorldStep);

void BM_EncodeFlat(benchmark::State& state) {
  const World world = generate_scenario(1, 7, sarl_config().scenario);
  for (auto _ : state) benchmark::DoNotOptimize(encode_flat(world, true));
}
BENCHMARK(BM_EncodeFlat);

void BM_ForwardBatch(benchmark::State& state) {
  const ExperimentConfig& config = sarl_config();
  const NetworkParams params = init_network(config.network, 1);
  const World world = generate_scenario(1, 7, config.scenario);
  std::vector<StateMatrix> states(static_cast<std::size_t>(state.range(0)), encode_flat(world, false));
  std::vector<const StateMatrix*> pointers;
  for (const auto& s : states) pointers.push_back(&s);
  for (auto _ : state) benchmark::DoNotOptimize(forward_batch(params, pointers));
}
BENCHMARK(BM_ForwardBatch)->Arg(1)->Arg(81)->Arg(100);

void BM_BatchGradient(benchmark::State& state) {
  const ExperimentConfig& config = sarl_config();
  const NetworkParams params = init_network(config.network, 1);
  const World world = generate_scenario(1, 7, config.scenario);
  std::vector<StateMatrix> states(100, encode_flat(world, false));
  std::vector<const StateMatrix*> pointers;
  for (const auto& s : states) pointers.push_back(&s);
  const std::vector<double> targets(100, 0.5);
  Gradients g;
  for (auto _ : state) benchmark::DoNotOptimize(batch_gradient(params, pointers, targets, g));
}
BENCHMARK(BM_BatchGradient);

void BM_GreedyAction(benchmark::State& state) {
  const ExperimentConfig& config = sarl_config();
  const NetworkParams params = init_network(config.network, 1);
  const LookaheadContext context = lookahead_context(params, config);
  const World world = generate_scenario(1, 7, config.scenario);
  for (auto _ : state) benchmark::DoNotOptimize(greedy_action_index(context, world));
}
BENCHMARK(BM_GreedyAction);

}  // namespace

BENCHMARK_MAIN();
