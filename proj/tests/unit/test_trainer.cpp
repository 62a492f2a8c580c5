#include <cmath>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "sfmnav/error.hpp"
#include "sfmnav/trainer.hpp"

using namespace sfmnav;

namespace {

ExperimentConfig tiny(const std::string& base = "SARL-DESK") {
  ExperimentConfig c = preset(base);
  c.network.embed_widths = {16, 8};
  c.network.pair_widths = {8, 4};
  c.network.attn_widths = {8, 1};
  c.network.value_widths = {16, 8, 1};
  c.train.il_episodes = 6;
  c.train.il_epochs = 3;
  c.train.rl_episodes = 6;
  c.train.target_update_interval = 2;
  c.train.validation_interval = 3;
  c.train.validation_episodes = 3;
  c.train.test_episodes = 4;
  return c;
}

NetworkParams zero_net(const NetworkArch& arch) {
  NetworkParams p = init_network(arch, 0);
  std::fill(p.weights.begin(), p.weights.end(), 0.0);
  return p;
}

}  // namespace

TEST(ReturnsToGo, DiscountedSums) {
  const std::vector<double> r{0.0, 1.0};
  EXPECT_EQ(returns_to_go(r, 0.9), (std::vector<double>{0.9, 1.0}));
  EXPECT_TRUE(returns_to_go(std::vector<double>{}, 0.9).empty());
  const std::vector<double> three{0.5, -0.25, 1.0};
  const std::vector<double> g = returns_to_go(three, 0.5);
  EXPECT_DOUBLE_EQ(g[0], 0.5 - 0.125 + 0.25);
}

TEST(StepDiscount, PlainOrTimeScaled) {
  ExperimentConfig c = preset("SARL");
  EXPECT_EQ(step_discount(c), 0.9);
  c.train.time_scaled_discount = true;
  EXPECT_NEAR(step_discount(c), std::pow(0.9, 0.25), 1e-15);
}

TEST(SampleEnv, FollowsMix) {
  const std::vector<EnvWeight> mix{{1, 0.7}, {2, 0.3}};
  int ones = 0;
  for (std::uint64_t s = 0; s < 5000; ++s) ones += sample_env(mix, derive_seed(9, s)) == 1;
  EXPECT_NEAR(ones / 5000.0, 0.7, 0.03);
  EXPECT_EQ(sample_env(std::vector<EnvWeight>{{4, 1.0}}, 3), 4);
}

TEST(SeedBlocks, Disjoint) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t block : {kImitationSeedBlock, kRlSeedBlock, kValidationSeedBlock, kTestSeedBlock}) {
    for (std::uint64_t i = 0; i < 1000; ++i) EXPECT_TRUE(seen.insert(episode_seed(0, block, i)).second);
  }
}

TEST(Replay, RingEvictsOldest) {
  ReplayBuffer buffer(3);
  for (int i = 0; i < 5; ++i) {
    Transition t;
    t.reward = i;
    buffer.push(std::move(t));
    EXPECT_LE(buffer.size(), 3u);
  }
  std::multiset<double> rewards;
  for (std::size_t i = 0; i < buffer.size(); ++i) rewards.insert(buffer[i].reward);
  EXPECT_EQ(rewards, (std::multiset<double>{2, 3, 4}));
  EXPECT_THROW(ReplayBuffer(0), Error);
}

TEST(Replay, SamplesWithoutReplacement) {
  ReplayBuffer buffer(200);
  for (int i = 0; i < 150; ++i) buffer.push(Transition{});
  Rng rng(1);
  std::vector<int> hits(150, 0);
  for (int k = 0; k < 200; ++k) {
    const auto idx = buffer.sample_indices(100, rng);
    EXPECT_EQ(idx.size(), 100u);
    EXPECT_EQ(std::set<std::size_t>(idx.begin(), idx.end()).size(), 100u);
    for (auto i : idx) ++hits[i];
  }
  // Each index is drawn with probability 2/3.
  for (int h : hits) EXPECT_NEAR(h / 200.0, 2.0 / 3.0, 0.15);
  EXPECT_EQ(buffer.sample_indices(1000, rng).size(), 150u);
}

TEST(Greedy, DenseRewardPicksFullSpeedToGoal) {
  ExperimentConfig c = preset("SARL-SFM2");
  const NetworkParams p = zero_net(c.network);
  const LookaheadContext ctx = lookahead_context(p, c);
  const World w = empty_world(c.scenario);
  // Oracle: enumerate immediate rewards of every action.
  std::size_t best = 0;
  double best_r = -INFINITY;
  for (std::size_t i = 0; i < ctx.actions.size(); ++i) {
    const World next = propagate_linear(w, ctx.actions[i]);
    const double r = compute_reward(reward_input(w, ctx.actions[i], next, detect_events(w, next)), c.reward);
    if (r > best_r) {
      best_r = r;
      best = i;
    }
  }
  EXPECT_EQ(greedy_action_index(ctx, w), best);
  EXPECT_EQ(best, 25u);
}

TEST(Greedy, SparseRewardTiesGoToFirstAction) {
  ExperimentConfig c = preset("SARL");
  const NetworkParams p = zero_net(c.network);
  EXPECT_EQ(greedy_action_index(lookahead_context(p, c), empty_world(c.scenario)), 0u);
}

TEST(Greedy, AvoidsCollidingActions) {
  ExperimentConfig c = preset("SARL");
  const NetworkParams p = zero_net(c.network);
  const LookaheadContext ctx = lookahead_context(p, c);
  World w = empty_world(c.scenario);
  add_square_obstacle(w, {0, -3.3}, 0.6);  // directly ahead, 0.1 m clearance
  const Vec2 a = greedy_action(ctx, w);
  const World next = propagate_linear(w, a);
  EXPECT_GE(detect_events(w, next).min_separation, 0.0);
}

TEST(ValuePolicyTest, FullExplorationIsUniform) {
  ExperimentConfig c = preset("SARL");
  const NetworkParams p = zero_net(c.network);
  ValuePolicy policy(lookahead_context(p, c), 1.0);
  policy.reset(5);
  const World w = empty_world(c.scenario);
  const std::vector<Vec2> actions = c.action_space().actions();
  std::map<std::pair<double, double>, int> counts;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const Vec2 a = policy.act(w);
    ++counts[{a.x, a.y}];
  }
  ASSERT_EQ(counts.size(), actions.size());
  const double expected = static_cast<double>(n) / actions.size();
  double chi2 = 0;
  for (const auto& [k, v] : counts) chi2 += (v - expected) * (v - expected) / expected;
  // 80 degrees of freedom; the 0.999 quantile is about 124.8.
  EXPECT_LT(chi2, 124.8);
}

TEST(Imitation, TerminalTargetIsGoalReward) {
  ExperimentConfig c = tiny();
  c.train.il_episodes = 1;
  c.scenario.environments[1].random_elements = 0;
  const std::vector<ValueSample> data = collect_imitation(c, 0);
  ASSERT_FALSE(data.empty());
  EXPECT_EQ(data.back().value, 1.0);
  EXPECT_NEAR(data.front().value, std::pow(0.9, static_cast<double>(data.size() - 1)), 1e-12);
}

TEST(Imitation, DatasetCoversEveryEpisode) {
  const ExperimentConfig c = tiny();
  const std::vector<ValueSample> data = collect_imitation(c, 1);
  EXPECT_GE(data.size(), static_cast<std::size_t>(c.train.il_episodes));
  for (const ValueSample& s : data) EXPECT_EQ(s.state.cols(), 13);
}

TEST(Imitation, FitsConstantTarget) {
  ExperimentConfig c = tiny();
  c.train.il_epochs = 200;
  const World w = generate_scenario(1, 2, c.scenario);
  std::vector<ValueSample> data(100, ValueSample{encode_flat(w, false), 0.5});
  const ImitationResult r = train_imitation(data, c, 3);
  EXPECT_NEAR(forward(r.params, data[0].state), 0.5, 1e-3);
  EXPECT_LT(r.epoch_losses.back(), r.epoch_losses.front());
  EXPECT_THROW(train_imitation(std::vector<ValueSample>{}, c, 3), Error);
}

TEST(Imitation, Deterministic) {
  const ExperimentConfig c = tiny();
  const std::vector<ValueSample> data = collect_imitation(c, 4);
  EXPECT_EQ(train_imitation(data, c, 4).params, train_imitation(data, c, 4).params);
}

TEST(Training, EndToEndDeterministic) {
  const ExperimentConfig c = tiny();
  TrainingLog log_a, log_b;
  const TrainingResult a = run_training(c, 11, log_a);
  const TrainingResult b = run_training(c, 11, log_b);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(log_a.lines(), log_b.lines());
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(a.test.episode_count, 4);
  // il epochs + rl episodes + validations + test
  EXPECT_EQ(log_a.lines().size(), 3u + 6 + 2 + 1);
  EXPECT_EQ(a.validations.size(), 2u);
  EXPECT_EQ(a.validations[1].first, 6);
  EXPECT_NE(a.params.weights, a.imitation_params.weights);
}

TEST(Training, ForceAugmentedRuns) {
  ExperimentConfig c = tiny();
  c.force_augmented = true;
  c.network.row_width = 17;
  c.network.self_dim = 8;
  c.reward.variant = RewardVariant::Sfm;
  c.train.validation_episodes = 0;
  TrainingLog log;
  const TrainingResult r = run_training(c, 2, log);
  EXPECT_EQ(r.params.arch.row_width, 17);
}

TEST(Evaluate, DeterministicOnFixedSeeds) {
  const ExperimentConfig c = tiny();
  const NetworkParams p = init_network(c.network, 1);
  EXPECT_EQ(evaluate(p, c, 5, 3), evaluate(p, c, 5, 3));
}
