#include "sfmnav/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "sfmnav/error.hpp"

namespace sfmnav {

using json = nlohmann::ordered_json;

namespace {

// Streams derived from one seed for unrelated purposes.
constexpr std::uint64_t kEnvStream = 1;
constexpr std::uint64_t kExplorationStream = 2;
constexpr std::uint64_t kInitStream = 3;
constexpr std::uint64_t kShuffleStream = 4;
constexpr std::uint64_t kReplayStream = 5;

json report_fields(json j, const MetricsReport& report) {
  j["success_rate"] = report.success_rate;
  j["collision_rate"] = report.collision_rate;
  j["nav_time"] = report.avg_nav_time ? json(*report.avg_nav_time) : json(nullptr);
  j["total_reward"] = report.total_reward;
  j["episodes"] = report.episode_count;
  return j;
}

SgdConfig sgd_config(const TrainConfig& train, double learning_rate) {
  SgdConfig sgd;
  sgd.learning_rate = learning_rate;
  sgd.momentum = train.momentum;
  sgd.batch_size = train.batch_size;
  return sgd;
}

}  // namespace

std::uint64_t episode_seed(std::uint64_t master, std::uint64_t block, std::uint64_t index) {
  return derive_seed(master, block + index);
}

int sample_env(std::span<const EnvWeight> mix, std::uint64_t seed) {
  if (mix.empty()) throw Error("empty environment mix");
  Rng rng(derive_seed(seed, kEnvStream));
  const double u = uniform(rng, 0.0, 1.0);
  double acc = 0.0;
  for (const EnvWeight& w : mix) {
    acc += w.probability;
    if (u < acc) return w.env_id;
  }
  return mix.back().env_id;
}

double step_discount(const ExperimentConfig& config) {
  const TrainConfig& t = config.train;
  if (!t.time_scaled_discount) return t.gamma;
  return std::pow(t.gamma, config.scenario.time_step * config.scenario.robot_v_pref);
}

std::vector<double> returns_to_go(std::span<const double> rewards, double gamma) {
  std::vector<double> out(rewards.size());
  double acc = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    acc = rewards[i] + gamma * acc;
    out[i] = acc;
  }
  return out;
}

// ---- replay ----------------------------------------------------------------

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw Error("replay capacity must be positive");
}

void ReplayBuffer::push(Transition transition) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(transition));
  } else {
    items_[next_] = std::move(transition);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n, Rng& rng) const {
  const std::size_t total = items_.size();
  n = std::min(n, total);
  // Floyd's algorithm; the result is sorted so the batch order does not
  // depend on hash-set iteration order.
  std::unordered_set<std::size_t> chosen;
  std::vector<std::size_t> out;
  out.reserve(n);
  for (std::size_t j = total - n; j < total; ++j) {
    const std::size_t t = std::uniform_int_distribution<std::size_t>(0, j)(rng);
    const std::size_t pick = chosen.insert(t).second ? t : j;
    if (pick == j) chosen.insert(j);
    out.push_back(pick);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---- log -------------------------------------------------------------------

void TrainingLog::append(std::string line) {
  if (sink) sink(line);
  lines_.push_back(std::move(line));
}

void TrainingLog::log_il_epoch(int epoch, double loss, int samples, bool loss_increased) {
  json j;
  j["type"] = "il_epoch";
  j["epoch"] = epoch;
  j["loss"] = loss;
  j["samples"] = samples;
  j["loss_increased"] = loss_increased;
  append(j.dump());
}

void TrainingLog::log_episode(int episode, int env_id, double epsilon, Outcome outcome, double reward, int steps,
                              std::optional<double> loss) {
  json j;
  j["type"] = "episode";
  j["episode"] = episode;
  j["env_id"] = env_id;
  j["epsilon"] = epsilon;
  j["outcome"] = to_string(outcome);
  j["reward"] = reward;
  j["steps"] = steps;
  j["loss"] = loss ? json(*loss) : json(nullptr);
  append(j.dump());
}

void TrainingLog::log_validation(int episode, const MetricsReport& report) {
  json j;
  j["type"] = "validation";
  j["episode"] = episode;
  append(report_fields(std::move(j), report).dump());
}

void TrainingLog::log_test(const MetricsReport& report) {
  json j;
  j["type"] = "test";
  append(report_fields(std::move(j), report).dump());
}

void TrainingLog::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  for (const std::string& line : lines_) out << line << '\n';
}

// ---- policies --------------------------------------------------------------

LookaheadContext lookahead_context(const NetworkParams& params, const ExperimentConfig& config) {
  LookaheadContext c;
  c.params = &params;
  c.actions = config.action_space().actions();
  c.reward = config.reward;
  c.gamma_hat = step_discount(config);
  c.force_augmented = config.force_augmented;
  c.state_forces = config.state_forces;
  return c;
}

std::size_t greedy_action_index(const LookaheadContext& context, const World& world) {
  if (context.params == nullptr || context.actions.empty()) throw Error("greedy_action: empty context");
  const std::size_t n = context.actions.size();
  std::vector<StateMatrix> states(n);
  std::vector<const StateMatrix*> pointers(n);
  std::vector<double> rewards(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = context.actions[i];
    const World next = propagate_linear(world, a);
    const StepEvent event = detect_events(world, next);
    rewards[i] = compute_reward(reward_input(world, a, next, event), context.reward);
    states[i] = encode_flat(next, context.force_augmented, context.state_forces);
    pointers[i] = &states[i];
  }
  const std::vector<double> values = forward_batch(*context.params, pointers);
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double score = rewards[i] + context.gamma_hat * values[i];
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return best;
}

Vec2 greedy_action(const LookaheadContext& context, const World& world) {
  return context.actions[greedy_action_index(context, world)];
}

ValuePolicy::ValuePolicy(LookaheadContext context, double epsilon)
    : context_(std::move(context)), epsilon_(epsilon) {}

void ValuePolicy::reset(std::uint64_t seed) { rng_.seed(derive_seed(seed, kExplorationStream)); }

Vec2 ValuePolicy::act(const World& world) {
  if (epsilon_ > 0.0 && uniform(rng_, 0.0, 1.0) < epsilon_) {
    const std::size_t i = std::uniform_int_distribution<std::size_t>(0, context_.actions.size() - 1)(rng_);
    return context_.actions[i];
  }
  return greedy_action(context_, world);
}

RandomPolicy::RandomPolicy(std::vector<Vec2> actions) : actions_(std::move(actions)) {
  if (actions_.empty()) throw Error("random policy needs at least one action");
}

void RandomPolicy::reset(std::uint64_t seed) { rng_.seed(derive_seed(seed, kExplorationStream)); }

Vec2 RandomPolicy::act(const World& /*world*/) {
  return actions_[std::uniform_int_distribution<std::size_t>(0, actions_.size() - 1)(rng_)];
}

// ---- imitation -------------------------------------------------------------

std::vector<ValueSample> collect_imitation(const ExperimentConfig& config, std::uint64_t master_seed) {
  const double gamma_hat = step_discount(config);
  std::vector<ValueSample> dataset;
  OrcaPolicy expert;
  EpisodeOptions options;
  options.gamma = config.train.gamma;
  options.record_trajectory = false;

  std::vector<StateMatrix> states;
  std::vector<double> rewards;
  options.observer = [&](const World& before, const Vec2&, const World&, const StepEvent&, double reward) {
    states.push_back(encode_flat(before, config.force_augmented, config.state_forces));
    rewards.push_back(reward);
  };

  for (int i = 0; i < config.train.il_episodes; ++i) {
    states.clear();
    rewards.clear();
    const std::uint64_t seed = episode_seed(master_seed, kImitationSeedBlock, static_cast<std::uint64_t>(i));
    run_episode(expert, config.scenario, config.train.il_env, seed, config.reward, options);
    const std::vector<double> targets = returns_to_go(rewards, gamma_hat);
    for (std::size_t k = 0; k < states.size(); ++k) dataset.push_back({std::move(states[k]), targets[k]});
  }
  return dataset;
}

ImitationResult train_imitation(std::span<const ValueSample> dataset, const ExperimentConfig& config,
                                std::uint64_t master_seed, TrainingLog* log) {
  if (dataset.empty()) throw Error("imitation dataset is empty");
  const TrainConfig& t = config.train;
  ImitationResult result;
  result.params = init_network(config.network, derive_seed(master_seed, kInitStream));
  const SgdConfig sgd = sgd_config(t, t.il_learning_rate);
  Rng rng(derive_seed(master_seed, kShuffleStream));

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<const StateMatrix*> batch_states;
  std::vector<double> batch_targets;
  Gradients gradient;
  const auto batch = static_cast<std::size_t>(t.batch_size);

  for (int epoch = 0; epoch < t.il_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double weighted_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      batch_states.clear();
      batch_targets.clear();
      for (std::size_t k = start; k < end; ++k) {
        batch_states.push_back(&dataset[order[k]].state);
        batch_targets.push_back(dataset[order[k]].value);
      }
      weighted_loss += batch_gradient(result.params, batch_states, batch_targets, gradient) *
                       static_cast<double>(end - start);
      sgd_step(result.params, gradient, sgd);
    }
    const double loss = weighted_loss / static_cast<double>(order.size());
    const bool increased = epoch >= 10 && loss > result.epoch_losses[static_cast<std::size_t>(epoch - 10)];
    result.epoch_losses.push_back(loss);
    if (log) log->log_il_epoch(epoch + 1, loss, static_cast<int>(order.size()), increased);
  }
  return result;
}

// ---- evaluation ------------------------------------------------------------

std::vector<EpisodeRecord> run_test_episodes(Policy& policy, const ExperimentConfig& config,
                                             std::uint64_t seed_base, int episodes, std::uint64_t block) {
  std::vector<EpisodeRecord> records;
  records.reserve(static_cast<std::size_t>(std::max(episodes, 0)));
  EpisodeOptions options;
  options.gamma = config.train.gamma;
  options.record_trajectory = false;
  for (int i = 0; i < episodes; ++i) {
    const std::uint64_t seed = episode_seed(seed_base, block, static_cast<std::uint64_t>(i));
    const int env = sample_env(config.train.eval_env_mix, seed);
    records.push_back(run_episode(policy, config.scenario, env, seed, config.reward, options));
  }
  return records;
}

MetricsReport evaluate(const NetworkParams& params, const ExperimentConfig& config, std::uint64_t seed_base,
                       int episodes) {
  ValuePolicy policy(lookahead_context(params, config));
  const std::vector<EpisodeRecord> records = run_test_episodes(policy, config, seed_base, episodes);
  return aggregate(records);
}

// ---- reinforcement learning ------------------------------------------------

RlResult train_rl(const NetworkParams& initial, const ExperimentConfig& config, std::uint64_t master_seed,
                  TrainingLog* log) {
  const TrainConfig& t = config.train;
  const double gamma_hat = step_discount(config);
  const SgdConfig sgd = sgd_config(t, t.rl_learning_rate);

  RlResult result;
  result.params = initial;
  std::fill(result.params.momentum.begin(), result.params.momentum.end(), 0.0);
  NetworkParams target = result.params;

  ReplayBuffer replay(static_cast<std::size_t>(t.replay_capacity));
  Rng replay_rng(derive_seed(master_seed, kReplayStream));

  EpisodeOptions options;
  options.gamma = t.gamma;
  options.record_trajectory = false;
  std::vector<Transition> pending;
  options.observer = [&](const World& before, const Vec2&, const World& after, const StepEvent& event,
                         double reward) {
    Transition tr;
    tr.state = encode_flat(before, config.force_augmented, config.state_forces);
    tr.reward = reward;
    if (event.outcome == Outcome::Running) {
      tr.next_state = encode_flat(after, config.force_augmented, config.state_forces);
    }
    pending.push_back(std::move(tr));
  };

  std::vector<const StateMatrix*> batch_states;
  std::vector<const StateMatrix*> next_states;
  std::vector<double> targets;
  Gradients gradient;

  for (int episode = 0; episode < t.rl_episodes; ++episode) {
    const double epsilon = t.epsilon(episode);
    const std::uint64_t seed = episode_seed(master_seed, kRlSeedBlock, static_cast<std::uint64_t>(episode));
    const int env = sample_env(t.env_mix, seed);

    ValuePolicy policy(lookahead_context(result.params, config), epsilon);
    pending.clear();
    const EpisodeRecord record = run_episode(policy, config.scenario, env, seed, config.reward, options);
    const int visited = static_cast<int>(pending.size());
    for (Transition& tr : pending) replay.push(std::move(tr));

    double loss_sum = 0.0;
    const int updates = visited * t.updates_per_state;
    for (int u = 0; u < updates; ++u) {
      const std::vector<std::size_t> picks = replay.sample_indices(static_cast<std::size_t>(t.batch_size), replay_rng);
      batch_states.clear();
      next_states.clear();
      for (std::size_t idx : picks) {
        batch_states.push_back(&replay[idx].state);
        if (replay[idx].next_state) next_states.push_back(&*replay[idx].next_state);
      }
      const std::vector<double> next_values = forward_batch(target, next_states);
      targets.clear();
      std::size_t k = 0;
      for (std::size_t idx : picks) {
        const Transition& tr = replay[idx];
        targets.push_back(tr.next_state ? tr.reward + gamma_hat * next_values[k++] : tr.reward);
      }
      loss_sum += batch_gradient(result.params, batch_states, targets, gradient);
      sgd_step(result.params, gradient, sgd);
    }

    if (log) {
      log->log_episode(episode + 1, env, epsilon, record.outcome, record.cumulative_reward, record.steps,
                       updates > 0 ? std::optional<double>(loss_sum / updates) : std::nullopt);
    }
    if ((episode + 1) % t.target_update_interval == 0) target = result.params;
    if ((episode + 1) % t.validation_interval == 0 && t.validation_episodes > 0) {
      ValuePolicy greedy(lookahead_context(result.params, config));
      const std::vector<EpisodeRecord> records =
          run_test_episodes(greedy, config, master_seed, t.validation_episodes, kValidationSeedBlock);
      const MetricsReport report = aggregate(records);
      result.validations.emplace_back(episode + 1, report);
      if (log) log->log_validation(episode + 1, report);
    }
  }
  return result;
}

TrainingResult run_training(const ExperimentConfig& config, std::uint64_t master_seed, TrainingLog& log) {
  config.validate();
  TrainingResult result;
  const std::vector<ValueSample> dataset = collect_imitation(config, master_seed);
  result.imitation_params = train_imitation(dataset, config, master_seed, &log).params;
  RlResult rl = train_rl(result.imitation_params, config, master_seed, &log);
  result.params = std::move(rl.params);
  result.validations = std::move(rl.validations);
  if (config.train.test_episodes > 0) {
    result.test = evaluate(result.params, config, master_seed, config.train.test_episodes);
    log.log_test(result.test);
  }
  return result;
}

}  // namespace sfmnav
