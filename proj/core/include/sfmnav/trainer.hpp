#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sfmnav/episode.hpp"
#include "sfmnav/experiment.hpp"
#include "sfmnav/metrics.hpp"
#include "sfmnav/rng.hpp"
#include "sfmnav/value_net.hpp"

namespace sfmnav {

/// Seed blocks. Episode i of a phase uses derive_seed(master, block + i), so
/// training, validation and test scenes never share a seed.
inline constexpr std::uint64_t kImitationSeedBlock = 0;
inline constexpr std::uint64_t kRlSeedBlock = 10'000'000;
inline constexpr std::uint64_t kValidationSeedBlock = 20'000'000;
inline constexpr std::uint64_t kTestSeedBlock = 30'000'000;

std::uint64_t episode_seed(std::uint64_t master, std::uint64_t block, std::uint64_t index);

/// Environment drawn from `mix` using a stream derived from `seed`.
int sample_env(std::span<const EnvWeight> mix, std::uint64_t seed);

/// Per-step discount used by TD targets, returns-to-go and lookahead.
double step_discount(const ExperimentConfig& config);

/// G_t = sum_{k >= t} gamma^{k - t} r_k.
std::vector<double> returns_to_go(std::span<const double> rewards, double gamma);

struct ValueSample {
  StateMatrix state;
  double value = 0.0;
};

struct Transition {
  StateMatrix state;
  double reward = 0.0;
  std::optional<StateMatrix> next_state;  // empty for terminal transitions
};

/// Fixed-capacity ring; the oldest transition is overwritten first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition transition);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& operator[](std::size_t i) const { return items_[i]; }

  /// min(n, size()) distinct indices, uniformly without replacement.
  std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> items_;
};

/// Append-only JSONL training log. Record types: il_epoch, episode,
/// validation and test; field order is listed in the README.
class TrainingLog {
 public:
  void log_il_epoch(int epoch, double loss, int samples, bool loss_increased);
  void log_episode(int episode, int env_id, double epsilon, Outcome outcome, double reward, int steps,
                   std::optional<double> loss);
  void log_validation(int episode, const MetricsReport& report);
  void log_test(const MetricsReport& report);

  const std::vector<std::string>& lines() const { return lines_; }
  void write(const std::filesystem::path& path) const;

  /// Receives every line as it is appended (progress output).
  std::function<void(const std::string&)> sink;

 private:
  void append(std::string line);
  std::vector<std::string> lines_;
};

/// Greedy one-step lookahead: every action is scored by R(s, a) + gamma_hat *
/// V(s') with s' the constant-velocity extrapolation of the world. Ties go to
/// the lowest action index.
struct LookaheadContext {
  const NetworkParams* params = nullptr;
  std::vector<Vec2> actions;
  RewardSpec reward;
  double gamma_hat = 0.9;
  bool force_augmented = false;
  SfmParams state_forces;
};

LookaheadContext lookahead_context(const NetworkParams& params, const ExperimentConfig& config);

std::size_t greedy_action_index(const LookaheadContext& context, const World& world);
Vec2 greedy_action(const LookaheadContext& context, const World& world);

/// Epsilon-greedy value policy. Its exploration stream is reseeded from each
/// episode seed.
class ValuePolicy final : public Policy {
 public:
  explicit ValuePolicy(LookaheadContext context, double epsilon = 0.0);

  void reset(std::uint64_t episode_seed) override;
  Vec2 act(const World& world) override;

  void set_epsilon(double epsilon) { epsilon_ = epsilon; }
  const LookaheadContext& context() const { return context_; }

 private:
  LookaheadContext context_;
  double epsilon_;
  Rng rng_;
};

/// Uniformly random action from the action space each step.
class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(std::vector<Vec2> actions);

  void reset(std::uint64_t episode_seed) override;
  Vec2 act(const World& world) override;

 private:
  std::vector<Vec2> actions_;
  Rng rng_;
};

/// ORCA-driven demonstrations on the imitation environment; each visited
/// state is labelled with its discounted return-to-go.
std::vector<ValueSample> collect_imitation(const ExperimentConfig& config, std::uint64_t master_seed);

struct ImitationResult {
  NetworkParams params;
  std::vector<double> epoch_losses;
};

/// Regression of the value network on the demonstration targets.
ImitationResult train_imitation(std::span<const ValueSample> dataset, const ExperimentConfig& config,
                                std::uint64_t master_seed, TrainingLog* log = nullptr);

/// Evaluation seeds are episode_seed(seed_base, kTestSeedBlock, i).
std::vector<EpisodeRecord> run_test_episodes(Policy& policy, const ExperimentConfig& config,
                                             std::uint64_t seed_base, int episodes,
                                             std::uint64_t block = kTestSeedBlock);

/// Greedy test phase: aggregate of run_test_episodes with a ValuePolicy.
MetricsReport evaluate(const NetworkParams& params, const ExperimentConfig& config, std::uint64_t seed_base,
                       int episodes);

struct RlResult {
  NetworkParams params;
  std::vector<std::pair<int, MetricsReport>> validations;  // (episode, report)
};

/// Epsilon-greedy TD learning with replay and a periodically copied target
/// network, starting from `initial` (momentum buffers are cleared first).
RlResult train_rl(const NetworkParams& initial, const ExperimentConfig& config, std::uint64_t master_seed,
                  TrainingLog* log = nullptr);

struct TrainingResult {
  NetworkParams imitation_params;
  NetworkParams params;
  std::vector<std::pair<int, MetricsReport>> validations;
  MetricsReport test;
};

/// Imitation learning, then RL, then the test phase.
TrainingResult run_training(const ExperimentConfig& config, std::uint64_t master_seed, TrainingLog& log);

}  // namespace sfmnav
