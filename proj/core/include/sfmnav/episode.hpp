#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "sfmnav/reward.hpp"
#include "sfmnav/world.hpp"

namespace sfmnav {

/// Chooses the robot velocity for the current world.
class Policy {
 public:
  virtual ~Policy() = default;
  /// Called once before every episode with that episode's seed.
  virtual void reset(std::uint64_t /*episode_seed*/) {}
  virtual Vec2 act(const World& world) = 0;
};

/// Drives the robot with ORCA, treating humans as neighbours and square
/// obstacles as hard constraints. Used as the imitation-learning expert.
/// The robot driven by ORCA. Like the learned policies it perceives square
/// obstacles only through their core agents, never through the edges.
class OrcaPolicy final : public Policy {
 public:
  Vec2 act(const World& world) override;
};

/// Wraps a plain function.
class FunctionPolicy final : public Policy {
 public:
  explicit FunctionPolicy(std::function<Vec2(const World&)> fn) : fn_(std::move(fn)) {}
  Vec2 act(const World& world) override { return fn_(world); }

 private:
  std::function<Vec2(const World&)> fn_;
};

/// Snapshot of every body after a step (and of the initial state).
struct TrajectoryFrame {
  double time = 0.0;
  AgentBody robot;
  std::vector<AgentBody> entities;  // humans, then obstacle cores

  bool operator==(const TrajectoryFrame&) const = default;
};

struct EpisodeRecord {
  int env_id = 0;
  std::uint64_t seed = 0;
  Outcome outcome = Outcome::Timeout;
  std::optional<double> nav_time;  // only for ReachedGoal
  /// Sum of per-step rewards, the i-th (0-based) weighted by
  /// gamma^(i * dt * v_pref).
  double cumulative_reward = 0.0;
  int steps = 0;
  std::vector<SquareObstacle> obstacles;
  std::vector<TrajectoryFrame> trajectory;

  bool operator==(const EpisodeRecord&) const = default;
};

/// Reward inputs for the transition `before` -> `after` driven by `action`.
/// The preferred-velocity vector is taken at the pre-step position.
RewardInput reward_input(const World& before, const Vec2& action, const World& after,
                         const StepEvent& event);

/// Called after every step with the pre-step world, the action, the
/// post-step world, the event and the reward.
using StepObserver = std::function<void(const World&, const Vec2&, const World&, const StepEvent&, double)>;

struct EpisodeOptions {
  double gamma = 0.9;
  bool record_trajectory = true;
  StepObserver observer;
};

/// Runs one episode from generate_scenario(env_id, seed) until a terminal
/// outcome.
EpisodeRecord run_episode(Policy& policy, const ScenarioConfig& scenario, int env_id,
                          std::uint64_t seed, const RewardSpec& reward_spec,
                          const EpisodeOptions& options = {});

/// Same loop starting from an existing world.
EpisodeRecord run_episode_from(Policy& policy, World world, const RewardSpec& reward_spec,
                               const EpisodeOptions& options = {});

/// Line-delimited JSON export: one `episode` header record followed by one
/// `step` record per frame. Field order is fixed and documented in README.
void write_episode(const EpisodeRecord& record, const std::filesystem::path& path);
EpisodeRecord read_episode(const std::filesystem::path& path);

}  // namespace sfmnav
