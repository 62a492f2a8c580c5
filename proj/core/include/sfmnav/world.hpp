#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sfmnav/orca.hpp"
#include "sfmnav/vec2.hpp"

namespace sfmnav {

enum class EntityKind { Robot, Human, ObstacleCore };

std::string to_string(EntityKind kind);
EntityKind entity_kind_from_string(const std::string& name);

/// A circular body: the robot, a pedestrian, or the zero-velocity agent that
/// sits at the centre of a square obstacle.
struct AgentBody {
  int id = 0;
  EntityKind kind = EntityKind::Human;
  Vec2 position;
  Vec2 velocity;
  double radius = 0.3;
  Vec2 goal;
  double v_pref = 1.0;
  double heading_theta = 0.0;

  bool operator==(const AgentBody&) const = default;
};

struct SquareObstacle {
  Vec2 center;
  double side = 0.6;
  int core_agent_id = 0;

  bool operator==(const SquareObstacle&) const = default;
};

enum class ConcavePlacement { None, Fixed, Random };

/// Which components make up one environment type.
struct EnvLayout {
  int random_elements = 0;  // each a human or an obstacle, drawn independently
  int humans = 0;           // circle-crossing humans
  ConcavePlacement concave = ConcavePlacement::None;
  std::vector<int> straight_barriers;  // lengths (in squares) of straight rows

  bool operator==(const EnvLayout&) const = default;
};

/// Geometry and sampling constants for every environment type. Loaded from
/// the `scenario:` section of an experiment file.
struct ScenarioConfig {
  double time_step = 0.25;
  double time_limit = 25.0;
  double robot_radius = 0.3;
  double human_radius = 0.3;
  double robot_v_pref = 1.0;
  double human_v_pref = 1.0;
  Vec2 robot_start{0.0, -4.0};
  Vec2 robot_goal{0.0, 4.0};
  double circle_radius = 4.0;
  double human_probability = 0.6;
  double goal_angle_noise = 0.5;
  double goal_radial_noise = 0.3;
  double placement_margin = 0.2;
  double obstacle_region_radius = 3.0;
  double start_goal_clearance = 1.0;
  double barrier_clearance = 0.8;
  /// Square centres of the concave barrier relative to its anchor.
  std::vector<Vec2> concave_offsets{{-0.6, 0.0}, {0.0, 0.0}, {0.6, 0.0}, {-0.6, -0.6}, {0.6, -0.6}};
  Vec2 concave_fixed_center{0.0, 0.0};
  Vec2 concave_random_min{-1.0, -1.5};
  Vec2 concave_random_max{1.0, 1.5};
  Vec2 barrier_region_min{-2.5, -2.0};
  Vec2 barrier_region_max{2.5, 2.0};
  int max_attempts = 1000;
  OrcaConfig orca;
  std::map<int, EnvLayout> environments = default_environments();

  static std::map<int, EnvLayout> default_environments();
  double obstacle_side() const { return 2.0 * human_radius; }
  void validate() const;

  bool operator==(const ScenarioConfig&) const = default;
};

enum class Outcome { Running, ReachedGoal, Collision, Timeout };

std::string to_string(Outcome outcome);
Outcome outcome_from_string(const std::string& name);

struct StepEvent {
  Outcome outcome = Outcome::Running;
  /// Smallest clearance d_t = distance - r - r_i between the robot and any
  /// entity over the step (swept). +inf when there are no entities.
  double min_separation = 0.0;
};

struct World {
  AgentBody robot;
  std::vector<AgentBody> humans;
  std::vector<SquareObstacle> obstacles;
  std::vector<AgentBody> obstacle_cores;  // aligned with `obstacles`
  std::vector<LineObstacle> obstacle_edges;
  int step_index = 0;
  double time_step = 0.25;
  double time_limit = 25.0;
  OrcaConfig orca;
  int env_id = 1;
  std::uint64_t rng_seed = 0;

  double time() const { return step_index * time_step; }
  /// Humans followed by obstacle cores, in id order.
  std::vector<const AgentBody*> entities() const;

  bool operator==(const World&) const = default;
};

/// Builds one randomized instance of environment `env_id`. Throws
/// Error("scenario infeasible") if rejection sampling exhausts its attempts.
World generate_scenario(int env_id, std::uint64_t rng_seed, const ScenarioConfig& config);

/// Places a square obstacle (and its core agent) in `world`; used by tests
/// and hand-built scenes.
void add_square_obstacle(World& world, const Vec2& center, double side);

/// World with only the robot, configured from `config`.
World empty_world(const ScenarioConfig& config);

/// Advances the world by one time step with the robot moving at `robot_action`.
/// Humans are ORCA-driven and see the robot. Throws Error("illegal action")
/// when the action exceeds the robot's preferred speed.
std::pair<World, StepEvent> step(const World& world, const Vec2& robot_action);

/// Constant-velocity extrapolation used for one-step lookahead.
World propagate_linear(const World& world, const Vec2& robot_action);

/// Terminal-event classification for a transition `before` -> `after`.
StepEvent detect_events(const World& before, const World& after);

/// Distance from the origin to the segment [start, end], i.e. the closest
/// approach of two linearly moving points given their relative offsets.
double closest_approach(const Vec2& start, const Vec2& end);

}  // namespace sfmnav
