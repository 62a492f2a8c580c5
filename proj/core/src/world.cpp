#include "sfmnav/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sfmnav/error.hpp"
#include "sfmnav/rng.hpp"
#include "sfmnav/sfm_forces.hpp"

namespace sfmnav {

std::string to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::Robot: return "robot";
    case EntityKind::Human: return "human";
    case EntityKind::ObstacleCore: return "obstacle";
  }
  return "unknown";
}

EntityKind entity_kind_from_string(const std::string& name) {
  if (name == "robot") return EntityKind::Robot;
  if (name == "human") return EntityKind::Human;
  if (name == "obstacle") return EntityKind::ObstacleCore;
  throw Error("unknown entity kind: " + name);
}

std::string to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Running: return "running";
    case Outcome::ReachedGoal: return "success";
    case Outcome::Collision: return "collision";
    case Outcome::Timeout: return "timeout";
  }
  return "unknown";
}

Outcome outcome_from_string(const std::string& name) {
  if (name == "running") return Outcome::Running;
  if (name == "success") return Outcome::ReachedGoal;
  if (name == "collision") return Outcome::Collision;
  if (name == "timeout") return Outcome::Timeout;
  throw Error("unknown outcome: " + name);
}

std::map<int, EnvLayout> ScenarioConfig::default_environments() {
  return {
      {1, EnvLayout{10, 0, ConcavePlacement::None, {}}},
      {2, EnvLayout{0, 5, ConcavePlacement::Fixed, {}}},
      {3, EnvLayout{0, 5, ConcavePlacement::Random, {}}},
      {4, EnvLayout{0, 0, ConcavePlacement::Fixed, {3, 2}}},
      {5, EnvLayout{0, 3, ConcavePlacement::Random, {2}}},
  };
}

void ScenarioConfig::validate() const {
  if (!(time_step > 0.0 && time_limit > 0.0)) throw Error("invalid scenario: time_step and time_limit must be positive");
  if (!(robot_radius > 0.0 && human_radius > 0.0)) throw Error("invalid scenario: radii must be positive");
  if (robot_v_pref < 0.0 || human_v_pref < 0.0) throw Error("invalid scenario: negative preferred speed");
  if (human_probability < 0.0 || human_probability > 1.0) throw Error("invalid scenario: human_probability outside [0, 1]");
  if (max_attempts < 1) throw Error("invalid scenario: max_attempts must be positive");
  orca.validate();
  for (const auto& [id, layout] : environments) {
    if (layout.random_elements < 0 || layout.humans < 0) throw Error("invalid scenario: negative element count");
    for (int len : layout.straight_barriers) {
      if (len < 1) throw Error("invalid scenario: barrier length must be positive");
    }
  }
}

std::vector<const AgentBody*> World::entities() const {
  std::vector<const AgentBody*> out;
  out.reserve(humans.size() + obstacle_cores.size());
  for (const AgentBody& h : humans) out.push_back(&h);
  for (const AgentBody& c : obstacle_cores) out.push_back(&c);
  return out;
}

namespace {

struct Disc {
  Vec2 center;
  double radius;
};

class ScenarioBuilder {
 public:
  ScenarioBuilder(const ScenarioConfig& config, std::uint64_t seed) : config_(config), rng_(seed) {}

  void add_concave(ConcavePlacement placement) {
    if (placement == ConcavePlacement::None) return;
    if (placement == ConcavePlacement::Fixed) {
      std::vector<Vec2> centers = shifted(config_.concave_offsets, config_.concave_fixed_center);
      if (!group_fits(centers)) throw Error("scenario infeasible: fixed concave barrier blocked");
      commit_group(centers);
      return;
    }
    place_group(config_.concave_offsets, config_.concave_random_min, config_.concave_random_max);
  }

  void add_straight_barrier(int length) {
    std::vector<Vec2> offsets;
    const double side = config_.obstacle_side();
    for (int i = 0; i < length; ++i) offsets.push_back({(i - 0.5 * (length - 1)) * side, 0.0});
    place_group(offsets, config_.barrier_region_min, config_.barrier_region_max);
  }

  void add_random_obstacle() {
    const double reach = config_.obstacle_region_radius;
    for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
      const Vec2 c{uniform(rng_, -reach, reach), uniform(rng_, -reach, reach)};
      if (norm(c) > reach) continue;
      if (!square_fits(c, 0.0)) continue;
      if (!clear_of_agents(c)) continue;
      obstacle_centers_.push_back(c);
      return;
    }
    throw Error("scenario infeasible: random obstacle");
  }

  void add_circle_human() {
    const double two_pi = 2.0 * std::numbers::pi;
    for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
      const double angle = uniform(rng_, 0.0, two_pi);
      const Vec2 start = config_.circle_radius * Vec2{std::cos(angle), std::sin(angle)};
      const double goal_angle =
          angle + std::numbers::pi + uniform(rng_, -config_.goal_angle_noise, config_.goal_angle_noise);
      const double goal_radius =
          config_.circle_radius + uniform(rng_, -config_.goal_radial_noise, config_.goal_radial_noise);
      const Vec2 goal = goal_radius * Vec2{std::cos(goal_angle), std::sin(goal_angle)};
      if (!human_point_free(start) || !human_point_free(goal)) continue;
      human_starts_.push_back(start);
      human_goals_.push_back(goal);
      return;
    }
    throw Error("scenario infeasible: circle human");
  }

  bool bernoulli(double p) { return uniform(rng_, 0.0, 1.0) < p; }

  World build(int env_id, std::uint64_t seed) const {
    World world;
    world.env_id = env_id;
    world.rng_seed = seed;
    world.time_step = config_.time_step;
    world.time_limit = config_.time_limit;
    world.orca = config_.orca;
    world.orca.time_step = config_.time_step;

    world.robot.id = 0;
    world.robot.kind = EntityKind::Robot;
    world.robot.position = config_.robot_start;
    world.robot.goal = config_.robot_goal;
    world.robot.radius = config_.robot_radius;
    world.robot.v_pref = config_.robot_v_pref;

    int next_id = 1;
    for (std::size_t i = 0; i < human_starts_.size(); ++i) {
      AgentBody human;
      human.id = next_id++;
      human.kind = EntityKind::Human;
      human.position = human_starts_[i];
      human.goal = human_goals_[i];
      human.radius = config_.human_radius;
      human.v_pref = config_.human_v_pref;
      world.humans.push_back(human);
    }
    for (const Vec2& c : obstacle_centers_) add_square_obstacle(world, c, config_.obstacle_side());
    return world;
  }

 private:
  static std::vector<Vec2> shifted(const std::vector<Vec2>& offsets, const Vec2& anchor) {
    std::vector<Vec2> out;
    out.reserve(offsets.size());
    for (const Vec2& o : offsets) out.push_back(anchor + o);
    return out;
  }

  void place_group(const std::vector<Vec2>& offsets, const Vec2& lo, const Vec2& hi) {
    for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
      const Vec2 anchor{uniform(rng_, lo.x, hi.x), uniform(rng_, lo.y, hi.y)};
      std::vector<Vec2> centers = shifted(offsets, anchor);
      if (group_fits(centers)) {
        commit_group(centers);
        return;
      }
    }
    throw Error("scenario infeasible: barrier placement");
  }

  bool group_fits(const std::vector<Vec2>& centers) const {
    for (const Vec2& c : centers) {
      if (!square_fits(c, config_.barrier_clearance)) return false;
      if (!clear_of_agents(c)) return false;
    }
    return true;
  }

  void commit_group(const std::vector<Vec2>& centers) {
    obstacle_centers_.insert(obstacle_centers_.end(), centers.begin(), centers.end());
  }

  double circumradius() const { return config_.obstacle_side() / std::numbers::sqrt2; }

  // Axis-aligned squares must not overlap and must keep `gap` between edges.
  bool square_fits(const Vec2& c, double gap) const {
    const double side = config_.obstacle_side();
    for (const Vec2& other : obstacle_centers_) {
      const double separation = std::max(std::fabs(c.x - other.x), std::fabs(c.y - other.y));
      if (separation < side + gap - 1e-12) return false;
    }
    const double keep_out = config_.start_goal_clearance + circumradius();
    return norm(c - config_.robot_start) >= keep_out && norm(c - config_.robot_goal) >= keep_out;
  }

  bool clear_of_agents(const Vec2& c) const {
    const double keep_out = circumradius() + config_.human_radius + config_.placement_margin;
    for (const Vec2& p : human_starts_) if (norm(c - p) < keep_out) return false;
    for (const Vec2& p : human_goals_) if (norm(c - p) < keep_out) return false;
    return true;
  }

  bool human_point_free(const Vec2& p) const {
    const double r = config_.human_radius;
    const double margin = config_.placement_margin;
    const double robot_gap = r + config_.robot_radius + margin;
    if (norm(p - config_.robot_start) < robot_gap || norm(p - config_.robot_goal) < robot_gap) return false;
    for (const Vec2& q : human_starts_) if (norm(p - q) < 2.0 * r + margin) return false;
    for (const Vec2& q : human_goals_) if (norm(p - q) < 2.0 * r + margin) return false;
    const double obstacle_gap = circumradius() + r + margin;
    for (const Vec2& c : obstacle_centers_) if (norm(p - c) < obstacle_gap) return false;
    return true;
  }

  const ScenarioConfig& config_;
  Rng rng_;
  std::vector<Vec2> obstacle_centers_;
  std::vector<Vec2> human_starts_;
  std::vector<Vec2> human_goals_;
};

Vec2 human_preferred_velocity(const AgentBody& human, double time_step) {
  const Vec2 to_goal = human.goal - human.position;
  const double distance = norm(to_goal);
  if (distance < human.v_pref * time_step) return to_goal / time_step;
  return preferred_velocity(human.position, human.goal, human.v_pref);
}

OrcaAgentView view_of(const AgentBody& body, const Vec2& preferred) {
  OrcaAgentView view;
  view.position = body.position;
  view.velocity = body.velocity;
  view.radius = body.radius;
  view.preferred_velocity = preferred;
  view.max_speed = std::max(body.v_pref, 1e-9);
  return view;
}

}  // namespace

World empty_world(const ScenarioConfig& config) {
  ScenarioBuilder builder(config, 0);
  return builder.build(0, 0);
}

void add_square_obstacle(World& world, const Vec2& center, double side) {
  int max_id = world.robot.id;
  for (const AgentBody& h : world.humans) max_id = std::max(max_id, h.id);
  for (const AgentBody& c : world.obstacle_cores) max_id = std::max(max_id, c.id);

  AgentBody core;
  core.id = max_id + 1;
  core.kind = EntityKind::ObstacleCore;
  core.position = center;
  core.goal = center;
  core.radius = 0.5 * side;
  core.v_pref = 0.0;
  world.obstacle_cores.push_back(core);
  world.obstacles.push_back(SquareObstacle{center, side, core.id});

  const std::vector<LineObstacle> edges = square_obstacle(center, side);
  world.obstacle_edges.insert(world.obstacle_edges.end(), edges.begin(), edges.end());
}

World generate_scenario(int env_id, std::uint64_t rng_seed, const ScenarioConfig& config) {
  const auto it = config.environments.find(env_id);
  if (it == config.environments.end()) throw Error("unknown environment id " + std::to_string(env_id));
  const EnvLayout& layout = it->second;

  // Greedy placement can jam on a crowded circle, so a failed draw restarts
  // the whole scene from a derived stream before giving up.
  constexpr int kRestarts = 16;
  for (int restart = 0;; ++restart) {
    ScenarioBuilder builder(config, restart == 0 ? rng_seed : derive_seed(rng_seed, 100 + restart));
    try {
      builder.add_concave(layout.concave);
      for (int length : layout.straight_barriers) builder.add_straight_barrier(length);

      int random_humans = 0;
      int random_obstacles = 0;
      for (int i = 0; i < layout.random_elements; ++i) {
        if (builder.bernoulli(config.human_probability)) {
          ++random_humans;
        } else {
          ++random_obstacles;
        }
      }
      for (int i = 0; i < random_obstacles; ++i) builder.add_random_obstacle();
      for (int i = 0; i < random_humans + layout.humans; ++i) builder.add_circle_human();
      return builder.build(env_id, rng_seed);
    } catch (const Error&) {
      if (restart + 1 == kRestarts) throw;
    }
  }
}

double closest_approach(const Vec2& start, const Vec2& end) {
  return point_segment_distance(start, end, Vec2{});
}

StepEvent detect_events(const World& before, const World& after) {
  StepEvent event;
  event.min_separation = std::numeric_limits<double>::infinity();

  auto check = [&](const std::vector<AgentBody>& from, const std::vector<AgentBody>& to) {
    for (std::size_t i = 0; i < to.size(); ++i) {
      const Vec2 rel_start = from[i].position - before.robot.position;
      const Vec2 rel_end = to[i].position - after.robot.position;
      const double clearance =
          closest_approach(rel_start, rel_end) - after.robot.radius - to[i].radius;
      event.min_separation = std::min(event.min_separation, clearance);
    }
  };
  check(before.humans, after.humans);
  check(before.obstacle_cores, after.obstacle_cores);

  if (event.min_separation < 0.0) {
    event.outcome = Outcome::Collision;
  } else if (norm(after.robot.position - after.robot.goal) < after.robot.radius) {
    event.outcome = Outcome::ReachedGoal;
  } else if (after.time() >= after.time_limit - 1e-9) {
    event.outcome = Outcome::Timeout;
  }
  return event;
}

World propagate_linear(const World& world, const Vec2& robot_action) {
  World next = world;
  const double dt = world.time_step;
  for (AgentBody& h : next.humans) h.position += dt * h.velocity;
  next.robot.velocity = robot_action;
  next.robot.position += dt * robot_action;
  ++next.step_index;
  return next;
}

std::pair<World, StepEvent> step(const World& world, const Vec2& robot_action) {
  if (!is_finite(robot_action) || norm(robot_action) > world.robot.v_pref + 1e-9) {
    throw Error("illegal action");
  }

  const double dt = world.time_step;
  std::vector<OrcaAgentView> views;
  views.reserve(world.humans.size() + 1);
  for (const AgentBody& h : world.humans) views.push_back(view_of(h, human_preferred_velocity(h, dt)));
  views.push_back(view_of(world.robot, robot_action));

  World next = world;
  std::vector<OrcaAgentView> neighbors;
  for (std::size_t i = 0; i < world.humans.size(); ++i) {
    neighbors.clear();
    for (std::size_t j = 0; j < views.size(); ++j) {
      if (j != i) neighbors.push_back(views[j]);
    }
    next.humans[i].velocity = orca_velocity(views[i], neighbors, world.obstacle_edges, world.orca);
  }
  for (AgentBody& h : next.humans) h.position += dt * h.velocity;
  next.robot.velocity = robot_action;
  next.robot.position += dt * robot_action;
  ++next.step_index;

  const StepEvent event = detect_events(world, next);
  return {std::move(next), event};
}

}  // namespace sfmnav
