#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sfmnav/vec2.hpp"

namespace sfmnav {

/// What one ORCA agent knows about itself (or what it sees of a neighbour).
struct OrcaAgentView {
  Vec2 position;
  Vec2 velocity;
  double radius = 0.3;
  Vec2 preferred_velocity;
  double max_speed = 1.0;
};

/// One directed edge of an obstacle outline. Outlines are traversed
/// counter-clockwise, so the obstacle lies to the left of a -> b and only
/// agents on the right of the edge see it.
/// The neighbouring edge directions and vertex convexity are filled in by the
/// builders below; a lone segment is represented as two opposite edges.
struct LineObstacle {
  Vec2 endpoint_a;
  Vec2 endpoint_b;
  Vec2 prev_direction;  // unit direction of the edge ending at endpoint_a
  Vec2 next_direction;  // unit direction of the edge starting at endpoint_b
  bool convex_a = true;
  bool convex_b = true;

  Vec2 direction() const { return normalized(endpoint_b - endpoint_a); }

  bool operator==(const LineObstacle&) const = default;
};

struct OrcaConfig {
  double time_horizon_agents = 5.0;
  double time_horizon_obstacles = 5.0;
  double neighbor_distance = 10.0;
  double time_step = 0.25;
  /// Added to every agent's radius while planning. At zero the fallback
  /// program lets crowded agents overlap by several centimetres.
  double safety_margin = 0.1;

  void validate() const;

  bool operator==(const OrcaConfig&) const = default;
};

/// Directed line; the permitted half-plane lies to its left.
struct OrcaLine {
  Vec2 point;
  Vec2 direction;
};

std::vector<LineObstacle> polygon_obstacle(std::span<const Vec2> ccw_vertices);
std::vector<LineObstacle> segment_obstacle(const Vec2& a, const Vec2& b);
/// Axis-aligned square centred at `center`.
std::vector<LineObstacle> square_obstacle(const Vec2& center, double side);

struct OrcaConstraints {
  std::vector<OrcaLine> lines;
  std::size_t obstacle_line_count = 0;  // obstacle lines come first
};

/// Builds the ORCA half-planes of `self` against its obstacles and neighbours.
/// Neighbours beyond config.neighbor_distance are ignored; obstacles beyond
/// time_horizon_obstacles * max_speed + radius likewise.
OrcaConstraints build_orca_constraints(const OrcaAgentView& self,
                                       std::span<const OrcaAgentView> neighbors,
                                       std::span<const LineObstacle> obstacles,
                                       const OrcaConfig& config);

/// Velocity closest to `preferred` inside every half-plane and the disc of
/// radius `max_speed`. When the half-planes are jointly infeasible the
/// agent-line violation is minimised instead, with obstacle lines kept hard.
Vec2 solve_orca_program(const OrcaConstraints& constraints, double max_speed,
                        const Vec2& preferred);

/// New collision-avoiding velocity for `self`. Always finite with
/// |v| <= max_speed.
Vec2 orca_velocity(const OrcaAgentView& self, std::span<const OrcaAgentView> neighbors,
                   std::span<const LineObstacle> obstacles, const OrcaConfig& config);

/// Simultaneous update: every agent plans against the same snapshot, the
/// others acting as its neighbours.
std::vector<Vec2> step_all_orca(std::span<const OrcaAgentView> agents,
                                std::span<const LineObstacle> obstacles,
                                const OrcaConfig& config);

}  // namespace sfmnav
