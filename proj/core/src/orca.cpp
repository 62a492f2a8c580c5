#include "sfmnav/orca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sfmnav/error.hpp"

namespace sfmnav {

namespace {

constexpr double kEpsilon = 1e-9;
constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Unit vector, or `fallback` when `v` is (numerically) zero.
Vec2 safe_unit(const Vec2& v, const Vec2& fallback) {
  const double n = norm(v);
  return n > kEpsilon ? v / n : fallback;
}

/// Optimises along constraint line `line_no` subject to lines [0, line_no)
/// and the speed disc. Returns false when the restricted problem is empty.
bool linear_program_1(std::span<const OrcaLine> lines, std::size_t line_no, double radius,
                      const Vec2& opt_velocity, bool direction_opt, Vec2& result) {
  const OrcaLine& line = lines[line_no];
  const double dot_product = dot(line.point, line.direction);
  const double discriminant = dot_product * dot_product + radius * radius - abs_sq(line.point);

  // Speed disc lies entirely outside the half-plane.
  if (discriminant < 0.0) return false;

  const double sqrt_discriminant = std::sqrt(discriminant);
  double t_left = -dot_product - sqrt_discriminant;
  double t_right = -dot_product + sqrt_discriminant;

  for (std::size_t i = 0; i < line_no; ++i) {
    const double denominator = det(line.direction, lines[i].direction);
    const double numerator = det(lines[i].direction, line.point - lines[i].point);

    if (std::fabs(denominator) <= kEpsilon) {
      // Parallel lines.
      if (numerator < 0.0) return false;
      continue;
    }

    const double t = numerator / denominator;
    if (denominator >= 0.0) {
      t_right = std::min(t_right, t);
    } else {
      t_left = std::max(t_left, t);
    }
    if (t_left > t_right) return false;
  }

  if (direction_opt) {
    result = dot(opt_velocity, line.direction) > 0.0 ? line.point + t_right * line.direction
                                                     : line.point + t_left * line.direction;
  } else {
    const double t = dot(line.direction, opt_velocity - line.point);
    result = line.point + std::clamp(t, t_left, t_right) * line.direction;
  }
  return true;
}

/// Incremental 2D program. Returns the index of the first line it could not
/// satisfy, or lines.size() on success.
std::size_t linear_program_2(std::span<const OrcaLine> lines, double radius,
                             const Vec2& opt_velocity, bool direction_opt, Vec2& result) {
  if (direction_opt) {
    // opt_velocity is a unit vector here.
    result = opt_velocity * radius;
  } else if (abs_sq(opt_velocity) > radius * radius) {
    result = normalized(opt_velocity) * radius;
  } else {
    result = opt_velocity;
  }

  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (det(lines[i].direction, lines[i].point - result) > 0.0) {
      const Vec2 previous = result;
      if (!linear_program_1(lines, i, radius, opt_velocity, direction_opt, result)) {
        result = previous;
        return i;
      }
    }
  }
  return lines.size();
}

/// Fallback when the 2D program is infeasible: minimise the largest
/// violation of the agent lines while keeping obstacle lines hard.
void linear_program_3(std::span<const OrcaLine> lines, std::size_t obstacle_line_count,
                      std::size_t begin_line, double radius, Vec2& result) {
  double distance = 0.0;

  for (std::size_t i = begin_line; i < lines.size(); ++i) {
    if (det(lines[i].direction, lines[i].point - result) <= distance) continue;

    std::vector<OrcaLine> projected(lines.begin(),
                                    lines.begin() + static_cast<std::ptrdiff_t>(obstacle_line_count));

    for (std::size_t j = obstacle_line_count; j < i; ++j) {
      OrcaLine line;
      const double determinant = det(lines[i].direction, lines[j].direction);

      if (std::fabs(determinant) <= kEpsilon) {
        // Same direction: j is implied by i.
        if (dot(lines[i].direction, lines[j].direction) > 0.0) continue;
        line.point = 0.5 * (lines[i].point + lines[j].point);
      } else {
        line.point = lines[i].point +
                     (det(lines[j].direction, lines[i].point - lines[j].point) / determinant) *
                         lines[i].direction;
      }

      line.direction = safe_unit(lines[j].direction - lines[i].direction, lines[j].direction);
      projected.push_back(line);
    }

    const Vec2 previous = result;
    const Vec2 outward{-lines[i].direction.y, lines[i].direction.x};
    if (linear_program_2(projected, radius, outward, true, result) < projected.size()) {
      // Only reachable through rounding; the previous result is feasible.
      result = previous;
    }
    distance = det(lines[i].direction, lines[i].point - result);
  }
}

struct ObstacleVertex {
  Vec2 point;
  Vec2 direction;       // outgoing edge
  Vec2 prev_direction;  // incoming edge
  bool convex = true;
};

void append_obstacle_line(const OrcaAgentView& self, const LineObstacle& edge,
                          double inv_horizon, std::vector<OrcaLine>& lines) {
  const Vec2 edge_direction = edge.direction();
  ObstacleVertex vertex1{edge.endpoint_a, edge_direction, edge.prev_direction, edge.convex_a};
  ObstacleVertex vertex2{edge.endpoint_b, edge.next_direction, edge_direction, edge.convex_b};

  const Vec2 relative_position1 = vertex1.point - self.position;
  const Vec2 relative_position2 = vertex2.point - self.position;
  const double radius = self.radius;

  for (const OrcaLine& existing : lines) {
    if (det(inv_horizon * relative_position1 - existing.point, existing.direction) -
                inv_horizon * radius >= -kEpsilon &&
        det(inv_horizon * relative_position2 - existing.point, existing.direction) -
                inv_horizon * radius >= -kEpsilon) {
      return;  // already covered
    }
  }

  const double dist_sq1 = abs_sq(relative_position1);
  const double dist_sq2 = abs_sq(relative_position2);
  const double radius_sq = radius * radius;

  const Vec2 obstacle_vector = vertex2.point - vertex1.point;
  const double s = dot(-relative_position1, obstacle_vector) / abs_sq(obstacle_vector);
  const double dist_sq_line = abs_sq(-relative_position1 - s * obstacle_vector);

  OrcaLine line;

  if (s < 0.0 && dist_sq1 <= radius_sq) {
    // Touching the left vertex.
    if (vertex1.convex) {
      line.point = {};
      line.direction = safe_unit({-relative_position1.y, relative_position1.x}, -edge_direction);
      lines.push_back(line);
    }
    return;
  }

  if (s > 1.0 && dist_sq2 <= radius_sq) {
    // Touching the right vertex; skip if the next edge handles it.
    if (vertex2.convex && det(relative_position2, vertex2.direction) >= 0.0) {
      line.point = {};
      line.direction = safe_unit({-relative_position2.y, relative_position2.x}, -edge_direction);
      lines.push_back(line);
    }
    return;
  }

  if (s >= 0.0 && s <= 1.0 && dist_sq_line <= radius_sq) {
    // Touching the edge itself.
    line.point = {};
    line.direction = -edge_direction;
    lines.push_back(line);
    return;
  }

  Vec2 left_leg_direction;
  Vec2 right_leg_direction;
  bool same_vertex = false;

  auto left_leg = [radius](const Vec2& rel, double dist_sq) {
    const double leg = std::sqrt(dist_sq - radius * radius);
    return Vec2{rel.x * leg - rel.y * radius, rel.x * radius + rel.y * leg} / dist_sq;
  };
  auto right_leg = [radius](const Vec2& rel, double dist_sq) {
    const double leg = std::sqrt(dist_sq - radius * radius);
    return Vec2{rel.x * leg + rel.y * radius, -rel.x * radius + rel.y * leg} / dist_sq;
  };

  if (s < 0.0 && dist_sq_line <= radius_sq) {
    // Seen obliquely: the left vertex alone defines the obstacle.
    if (!vertex1.convex) return;
    vertex2 = vertex1;
    same_vertex = true;
    left_leg_direction = left_leg(relative_position1, dist_sq1);
    right_leg_direction = right_leg(relative_position1, dist_sq1);
  } else if (s > 1.0 && dist_sq_line <= radius_sq) {
    // Seen obliquely: the right vertex alone defines the obstacle.
    if (!vertex2.convex) return;
    vertex1 = vertex2;
    same_vertex = true;
    left_leg_direction = left_leg(relative_position2, dist_sq2);
    right_leg_direction = right_leg(relative_position2, dist_sq2);
  } else {
    left_leg_direction =
        vertex1.convex ? left_leg(relative_position1, dist_sq1) : -vertex1.direction;
    right_leg_direction =
        vertex2.convex ? right_leg(relative_position2, dist_sq2) : vertex1.direction;
  }

  // A leg may not point into the neighbouring edge at a convex vertex.
  bool left_leg_foreign = false;
  bool right_leg_foreign = false;
  if (vertex1.convex && det(left_leg_direction, -vertex1.prev_direction) >= 0.0) {
    left_leg_direction = -vertex1.prev_direction;
    left_leg_foreign = true;
  }
  if (vertex2.convex && det(right_leg_direction, vertex2.direction) <= 0.0) {
    right_leg_direction = vertex2.direction;
    right_leg_foreign = true;
  }

  const Vec2 left_cutoff = inv_horizon * (vertex1.point - self.position);
  const Vec2 right_cutoff = inv_horizon * (vertex2.point - self.position);
  const Vec2 cutoff_vector = right_cutoff - left_cutoff;

  const Vec2& velocity = self.velocity;
  const double t =
      same_vertex ? 0.5 : dot(velocity - left_cutoff, cutoff_vector) / abs_sq(cutoff_vector);
  const double t_left = dot(velocity - left_cutoff, left_leg_direction);
  const double t_right = dot(velocity - right_cutoff, right_leg_direction);

  if ((t < 0.0 && t_left < 0.0) || (same_vertex && t_left < 0.0 && t_right < 0.0)) {
    // Project on the left cut-off circle.
    const Vec2 unit_w = safe_unit(velocity - left_cutoff, -normalized(relative_position1));
    line.direction = {unit_w.y, -unit_w.x};
    line.point = left_cutoff + radius * inv_horizon * unit_w;
    lines.push_back(line);
    return;
  }

  if (t > 1.0 && t_right < 0.0) {
    // Project on the right cut-off circle.
    const Vec2 unit_w = safe_unit(velocity - right_cutoff, -normalized(relative_position2));
    line.direction = {unit_w.y, -unit_w.x};
    line.point = right_cutoff + radius * inv_horizon * unit_w;
    lines.push_back(line);
    return;
  }

  const double dist_sq_cutoff = (t < 0.0 || t > 1.0 || same_vertex)
                                    ? kInfinity
                                    : abs_sq(velocity - (left_cutoff + t * cutoff_vector));
  const double dist_sq_left =
      t_left < 0.0 ? kInfinity : abs_sq(velocity - (left_cutoff + t_left * left_leg_direction));
  const double dist_sq_right =
      t_right < 0.0 ? kInfinity
                    : abs_sq(velocity - (right_cutoff + t_right * right_leg_direction));

  if (dist_sq_cutoff <= dist_sq_left && dist_sq_cutoff <= dist_sq_right) {
    line.direction = -vertex1.direction;
    line.point = left_cutoff + radius * inv_horizon * Vec2{-line.direction.y, line.direction.x};
    lines.push_back(line);
    return;
  }

  if (dist_sq_left <= dist_sq_right) {
    if (left_leg_foreign) return;
    line.direction = left_leg_direction;
    line.point = left_cutoff + radius * inv_horizon * Vec2{-line.direction.y, line.direction.x};
    lines.push_back(line);
    return;
  }

  if (right_leg_foreign) return;
  line.direction = -right_leg_direction;
  line.point = right_cutoff + radius * inv_horizon * Vec2{-line.direction.y, line.direction.x};
  lines.push_back(line);
}

OrcaLine agent_line(const OrcaAgentView& self, const OrcaAgentView& other,
                    const OrcaConfig& config) {
  const double inv_horizon = 1.0 / config.time_horizon_agents;
  const Vec2 relative_position = other.position - self.position;
  const Vec2 relative_velocity = self.velocity - other.velocity;
  const double dist_sq = abs_sq(relative_position);
  const double combined_radius = self.radius + other.radius;
  const double combined_radius_sq = combined_radius * combined_radius;

  OrcaLine line;
  Vec2 u;

  if (dist_sq > combined_radius_sq) {
    // Vector from the cut-off centre to the relative velocity.
    const Vec2 w = relative_velocity - inv_horizon * relative_position;
    const double w_length_sq = abs_sq(w);
    const double dot_product = dot(w, relative_position);

    if (dot_product < 0.0 && dot_product * dot_product > combined_radius_sq * w_length_sq) {
      // Project on the cut-off circle.
      const double w_length = std::sqrt(w_length_sq);
      const Vec2 unit_w = w / w_length;
      line.direction = {unit_w.y, -unit_w.x};
      u = (combined_radius * inv_horizon - w_length) * unit_w;
    } else {
      // Project on the legs.
      const double leg = std::sqrt(dist_sq - combined_radius_sq);
      if (det(relative_position, w) > 0.0) {
        line.direction = Vec2{relative_position.x * leg - relative_position.y * combined_radius,
                              relative_position.x * combined_radius + relative_position.y * leg} /
                         dist_sq;
      } else {
        line.direction = -Vec2{relative_position.x * leg + relative_position.y * combined_radius,
                               -relative_position.x * combined_radius + relative_position.y * leg} /
                         dist_sq;
      }
      u = dot(relative_velocity, line.direction) * line.direction - relative_velocity;
    }
  } else {
    // Already overlapping: resolve within one time step.
    const double inv_time_step = 1.0 / config.time_step;
    const Vec2 w = relative_velocity - inv_time_step * relative_position;
    const double w_length = norm(w);
    const Vec2 unit_w = safe_unit(w, Vec2{1.0, 0.0});
    line.direction = {unit_w.y, -unit_w.x};
    u = (combined_radius * inv_time_step - w_length) * unit_w;
  }

  line.point = self.velocity + 0.5 * u;
  return line;
}

template <typename Key>
std::vector<std::size_t> sorted_indices(const std::vector<Key>& keys) {
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&keys](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  return order;
}

}  // namespace

void OrcaConfig::validate() const {
  if (!(time_horizon_agents > 0.0 && time_horizon_obstacles > 0.0 && neighbor_distance > 0.0 &&
        time_step > 0.0)) {
    throw Error("invalid orca config: all fields must be strictly positive");
  }
  if (!(safety_margin >= 0.0)) throw Error("invalid orca config: safety_margin must be non-negative");
}

std::vector<LineObstacle> polygon_obstacle(std::span<const Vec2> ccw_vertices) {
  const std::size_t n = ccw_vertices.size();
  if (n < 2) throw Error("invalid obstacle: at least two vertices required");

  std::vector<Vec2> directions(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 edge = ccw_vertices[(i + 1) % n] - ccw_vertices[i];
    if (abs_sq(edge) == 0.0) throw Error("invalid obstacle: coincident vertices");
    directions[i] = normalized(edge);
  }

  std::vector<LineObstacle> edges;
  edges.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t prev = (i + n - 1) % n;
    const std::size_t next = (i + 1) % n;
    LineObstacle edge;
    edge.endpoint_a = ccw_vertices[i];
    edge.endpoint_b = ccw_vertices[next];
    edge.prev_direction = directions[prev];
    edge.next_direction = directions[next];
    edge.convex_a = n == 2 || det(directions[prev], directions[i]) >= 0.0;
    edge.convex_b = n == 2 || det(directions[i], directions[next]) >= 0.0;
    edges.push_back(edge);
  }
  return edges;
}

std::vector<LineObstacle> segment_obstacle(const Vec2& a, const Vec2& b) {
  const Vec2 vertices[] = {a, b};
  return polygon_obstacle(vertices);
}

std::vector<LineObstacle> square_obstacle(const Vec2& center, double side) {
  const double h = 0.5 * side;
  const Vec2 vertices[] = {center + Vec2{-h, -h}, center + Vec2{h, -h}, center + Vec2{h, h},
                           center + Vec2{-h, h}};
  return polygon_obstacle(vertices);
}

OrcaConstraints build_orca_constraints(const OrcaAgentView& agent,
                                       std::span<const OrcaAgentView> neighbors,
                                       std::span<const LineObstacle> obstacles,
                                       const OrcaConfig& config) {
  OrcaConstraints constraints;
  OrcaAgentView self = agent;
  self.radius += config.safety_margin;

  // Obstacle edges facing the agent, nearest first.
  const double range = config.time_horizon_obstacles * self.max_speed + self.radius;
  std::vector<std::size_t> edge_ids;
  std::vector<double> edge_dist_sq;
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const LineObstacle& edge = obstacles[i];
    const double side =
        det(edge.endpoint_a - self.position, edge.endpoint_b - edge.endpoint_a);
    if (side >= 0.0) continue;
    const double d = point_segment_distance(edge.endpoint_a, edge.endpoint_b, self.position);
    if (d * d < range * range) {
      edge_ids.push_back(i);
      edge_dist_sq.push_back(d * d);
    }
  }
  const double inv_horizon_obstacles = 1.0 / config.time_horizon_obstacles;
  for (std::size_t k : sorted_indices(edge_dist_sq)) {
    append_obstacle_line(self, obstacles[edge_ids[k]], inv_horizon_obstacles, constraints.lines);
  }
  constraints.obstacle_line_count = constraints.lines.size();

  std::vector<std::size_t> neighbor_ids;
  std::vector<double> neighbor_dist_sq;
  const double neighbor_range_sq = config.neighbor_distance * config.neighbor_distance;
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    const double d_sq = abs_sq(neighbors[i].position - self.position);
    if (d_sq < neighbor_range_sq) {
      neighbor_ids.push_back(i);
      neighbor_dist_sq.push_back(d_sq);
    }
  }
  for (std::size_t k : sorted_indices(neighbor_dist_sq)) {
    OrcaAgentView other = neighbors[neighbor_ids[k]];
    other.radius += config.safety_margin;
    constraints.lines.push_back(agent_line(self, other, config));
  }
  return constraints;
}

Vec2 solve_orca_program(const OrcaConstraints& constraints, double max_speed,
                        const Vec2& preferred) {
  Vec2 result;
  const std::size_t failed =
      linear_program_2(constraints.lines, max_speed, preferred, false, result);
  if (failed < constraints.lines.size()) {
    linear_program_3(constraints.lines, constraints.obstacle_line_count, failed, max_speed,
                     result);
  }
  const double speed = norm(result);
  if (speed > max_speed) result *= max_speed / speed;
  return result;
}

Vec2 orca_velocity(const OrcaAgentView& self, std::span<const OrcaAgentView> neighbors,
                   std::span<const LineObstacle> obstacles, const OrcaConfig& config) {
  const OrcaConstraints constraints = build_orca_constraints(self, neighbors, obstacles, config);
  return solve_orca_program(constraints, self.max_speed, self.preferred_velocity);
}

std::vector<Vec2> step_all_orca(std::span<const OrcaAgentView> agents,
                                std::span<const LineObstacle> obstacles,
                                const OrcaConfig& config) {
  std::vector<Vec2> velocities;
  velocities.reserve(agents.size());
  std::vector<OrcaAgentView> others;
  others.reserve(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    others.clear();
    for (std::size_t j = 0; j < agents.size(); ++j) {
      if (j != i) others.push_back(agents[j]);
    }
    velocities.push_back(orca_velocity(agents[i], others, obstacles, config));
  }
  return velocities;
}

}  // namespace sfmnav
