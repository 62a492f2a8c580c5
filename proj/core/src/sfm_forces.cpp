#include "sfmnav/sfm_forces.hpp"

#include <cmath>

#include "sfmnav/error.hpp"

namespace sfmnav {

void SfmParams::validate() const {
  if (!(b_z > 0.0)) throw Error("invalid sfm params: b_z must be positive");
  if (k_attract < 0.0 || a_z < 0.0 || d_z < 0.0) {
    throw Error("invalid sfm params: k_attract, a_z and d_z must be non-negative");
  }
}

Vec2 attractive_force(const Vec2& current_velocity, const Vec2& preferred_velocity,
                      const SfmParams& params) {
  return params.k_attract * (preferred_velocity - current_velocity);
}

Vec2 repulsive_force(const Vec2& subject_position, const Vec2& source_position,
                     const SfmParams& params) {
  const Vec2 offset = subject_position - source_position;
  const double distance = norm(offset);
  if (distance == 0.0) throw Error("degenerate repulsor");
  const double magnitude = params.a_z * std::exp((params.d_z - distance) / params.b_z);
  return (magnitude / distance) * offset;
}

Vec2 resultant_repulsive_force(const Vec2& robot_position, std::span<const Vec2> sources,
                               const SfmParams& params) {
  Vec2 total;
  for (const Vec2& source : sources) total += repulsive_force(robot_position, source, params);
  return total;
}

Vec2 preferred_velocity(const Vec2& position, const Vec2& goal, double v_pref) {
  const Vec2 to_goal = goal - position;
  const double distance = norm(to_goal);
  if (distance < 1e-9) return {};
  return (v_pref / distance) * to_goal;
}

}  // namespace sfmnav
