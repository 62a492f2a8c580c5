#pragma once

#include <span>

#include "sfmnav/vec2.hpp"

namespace sfmnav {

/// Social-force constants. `k_attract` drives the goal attraction; the
/// remaining three shape the exponential repulsion a * exp((d_z - d) / b).
struct SfmParams {
  double k_attract = 1.0;
  double a_z = 1.0;
  double b_z = 1.0;
  double d_z = 0.0;

  /// Throws Error if b_z <= 0 or any gain is negative.
  void validate() const;

  bool operator==(const SfmParams&) const = default;
};

/// k * (preferred - current).
Vec2 attractive_force(const Vec2& current_velocity, const Vec2& preferred_velocity,
                      const SfmParams& params);

/// Exponential repulsion exerted by `source` on `subject`, pointing from the
/// source toward the subject. Throws Error("degenerate repulsor") when the two
/// positions coincide.
Vec2 repulsive_force(const Vec2& subject_position, const Vec2& source_position,
                     const SfmParams& params);

/// Sum of repulsive_force over all sources; zero for an empty span.
Vec2 resultant_repulsive_force(const Vec2& robot_position, std::span<const Vec2> sources,
                               const SfmParams& params);

/// v_pref toward the goal, or zero once the entity is within 1e-9 of it.
Vec2 preferred_velocity(const Vec2& position, const Vec2& goal, double v_pref);

}  // namespace sfmnav
