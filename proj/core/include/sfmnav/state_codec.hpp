#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "sfmnav/sfm_forces.hpp"
#include "sfmnav/vec2.hpp"
#include "sfmnav/world.hpp"

namespace sfmnav {

/// Row-major (entities x features) network input.
using StateMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr int kPlainSelfWidth = 6;
inline constexpr int kForceSelfWidth = 8;
inline constexpr int kPlainRowWidth = 13;
inline constexpr int kForceRowWidth = 17;

constexpr int self_width(bool force_augmented) {
  return force_augmented ? kForceSelfWidth : kPlainSelfWidth;
}
constexpr int row_width(bool force_augmented) {
  return force_augmented ? kForceRowWidth : kPlainRowWidth;
}

/// Robot features in the goal-aligned frame: [d_g, v_pref, theta, r, vx, vy
/// (, Fx, Fy)].
struct RobotSelfState {
  double d_g = 0.0;
  double v_pref = 0.0;
  double theta = 0.0;
  double r = 0.0;
  Vec2 v;
  std::optional<Vec2> F;

  bool operator==(const RobotSelfState&) const = default;
};

/// One human or obstacle core, relative to the robot: [px, py, vx, vy, r_i,
/// d_i, r + r_i (, fx, fy)].
struct EntityObservable {
  Vec2 p;
  Vec2 v;
  double r_i = 0.0;
  double d_i = 0.0;
  double r_sum = 0.0;
  std::optional<Vec2> f;

  bool operator==(const EntityObservable&) const = default;
};

struct JointState {
  RobotSelfState self_state;
  std::vector<EntityObservable> entities;  // humans, then obstacle cores
  bool force_augmented = false;

  bool operator==(const JointState&) const = default;
};

/// Angle of the goal direction; the frame is rotated by its negative.
double goal_frame_angle(const AgentBody& robot);

/// Rotates the world into the robot-centred frame whose x axis points to the
/// goal. With `force_augmented`, each entity also carries the repulsion it
/// exerts on the robot and the robot state carries their sum.
JointState encode(const World& world, bool force_augmented, const SfmParams& sfm_params = {});

/// One row per entity: the robot features followed by that entity's. An
/// empty scene yields a single row for a far-away null entity.
StateMatrix flatten(const JointState& joint);

/// encode followed by flatten.
StateMatrix encode_flat(const World& world, bool force_augmented, const SfmParams& sfm_params = {});

}  // namespace sfmnav
