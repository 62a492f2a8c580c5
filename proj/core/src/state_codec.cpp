#include "sfmnav/state_codec.hpp"

#include <cmath>

namespace sfmnav {

namespace {

constexpr double kNullEntityDistance = 100.0;

void write_self(const RobotSelfState& s, double* row) {
  row[0] = s.d_g;
  row[1] = s.v_pref;
  row[2] = s.theta;
  row[3] = s.r;
  row[4] = s.v.x;
  row[5] = s.v.y;
  if (s.F) {
    row[6] = s.F->x;
    row[7] = s.F->y;
  }
}

void write_entity(const EntityObservable& e, double* row) {
  row[0] = e.p.x;
  row[1] = e.p.y;
  row[2] = e.v.x;
  row[3] = e.v.y;
  row[4] = e.r_i;
  row[5] = e.d_i;
  row[6] = e.r_sum;
  if (e.f) {
    row[7] = e.f->x;
    row[8] = e.f->y;
  }
}

}  // namespace

double goal_frame_angle(const AgentBody& robot) {
  const Vec2 to_goal = robot.goal - robot.position;
  if (to_goal.x == 0.0 && to_goal.y == 0.0) return 0.0;
  return std::atan2(to_goal.y, to_goal.x);
}

JointState encode(const World& world, bool force_augmented, const SfmParams& sfm_params) {
  const AgentBody& robot = world.robot;
  const double angle = -goal_frame_angle(robot);

  JointState joint;
  joint.force_augmented = force_augmented;
  RobotSelfState& self = joint.self_state;
  self.d_g = norm(robot.goal - robot.position);
  self.v_pref = robot.v_pref;
  self.theta = robot.heading_theta;
  self.r = robot.radius;
  self.v = rotated(robot.velocity, angle);

  Vec2 resultant;
  for (const AgentBody* entity : world.entities()) {
    const Vec2 offset = entity->position - robot.position;
    EntityObservable obs;
    obs.p = rotated(offset, angle);
    obs.v = rotated(entity->velocity, angle);
    obs.r_i = entity->radius;
    obs.d_i = norm(offset);
    obs.r_sum = robot.radius + entity->radius;
    if (force_augmented) {
      const Vec2 force = repulsive_force(robot.position, entity->position, sfm_params);
      resultant += force;
      obs.f = rotated(force, angle);
    }
    joint.entities.push_back(obs);
  }
  if (force_augmented) self.F = rotated(resultant, angle);
  return joint;
}

StateMatrix flatten(const JointState& joint) {
  const bool forces = joint.force_augmented;
  const int self_cols = self_width(forces);
  const int cols = row_width(forces);
  const auto rows = static_cast<Eigen::Index>(std::max<std::size_t>(joint.entities.size(), 1));

  StateMatrix matrix(rows, cols);
  if (joint.entities.empty()) {
    EntityObservable null_entity;
    null_entity.p = {kNullEntityDistance, 0.0};
    null_entity.d_i = kNullEntityDistance;
    null_entity.r_sum = joint.self_state.r;
    if (forces) null_entity.f = repulsive_force({}, null_entity.p, SfmParams{});
    write_self(joint.self_state, matrix.row(0).data());
    write_entity(null_entity, matrix.row(0).data() + self_cols);
    return matrix;
  }
  for (Eigen::Index i = 0; i < rows; ++i) {
    double* row = matrix.row(i).data();
    write_self(joint.self_state, row);
    write_entity(joint.entities[static_cast<std::size_t>(i)], row + self_cols);
  }
  return matrix;
}

StateMatrix encode_flat(const World& world, bool force_augmented, const SfmParams& sfm_params) {
  return flatten(encode(world, force_augmented, sfm_params));
}

}  // namespace sfmnav
