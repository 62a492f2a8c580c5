#pragma once

#include <string>

#include "sfmnav/vec2.hpp"

namespace sfmnav {

enum class RewardVariant { Cri, Sfm, SfmDiscounted };

std::string to_string(RewardVariant variant);
RewardVariant reward_variant_from_string(const std::string& name);

/// Constants of the sparse collision/goal reward and of the dense
/// social-force reward. The Cri variant only reads collision_penalty,
/// proximity_threshold and goal_reward.
struct RewardSpec {
  RewardVariant variant = RewardVariant::Cri;
  double A = -0.03;
  double B = 10.0;
  double k_reward = 0.001;
  double collision_penalty = -0.25;
  double proximity_threshold = 0.2;
  double goal_reward = 1.0;
  double discount_rate = 0.02;
  double discount_onset = 10.0;
  double distance_coeff = 0.0001;

  void validate() const;
  bool operator==(const RewardSpec&) const = default;
};

/// Everything a reward needs to know about one robot step.
struct RewardInput {
  double min_dt = 0.0;   // smallest clearance to any entity this step
  bool reached_goal = false;
  Vec2 v;                // robot velocity
  Vec2 v_pref_vec;       // v_pref toward the goal
  double d_g = 0.0;      // distance to goal
  double t = 0.0;        // episode time after the step
};

/// Sparse reward: collision penalty, linear proximity penalty, goal bonus.
double reward_cri(const RewardInput& input);

/// Same as reward_cri but with the constants taken from `spec`.
double reward_cri(const RewardInput& input, const RewardSpec& spec);

/// Dense reward: exponential proximity penalty, optionally time-discounted
/// goal bonus, and an attraction term k - |k (v - v_pref)| / 2 - c d_g.
/// Throws Error if spec.variant is Cri.
double reward_sfm(const RewardInput& input, const RewardSpec& spec);

/// Dispatches on spec.variant.
double compute_reward(const RewardInput& input, const RewardSpec& spec);

}  // namespace sfmnav
