#include "sfmnav/reward.hpp"

#include <cmath>

#include "sfmnav/error.hpp"

namespace sfmnav {

std::string to_string(RewardVariant variant) {
  switch (variant) {
    case RewardVariant::Cri: return "cri";
    case RewardVariant::Sfm: return "sfm";
    case RewardVariant::SfmDiscounted: return "sfm_discounted";
  }
  return "unknown";
}

RewardVariant reward_variant_from_string(const std::string& name) {
  if (name == "cri") return RewardVariant::Cri;
  if (name == "sfm") return RewardVariant::Sfm;
  if (name == "sfm_discounted") return RewardVariant::SfmDiscounted;
  throw Error("unknown reward variant: " + name);
}

void RewardSpec::validate() const {
  if (!(B > 0.0)) throw Error("invalid reward spec: B must be positive");
  if (!(proximity_threshold > 0.0)) throw Error("invalid reward spec: proximity_threshold must be positive");
}

double reward_cri(const RewardInput& input) { return reward_cri(input, RewardSpec{}); }

double reward_cri(const RewardInput& input, const RewardSpec& spec) {
  if (input.min_dt < 0.0) return spec.collision_penalty;
  if (input.min_dt < spec.proximity_threshold) return 0.25 * (-0.1 + input.min_dt / 2.0);
  if (input.reached_goal) return spec.goal_reward;
  return 0.0;
}

double reward_sfm(const RewardInput& input, const RewardSpec& spec) {
  if (spec.variant == RewardVariant::Cri) throw Error("reward_sfm called with the cri variant");

  if (input.min_dt < 0.0) return spec.collision_penalty;
  if (input.min_dt < spec.proximity_threshold) return spec.A * std::exp(-spec.B * input.min_dt);
  if (input.reached_goal) {
    if (spec.variant == RewardVariant::SfmDiscounted && input.t >= spec.discount_onset) {
      return spec.goal_reward - spec.discount_rate * (input.t - spec.discount_onset);
    }
    return spec.goal_reward;
  }
  const double k = spec.k_reward;
  return k - norm(k * (input.v - input.v_pref_vec)) / 2.0 - spec.distance_coeff * input.d_g;
}

double compute_reward(const RewardInput& input, const RewardSpec& spec) {
  return spec.variant == RewardVariant::Cri ? reward_cri(input, spec) : reward_sfm(input, spec);
}

}  // namespace sfmnav
