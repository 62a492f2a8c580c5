#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sfmnav/error.hpp"
#include "sfmnav/reward.hpp"

using namespace sfmnav;

namespace {

RewardInput input(double min_dt, bool goal = false) {
  RewardInput in;
  in.min_dt = min_dt;
  in.reached_goal = goal;
  in.v = {0, 1};
  in.v_pref_vec = {0, 1};
  in.d_g = 8;
  in.t = 5;
  return in;
}

RewardSpec spec(RewardVariant v) {
  RewardSpec s;
  s.variant = v;
  return s;
}

}  // namespace

TEST(Cri, Branches) {
  EXPECT_EQ(reward_cri(input(-0.01)), -0.25);
  EXPECT_NEAR(reward_cri(input(0.1)), -0.0125, 1e-15);
  EXPECT_EQ(reward_cri(input(0.5, true)), 1.0);
  EXPECT_EQ(reward_cri(input(0.5)), 0.0);
}

TEST(Cri, CollisionBeatsGoal) { EXPECT_EQ(reward_cri(input(-0.1, true)), -0.25); }

TEST(Cri, IgnoresMotionAndTime) {
  for (double dt : {-0.3, 0.05, 0.19, 0.3}) {
    for (bool goal : {false, true}) {
      RewardInput a = input(dt, goal);
      RewardInput b = a;
      b.v = {0.3, -0.2};
      b.v_pref_vec = {1, 0};
      b.d_g = 0.1;
      b.t = 24;
      EXPECT_EQ(reward_cri(a), reward_cri(b));
    }
  }
}

TEST(Sfm, Branches) {
  const RewardSpec s = spec(RewardVariant::Sfm);
  EXPECT_NEAR(reward_sfm(input(0.1), s), -0.0110364, 1e-7);
  EXPECT_NEAR(reward_sfm(input(0.5), s), 0.0002, 1e-15);
  EXPECT_EQ(reward_sfm(input(-0.2), s), -0.25);
  RewardInput g = input(0.5, true);
  g.t = 15;
  EXPECT_EQ(reward_sfm(g, s), 1.0);
  EXPECT_NEAR(reward_sfm(g, spec(RewardVariant::SfmDiscounted)), 0.9, 1e-15);
  g.t = 8;
  EXPECT_EQ(reward_sfm(g, spec(RewardVariant::SfmDiscounted)), 1.0);
}

TEST(Sfm, RejectsCriSpec) { EXPECT_THROW(reward_sfm(input(0.5), spec(RewardVariant::Cri)), Error); }

TEST(Sfm, ProximityIncreasing) {
  const RewardSpec s = spec(RewardVariant::Sfm);
  double prev = reward_sfm(input(0.0), s);
  for (int i = 1; i < 200; ++i) {
    const double r = reward_sfm(input(0.2 * i / 200), s);
    EXPECT_GT(r, prev);
    prev = r;
  }
}

TEST(Sfm, ZeroGainsReduceToCri) {
  RewardSpec s = spec(RewardVariant::Sfm);
  s.k_reward = 0;
  s.distance_coeff = 0;
  RewardInput in = input(0.7);
  in.v = {0.2, -0.9};
  EXPECT_EQ(reward_sfm(in, s), 0.0);
}

TEST(Rewards, BoundedOnArenaInputs) {
  for (RewardVariant v : {RewardVariant::Cri, RewardVariant::Sfm, RewardVariant::SfmDiscounted}) {
    const RewardSpec s = spec(v);
    for (double dt = -1; dt < 10; dt += 0.05) {
      for (double t = 0; t <= 25; t += 2.5) {
        for (bool goal : {false, true}) {
          RewardInput in = input(dt, goal);
          in.t = t;
          in.v = {-1, 0};
          in.d_g = 12;
          const double r = compute_reward(in, s);
          EXPECT_GE(r, -0.25);
          EXPECT_LE(r, 1.0);
        }
      }
    }
  }
}

TEST(Rewards, MatchOracleOnGrid) {
  for (double dt : {-0.5, -1e-9, 0.0, 0.05, 0.1999, 0.2, 1.0}) {
    for (double t : {3.0, 10.0, 17.5}) {
      for (bool goal : {false, true}) {
        RewardInput in = input(dt, goal);
        in.t = t;
        in.v = {0.4, 0.3};
        in.d_g = 3;
        EXPECT_NEAR(compute_reward(in, spec(RewardVariant::Cri)), oracle::cri(dt, goal), 1e-12);
        EXPECT_NEAR(compute_reward(in, spec(RewardVariant::Sfm)),
                    oracle::sfm(dt, goal, 0.4, 0.3, 0, 1, 3, t, false), 1e-12);
        EXPECT_NEAR(compute_reward(in, spec(RewardVariant::SfmDiscounted)),
                    oracle::sfm(dt, goal, 0.4, 0.3, 0, 1, 3, t, true), 1e-12);
      }
    }
  }
}

TEST(RewardSpecTest, VariantNamesRoundTrip) {
  for (RewardVariant v : {RewardVariant::Cri, RewardVariant::Sfm, RewardVariant::SfmDiscounted}) {
    EXPECT_EQ(reward_variant_from_string(to_string(v)), v);
  }
  EXPECT_THROW(reward_variant_from_string("dense"), Error);
}

TEST(RewardSpecTest, ValidateRejectsBadConstants) {
  RewardSpec s;
  s.B = 0;
  EXPECT_THROW(s.validate(), Error);
  s = {};
  s.proximity_threshold = -1;
  EXPECT_THROW(s.validate(), Error);
}
